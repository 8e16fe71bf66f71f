#!/usr/bin/env python3
"""Multiway splits decompose into chains of single separations, and any two
orders connect through the orders induced along a utility segment."""

import random

from sepax import (
    WeakOrder,
    as_multiway_separation,
    blend_utilities,
    order_from_utility,
    random_strict_utility,
    refinement_path,
    split_chain,
)

w = WeakOrder.parse

# split the all-indifferent class three ways in one move, then decompose
multi = as_multiway_separation(w("0,1,2"), w("0>1>2"))
print(f"3-way split {multi.coarse.text} -> {multi.fine.text}")
for style in ("top_first", "bottom_merge"):
    steps = split_chain(multi, style)
    texts = [multi.coarse.text] + [s.fine.text for s in steps]
    print(f"  {style:12s} {' -> '.join(texts)}")
print()

# walking between two strict orders passes through their common coarsening
path = refinement_path(w("0>1>2"), w("2>1>0"))
print("path from 0>1>2 to 2>1>0:")
print("  orders:", " -> ".join(o.text for o in path.orders))
print("  sampled at alphas:", ", ".join(str(a) for a in path.alphas))
print("  breakpoints:", ", ".join(str(b) for b in path.segment.breakpoints))
for direction, refinement in path.steps():
    print(f"  step: {direction} {refinement.coarse.text} / {refinement.fine.text}")
print()

# with random utilities the walk can be longer; every sampled position
# really induces the order the path claims
rng = random.Random(1)
start, end = w("0>1,2,3"), w("3>2>1>0")
u = random_strict_utility(start, rng)
v = random_strict_utility(end, rng)
path = refinement_path(start, end, u=u, v=v)
print(f"path from {start.text} to {end.text} under random utilities:")
print("  " + " -> ".join(o.text for o in path.orders))
for order, alpha in zip(path.orders, path.alphas):
    assert order_from_utility(blend_utilities(u, v, alpha)) == order
print("  every alpha induces its order: ok")
