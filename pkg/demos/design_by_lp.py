#!/usr/bin/env python3
# Strategyproofness is a finite set of linear equalities and inequalities
# over the table entries, so designing an optimal strategyproof mechanism
# is one exact-rational LP solve.

from sepax import (
    check_sp_bruteforce,
    design_mechanism,
    generate_sp_constraints,
    sp_lp_summary,
    top_class_welfare_objective,
)

print("constraint system sizes (reduced vs naive pairwise):")
for m in (2, 3):
    s = sp_lp_summary(m)
    print(
        f"  m={m}: {s['variables']} variables, {s['reduced_rows']} reduced rows"
        f" vs {s['naive_rows']} naive rows"
    )
print()

# the m=2 system is small enough to read in full
print(generate_sp_constraints(2).to_text())

# maximize the probability each report gets something from its own top class
for m in (2, 3):
    solution, mech = design_mechanism(m, top_class_welfare_objective(m))
    print(f"m={m} welfare design: status={solution.status}, "
          f"optimum={solution.objective_value}")
    violation = check_sp_bruteforce(mech)
    print(f"  brute-force recheck of the optimum: "
          f"{'strategyproof' if violation is None else 'VIOLATION'}")

print()
print("designed m=2 table:")
solution, mech = design_mechanism(2, top_class_welfare_objective(2))
for order, lottery in mech.items():
    print(f"  {order.text:4s} -> {lottery.texts()}")
