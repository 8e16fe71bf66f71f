"""Separations and the local axioms whose conjunction characterizes
strategyproofness on this domain.

A separation is an ordered pair of weak orders (coarse, fine) where the fine
order is obtained from the coarse one by splitting exactly one indifference
class into an upper part and a lower part, leaving everything else in place.
Checking a handful of probability (in)equalities on each separation replaces
the quadratic scan over all order pairs:

- responsive: the upper part's probability must not fall, the lower part's
  must not rise, when moving from coarse to fine.
- direct: if any coarse class changes probability at all, then both the upper
  and the lower part must actually change.
- monotonic: responsive and direct together.
- upper_invariant: classes ranked above the split class keep their
  probability exactly.
- lower_invariant: classes ranked below the split class keep their
  probability exactly.

Every checker returns ``None`` on a pass or a `Certificate` pinpointing the
first failure in canonical separation order; certificates are self-contained
and re-checkable against the mechanism via `verify_certificate`.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .core import WeakOrder, enumerate_weak_orders, format_rational
from .mechanisms import MechanismTable

AXIOMS = ("responsive", "direct", "upper_invariant", "lower_invariant")

# Serial scans below this many separations regardless of the workers setting;
# process startup would dominate the work.
_MIN_CHUNK = 256


@dataclass(frozen=True)
class Separation:
    """One coarse class (1-based position ``kappa``) split into
    ``upper_part`` ranked just above ``lower_part``; all other classes
    identical between the two orders."""

    coarse: WeakOrder
    fine: WeakOrder
    kappa: int
    upper_part: tuple[int, ...]
    lower_part: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "coarse": self.coarse.text,
            "fine": self.fine.text,
            "kappa": self.kappa,
            "M1": list(self.upper_part),
            "M2": list(self.lower_part),
        }


def as_separation(coarse: WeakOrder, fine: WeakOrder) -> Separation | None:
    """Recognize whether (coarse, fine) is a separation; None otherwise."""
    if coarse.m != fine.m:
        raise ValueError("orders over different alternative sets")
    if fine.num_classes != coarse.num_classes + 1:
        return None
    k = 0
    while coarse.classes[k] == fine.classes[k]:
        k += 1
        # fine has one more class, so a first difference always exists
    upper, lower = fine.classes[k], fine.classes[k + 1]
    if set(upper) | set(lower) != set(coarse.classes[k]):
        return None
    if coarse.classes[k + 1 :] != fine.classes[k + 2 :]:
        return None
    return Separation(coarse, fine, k + 1, upper, lower)


def enumerate_separations(coarse: WeakOrder) -> tuple[Separation, ...]:
    """All separations with this coarse side, in canonical order: by class
    position, then by ascending bitmask of the upper part over the class
    members (bit j = j-th smallest member). A class of size c contributes
    2^c - 2 separations."""
    out = []
    for k, cls in enumerate(coarse.classes):
        c = len(cls)
        if c < 2:
            continue
        for mask in range(1, (1 << c) - 1):
            upper = tuple(cls[j] for j in range(c) if mask >> j & 1)
            lower = tuple(cls[j] for j in range(c) if not mask >> j & 1)
            fine_classes = (
                coarse.classes[:k] + (upper, lower) + coarse.classes[k + 1 :]
            )
            fine = WeakOrder(coarse.m, fine_classes)
            out.append(Separation(coarse, fine, k + 1, upper, lower))
    return tuple(out)


@lru_cache(maxsize=8)
def all_separations(m: int) -> tuple[Separation, ...]:
    """Every separation at problem size m, grouped by coarse order in
    canonical enumeration order."""
    out: list[Separation] = []
    for order in enumerate_weak_orders(m):
        out.extend(enumerate_separations(order))
    return tuple(out)


@dataclass(frozen=True)
class Certificate:
    """A machine-checkable axiom violation.

    ``lhs`` is the probability of the witness set under the coarse report,
    ``rhs`` the probability of the same set under the fine report. The
    witness set is the coarse class ``k`` for the invariance axioms
    (witness == "class"), or the named split part otherwise. The violation
    shape per axiom:

    - responsive, witness upper_part: rhs < lhs (the part lost mass)
    - responsive, witness lower_part: rhs > lhs (the part gained mass)
    - direct: some coarse class changed mass but the witness part did not
      (rhs == lhs)
    - upper_invariant / lower_invariant: rhs != lhs for a class that had to
      stay fixed
    """

    axiom: str
    separation: Separation
    witness: str
    k: int
    lhs: Fraction
    rhs: Fraction
    separation_index: int

    def witness_set(self) -> tuple[int, ...]:
        if self.witness == "class":
            return self.separation.coarse.classes[self.k - 1]
        if self.witness == "upper_part":
            return self.separation.upper_part
        if self.witness == "lower_part":
            return self.separation.lower_part
        raise ValueError(f"unknown witness kind {self.witness!r}")

    def to_json(self) -> dict:
        data = {"axiom": self.axiom}
        data.update(self.separation.to_json())
        data.update(
            {
                "k": self.k,
                "witness": self.witness,
                "lhs": format_rational(self.lhs),
                "rhs": format_rational(self.rhs),
            }
        )
        return data


def _responsive_violation(
    mech: MechanismTable, sep: Separation, index: int
) -> Certificate | None:
    coarse_lot = mech.lottery(sep.coarse)
    fine_lot = mech.lottery(sep.fine)
    lhs = coarse_lot.mass(sep.upper_part)
    rhs = fine_lot.mass(sep.upper_part)
    if rhs < lhs:
        return Certificate("responsive", sep, "upper_part", sep.kappa, lhs, rhs, index)
    lhs = coarse_lot.mass(sep.lower_part)
    rhs = fine_lot.mass(sep.lower_part)
    if rhs > lhs:
        return Certificate("responsive", sep, "lower_part", sep.kappa, lhs, rhs, index)
    return None


def _direct_violation(
    mech: MechanismTable, sep: Separation, index: int
) -> Certificate | None:
    coarse_lot = mech.lottery(sep.coarse)
    fine_lot = mech.lottery(sep.fine)
    triggered = any(
        coarse_lot.mass(cls) != fine_lot.mass(cls) for cls in sep.coarse.classes
    )
    if not triggered:
        return None
    for witness, part in (("upper_part", sep.upper_part), ("lower_part", sep.lower_part)):
        lhs = coarse_lot.mass(part)
        rhs = fine_lot.mass(part)
        if lhs == rhs:
            return Certificate("direct", sep, witness, sep.kappa, lhs, rhs, index)
    return None


def _invariance_violation(
    mech: MechanismTable, sep: Separation, index: int, axiom: str
) -> Certificate | None:
    coarse_lot = mech.lottery(sep.coarse)
    fine_lot = mech.lottery(sep.fine)
    if axiom == "upper_invariant":
        positions = range(1, sep.kappa)
    else:
        positions = range(sep.kappa + 1, sep.coarse.num_classes + 1)
    for k in positions:
        cls = sep.coarse.classes[k - 1]
        lhs = coarse_lot.mass(cls)
        rhs = fine_lot.mass(cls)
        if lhs != rhs:
            return Certificate(axiom, sep, "class", k, lhs, rhs, index)
    return None


def _violation(
    mech: MechanismTable, sep: Separation, index: int, axiom: str
) -> Certificate | None:
    if axiom == "responsive":
        return _responsive_violation(mech, sep, index)
    if axiom == "direct":
        return _direct_violation(mech, sep, index)
    if axiom in ("upper_invariant", "lower_invariant"):
        return _invariance_violation(mech, sep, index, axiom)
    raise ValueError(f"unknown axiom {axiom!r}")


def verify_certificate(mech: MechanismTable, cert: Certificate) -> bool:
    """Re-derive the certificate's numbers from the mechanism and confirm
    they exhibit the claimed violation."""
    sep = cert.separation
    if as_separation(sep.coarse, sep.fine) != sep:
        return False
    coarse_lot = mech.lottery(sep.coarse)
    fine_lot = mech.lottery(sep.fine)
    witness = cert.witness_set()
    lhs = coarse_lot.mass(witness)
    rhs = fine_lot.mass(witness)
    if (lhs, rhs) != (cert.lhs, cert.rhs):
        return False
    if cert.axiom == "responsive":
        if cert.witness == "upper_part":
            return rhs < lhs
        if cert.witness == "lower_part":
            return rhs > lhs
        return False
    if cert.axiom == "direct":
        triggered = any(
            coarse_lot.mass(cls) != fine_lot.mass(cls) for cls in sep.coarse.classes
        )
        return triggered and lhs == rhs and cert.witness in ("upper_part", "lower_part")
    if cert.axiom == "upper_invariant":
        return cert.witness == "class" and cert.k < sep.kappa and lhs != rhs
    if cert.axiom == "lower_invariant":
        return cert.witness == "class" and cert.k > sep.kappa and lhs != rhs
    return False


def _scan_chunk(
    mech: MechanismTable,
    axioms: tuple[str, ...],
    start: int,
    stop: int,
    all_violations: bool,
) -> dict[str, list[Certificate]]:
    seps = all_separations(mech.m)
    found: dict[str, list[Certificate]] = {axiom: [] for axiom in axioms}
    pending = set(axioms)
    for index in range(start, stop):
        if not pending and not all_violations:
            break
        sep = seps[index]
        for axiom in axioms:
            if not all_violations and axiom not in pending:
                continue
            cert = _violation(mech, sep, index, axiom)
            if cert is not None:
                found[axiom].append(cert)
                pending.discard(axiom)
    return found


def _scan_chunk_args(args) -> dict[str, list[Certificate]]:
    return _scan_chunk(*args)


def find_violations(
    mech: MechanismTable,
    axioms: Iterable[str] = AXIOMS,
    *,
    all_violations: bool = False,
    workers: int = 1,
) -> dict[str, list[Certificate]]:
    """Scan all separations for the given axioms. Returns, per axiom, the
    violations in canonical order: just the first unless ``all_violations``.
    The result does not depend on the worker count."""
    axioms = tuple(axioms)
    for axiom in axioms:
        if axiom not in AXIOMS:
            raise ValueError(f"unknown axiom {axiom!r}")
    mech.validate()
    seps = all_separations(mech.m)
    n = len(seps)
    workers = max(1, min(workers, (n + _MIN_CHUNK - 1) // _MIN_CHUNK))
    if workers == 1:
        return _scan_chunk(mech, axioms, 0, n, all_violations)

    bounds = [(n * i) // workers for i in range(workers + 1)]
    tasks = [
        (mech, axioms, bounds[i], bounds[i + 1], all_violations)
        for i in range(workers)
        if bounds[i] < bounds[i + 1]
    ]
    merged: dict[str, list[Certificate]] = {axiom: [] for axiom in axioms}
    with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
        for part in pool.map(_scan_chunk_args, tasks):
            for axiom, certs in part.items():
                merged[axiom].extend(certs)
    for axiom in axioms:
        certs = sorted(merged[axiom], key=lambda c: c.separation_index)
        merged[axiom] = certs if all_violations else certs[:1]
    return merged


def _first(certs: list[Certificate]) -> Certificate | None:
    return certs[0] if certs else None


def check_separation_responsive(
    mech: MechanismTable, *, workers: int = 1
) -> Certificate | None:
    return _first(find_violations(mech, ("responsive",), workers=workers)["responsive"])


def check_separation_direct(
    mech: MechanismTable, *, workers: int = 1
) -> Certificate | None:
    return _first(find_violations(mech, ("direct",), workers=workers)["direct"])


def check_upper_invariant(
    mech: MechanismTable, *, workers: int = 1
) -> Certificate | None:
    return _first(
        find_violations(mech, ("upper_invariant",), workers=workers)["upper_invariant"]
    )


def check_lower_invariant(
    mech: MechanismTable, *, workers: int = 1
) -> Certificate | None:
    return _first(
        find_violations(mech, ("lower_invariant",), workers=workers)["lower_invariant"]
    )


def check_separation_monotonic(
    mech: MechanismTable, *, workers: int = 1
) -> Certificate | None:
    """Responsive and direct combined. The certificate is the first failure
    of either, ordered by separation and then responsive before direct."""
    found = find_violations(mech, ("responsive", "direct"), workers=workers)
    candidates = [
        (cert.separation_index, priority, cert)
        for priority, axiom in enumerate(("responsive", "direct"))
        for cert in found[axiom]
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda item: item[:2])[2]


@dataclass
class AxiomReport:
    """Outcome of running every axiom checker against one mechanism."""

    mechanism: str
    m: int
    verdicts: dict[str, bool]
    certificates: dict[str, list[Certificate]]

    def to_json(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "m": self.m,
            "verdicts": dict(self.verdicts),
            "certificates": {
                axiom: [c.to_json() for c in certs]
                for axiom, certs in self.certificates.items()
            },
        }


def check_all_axioms(
    mech: MechanismTable, *, all_violations: bool = False, workers: int = 1
) -> AxiomReport:
    """Run the four base checkers in one scan and derive monotonic."""
    found = find_violations(
        mech, AXIOMS, all_violations=all_violations, workers=workers
    )
    verdicts = {axiom: not found[axiom] for axiom in AXIOMS}
    verdicts["monotonic"] = verdicts["responsive"] and verdicts["direct"]
    return AxiomReport(
        mechanism=mech.name, m=mech.m, verdicts=verdicts, certificates=found
    )
