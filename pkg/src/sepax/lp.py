"""Exact-rational linear programs and a two-phase primal simplex.

Conventions: every variable is implicitly nonnegative, the objective is
always maximized, and all coefficients are `fractions.Fraction`. Pivoting
uses Bland's smallest-index rule throughout, so degenerate programs cannot
cycle; optima are exact, never approximate.

Text export is one constraint per line::

    # sense: max; all variables >= 0
    max: 1 x[0>1][0] + 1 x[1>0][1]
    norm[0>1]: 1 x[0>1][0] + 1 x[0>1][1] = 1
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import format_rational, parse_rational

RELATIONS = ("<=", "=", ">=")


@dataclass
class Constraint:
    """``sum(coeffs[j] * x_j) relation rhs``; coefficients keyed by variable
    index, zero coefficients omitted."""

    name: str
    coeffs: dict[int, Fraction]
    relation: str
    rhs: Fraction

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        self.coeffs = {j: Fraction(c) for j, c in self.coeffs.items() if c != 0}
        self.rhs = Fraction(self.rhs)

    def evaluate(self, values: list[Fraction]) -> Fraction:
        return sum((c * values[j] for j, c in self.coeffs.items()), start=Fraction(0))

    def satisfied(self, values: list[Fraction]) -> bool:
        lhs = self.evaluate(values)
        if self.relation == "<=":
            return lhs <= self.rhs
        if self.relation == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass
class LinearProgram:
    """A named-variable LP; `solve_lp` maximizes the objective subject to
    the constraints and implicit nonnegativity."""

    variables: list[str]
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, Fraction] = field(default_factory=dict)

    def add_constraint(
        self, name: str, coeffs: dict[int, Fraction], relation: str, rhs: Fraction | int
    ) -> None:
        self.constraints.append(Constraint(name, coeffs, relation, Fraction(rhs)))

    def check_assignment(self, assignment: dict[str, Fraction]) -> list[str]:
        """Names of everything violated: constraints, negative variables,
        and variables missing from the assignment."""
        values = []
        bad = []
        for name in self.variables:
            if name not in assignment:
                bad.append(f"missing:{name}")
                values.append(Fraction(0))
                continue
            value = Fraction(assignment[name])
            values.append(value)
            if value < 0:
                bad.append(f"negative:{name}")
        bad.extend(c.name for c in self.constraints if not c.satisfied(values))
        return bad

    def objective_value(self, assignment: dict[str, Fraction]) -> Fraction:
        values = [Fraction(assignment.get(name, 0)) for name in self.variables]
        return sum(
            (c * values[j] for j, c in self.objective.items()), start=Fraction(0)
        )

    def to_text(self) -> str:
        lines = ["# sense: max; all variables >= 0"]
        lines.append("max: " + self._linear_text(self.objective))
        for con in self.constraints:
            lines.append(
                f"{con.name}: {self._linear_text(con.coeffs)} {con.relation} "
                f"{format_rational(con.rhs)}"
            )
        return "\n".join(lines) + "\n"

    def _linear_text(self, coeffs: dict[int, Fraction]) -> str:
        if not coeffs:
            return "0"
        terms = []
        for j in sorted(coeffs):
            coef = coeffs[j]
            sign = "- " if coef < 0 else ("+ " if terms else "")
            terms.append(f"{sign}{format_rational(abs(coef))} {self.variables[j]}")
        return " ".join(terms)

    def to_json(self) -> dict:
        return {
            "sense": "max",
            "variables": list(self.variables),
            "objective": {
                self.variables[j]: format_rational(c)
                for j, c in sorted(self.objective.items())
            },
            "constraints": [
                {
                    "name": con.name,
                    "coefficients": {
                        self.variables[j]: format_rational(c)
                        for j, c in sorted(con.coeffs.items())
                    },
                    "relation": con.relation,
                    "rhs": format_rational(con.rhs),
                }
                for con in self.constraints
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "LinearProgram":
        variables = list(data["variables"])
        index = {name: j for j, name in enumerate(variables)}
        lp = LinearProgram(variables)
        lp.objective = {
            index[name]: parse_rational(text)
            for name, text in data.get("objective", {}).items()
        }
        for raw in data.get("constraints", []):
            lp.add_constraint(
                raw["name"],
                {index[n]: parse_rational(t) for n, t in raw["coefficients"].items()},
                raw["relation"],
                parse_rational(raw["rhs"]),
            )
        return lp


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    assignment: dict[str, Fraction] = field(default_factory=dict)
    objective_value: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "objective_value": (
                None
                if self.objective_value is None
                else format_rational(self.objective_value)
            ),
            "assignment": {
                name: format_rational(value)
                for name, value in sorted(self.assignment.items())
            },
        }


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Two-phase simplex on the standard-form tableau. Exact, and immune to
    cycling via Bland's rule."""
    n = len(lp.variables)
    rows: list[tuple[list[Fraction], str, Fraction]] = []
    for con in lp.constraints:
        dense = [Fraction(0)] * n
        for j, c in con.coeffs.items():
            if not 0 <= j < n:
                raise ValueError(f"constraint {con.name!r} uses unknown variable {j}")
            dense[j] = c
        if con.rhs < 0:
            dense = [-c for c in dense]
            relation = {"<=": ">=", ">=": "<=", "=": "="}[con.relation]
            rows.append((dense, relation, -con.rhs))
        else:
            rows.append((dense, con.relation, con.rhs))

    num_rows = len(rows)
    slack_col: dict[int, int] = {}
    art_col: dict[int, int] = {}
    cols = n
    for i, (_, relation, _) in enumerate(rows):
        if relation != "=":
            slack_col[i] = cols
            cols += 1
    for i, (_, relation, _) in enumerate(rows):
        if relation != "<=":
            art_col[i] = cols
            cols += 1

    # tableau rows have cols coefficient entries plus the rhs at the end
    tableau = []
    basis = []
    for i, (dense, relation, rhs) in enumerate(rows):
        row = dense + [Fraction(0)] * (cols - n) + [rhs]
        if relation == "<=":
            row[slack_col[i]] = Fraction(1)
            basis.append(slack_col[i])
        elif relation == ">=":
            row[slack_col[i]] = Fraction(-1)
            row[art_col[i]] = Fraction(1)
            basis.append(art_col[i])
        else:
            row[art_col[i]] = Fraction(1)
            basis.append(art_col[i])
        tableau.append(row)

    artificials = set(art_col.values())
    banned: set[int] = set()

    if artificials:
        phase_cost = [Fraction(0)] * cols
        for j in artificials:
            phase_cost[j] = Fraction(-1)
        value = _run_simplex(tableau, basis, phase_cost, banned, drop_leaving=artificials)
        if value != 0:
            return LPSolution(status="infeasible")
        _expel_artificials(tableau, basis, artificials)
        banned |= artificials

    cost = [Fraction(0)] * cols
    for j, c in lp.objective.items():
        cost[j] = Fraction(c)
    value = _run_simplex(tableau, basis, cost, banned, drop_leaving=set())
    if value is None:
        return LPSolution(status="unbounded")

    solution = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            solution[b] = tableau[i][-1]
    assignment = {name: solution[j] for j, name in enumerate(lp.variables)}
    return LPSolution(status="optimal", assignment=assignment, objective_value=value)


def _run_simplex(
    tableau: list[list[Fraction]],
    basis: list[int],
    cost: list[Fraction],
    banned: set[int],
    drop_leaving: set[int],
) -> Fraction | None:
    """Maximize cost over the current tableau in place. Returns the optimal
    value, or None when unbounded. Columns in ``banned`` never enter;
    columns in ``drop_leaving`` are banned as soon as they leave the basis
    (used to keep phase-one artificials from re-entering)."""
    cols = len(cost)
    # reduced-cost row, maintained incrementally like any other row
    z = list(cost) + [Fraction(0)]
    for i, b in enumerate(basis):
        if cost[b] != 0:
            factor = cost[b]
            row = tableau[i]
            for j in range(cols + 1):
                z[j] -= factor * row[j]

    while True:
        entering = -1
        for j in range(cols):
            if j in banned:
                continue
            if z[j] > 0:
                entering = j
                break
        if entering < 0:
            return -z[-1]

        leaving = -1
        best_ratio: Fraction | None = None
        for i, row in enumerate(tableau):
            if row[entering] <= 0:
                continue
            ratio = row[-1] / row[entering]
            if (
                best_ratio is None
                or ratio < best_ratio
                or (ratio == best_ratio and basis[i] < basis[leaving])
            ):
                best_ratio = ratio
                leaving = i
        if leaving < 0:
            return None

        left = basis[leaving]
        if left in drop_leaving:
            banned.add(left)
        _pivot(tableau, z, basis, leaving, entering)


def _pivot(
    tableau: list[list[Fraction]],
    z: list[Fraction],
    basis: list[int],
    i: int,
    j: int,
) -> None:
    pivot_row = tableau[i]
    inv = Fraction(1) / pivot_row[j]
    for k in range(len(pivot_row)):
        pivot_row[k] *= inv
    for row in tableau:
        if row is pivot_row or row[j] == 0:
            continue
        factor = row[j]
        for k in range(len(row)):
            row[k] -= factor * pivot_row[k]
    if z[j] != 0:
        factor = z[j]
        for k in range(len(z)):
            z[k] -= factor * pivot_row[k]
    basis[i] = j


def _expel_artificials(
    tableau: list[list[Fraction]], basis: list[int], artificials: set[int]
) -> None:
    """After a feasible phase one, pivot every basic artificial (necessarily
    at value zero) onto a structural column, or drop its row as redundant."""
    for i in range(len(basis) - 1, -1, -1):
        if basis[i] not in artificials:
            continue
        row = tableau[i]
        pivot_j = next(
            (
                j
                for j in range(len(row) - 1)
                if j not in artificials and row[j] != 0
            ),
            None,
        )
        if pivot_j is None:
            del tableau[i]
            del basis[i]
            continue
        dummy_z = [Fraction(0)] * len(row)
        _pivot(tableau, dummy_z, basis, i, pivot_j)
