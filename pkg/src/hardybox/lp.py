"""Exact rational linear programming.

Problems are ``maximize c.x subject to A x = b, x >= 0`` with Fraction
coefficients. The solver is a two-phase tableau simplex that always uses
Bland's rule, so it terminates on the heavily degenerate no-signaling
polytopes. Tableau rows are kept sparse (dict column -> Fraction).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .behavior import Scenario, _as_scenario, context_indices, no_signaling_equations, p_label
from .hardy import HardyPattern

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


class StructuralError(ValueError):
    pass


@dataclass
class LpProblem:
    objective: list
    rows: list  # sparse rows: dict var -> Fraction
    rhs: list
    row_labels: list = field(default_factory=list)
    var_labels: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = [Fraction(c) for c in self.objective]
        self.rows = [{int(j): Fraction(v) for j, v in dict(r).items() if v != 0} for r in self.rows]
        self.rhs = [Fraction(b) for b in self.rhs]
        m = self.n_vars
        if len(self.rhs) != len(self.rows):
            raise StructuralError(f"{len(self.rows)} rows but {len(self.rhs)} right-hand sides")
        for r in self.rows:
            if any(not 0 <= j < m for j in r):
                raise StructuralError(f"row references a variable outside 0..{m - 1}")
        if not self.row_labels:
            self.row_labels = [f"r{i}" for i in range(len(self.rows))]
        if not self.var_labels:
            self.var_labels = [f"x{j}" for j in range(m)]
        if len(self.row_labels) != len(self.rows) or len(self.var_labels) != m:
            raise StructuralError("label counts do not match the problem shape")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @classmethod
    def dense(cls, objective, A_eq, b_eq, **kw):
        if any(len(row) != len(objective) for row in A_eq):
            raise StructuralError("constraint rows must have one coefficient per variable")
        return cls(objective, [dict(enumerate(row)) for row in A_eq], b_eq, **kw)

    def with_equality(self, coefficients: dict, value, label="extra") -> "LpProblem":
        return LpProblem(
            list(self.objective),
            [dict(r) for r in self.rows] + [dict(coefficients)],
            list(self.rhs) + [value],
            list(self.row_labels) + [label],
            list(self.var_labels),
        )

    def with_zero(self, var: int) -> "LpProblem":
        return self.with_equality({var: 1}, 0, f"zero:{var}")

    def with_objective(self, objective) -> "LpProblem":
        return LpProblem(list(objective), self.rows, self.rhs, self.row_labels, self.var_labels)

    def count(self, kind: str) -> int:
        return sum(1 for label in self.row_labels if label.split(":")[0] == kind)

    def is_feasible_point(self, x) -> bool:
        x = [Fraction(v) for v in x]
        return len(x) == self.n_vars and all(v >= 0 for v in x) and all(
            sum(c * x[j] for j, c in r.items()) == b for r, b in zip(self.rows, self.rhs)
        )

    def value(self, x):
        return sum(c * Fraction(v) for c, v in zip(self.objective, x))


@dataclass
class LpSolution:
    status: str
    value: Fraction | None = None
    x: list | None = None
    basis: tuple = ()
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Feasible-basis simplex tableau. Artificial columns are never stored:
    an artificial that leaves the basis can never return, and the basis list
    marks rows still held by an artificial with ``None``."""

    def __init__(self, rows, rhs, n):
        self.n = n
        self.rows = rows
        self.rhs = rhs
        self.basis = [None] * len(rows)
        self.pivots = 0

    def copy(self):
        t = _Tableau([dict(r) for r in self.rows], list(self.rhs), self.n)
        t.basis = list(self.basis)
        return t

    def pivot(self, r, c, obj=None):
        row = self.rows[r]
        p = row[c]
        if p != 1:
            for j in row:
                row[j] /= p
            self.rhs[r] /= p
        targets = [(i, other) for i, other in enumerate(self.rows) if i != r and c in other]
        for i, other in targets:
            f = other[c]
            for j, v in row.items():
                nv = other.get(j, 0) - f * v
                if nv:
                    other[j] = nv
                else:
                    other.pop(j, None)
            self.rhs[i] -= f * self.rhs[r]
        if obj is not None and c in obj[0]:
            d, f = obj[0], obj[0][c]
            for j, v in row.items():
                nv = d.get(j, 0) - f * v
                if nv:
                    d[j] = nv
                else:
                    d.pop(j, None)
            obj[1] += f * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    def run(self, obj):
        """Maximize from the current feasible basis. ``obj`` is
        [reduced costs dict, current value]; returns OPTIMAL or UNBOUNDED."""
        while True:
            entering = min((j for j, d in obj[0].items() if d > 0), default=None)
            if entering is None:
                return OPTIMAL
            best, leave = None, None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    # artificials rank below every real variable, by row
                    b = self.basis[i] if self.basis[i] is not None else i - len(self.rows)
                    key = (ratio, b)
                    if best is None or key < best:
                        best, leave = key, i
            if leave is None:
                return UNBOUNDED
            self.pivot(leave, entering, obj)

    def objective_row(self, c):
        d = {j: v for j, v in enumerate(c) if v}
        value = Fraction(0)
        for i, b in enumerate(self.basis):
            cb = c[b] if b is not None else 0
            if cb:
                for j, v in self.rows[i].items():
                    nv = d.get(j, 0) - cb * v
                    if nv:
                        d[j] = nv
                    else:
                        d.pop(j, None)
                value += cb * self.rhs[i]
        for b in self.basis:
            d.pop(b, None)
        return [d, value]

    def point(self):
        x = [Fraction(0)] * self.n
        for i, b in enumerate(self.basis):
            x[b] = self.rhs[i]
        return x


def _phase_one(problem: LpProblem, order=None, row_order=None):
    """Returns a tableau holding a feasible basis, or None if infeasible."""
    n = problem.n_vars
    order = list(range(n)) if order is None else order
    pos = {v: k for k, v in enumerate(order)}
    row_ids = range(len(problem.rows)) if row_order is None else row_order
    rows, rhs = [], []
    for i in row_ids:
        r = {pos[j]: v for j, v in problem.rows[i].items()}
        b = problem.rhs[i]
        if b < 0:
            r = {j: -v for j, v in r.items()}
            b = -b
        rows.append(r)
        rhs.append(b)
    t = _Tableau(rows, rhs, n)

    # maximize -(sum of artificials)
    d = {}
    for r in rows:
        for j, v in r.items():
            d[j] = d.get(j, 0) + v
    obj = [{j: v for j, v in d.items() if v}, -sum(rhs, Fraction(0))]
    t.run(obj)
    if obj[1] != 0:
        return None

    # drive remaining (zero-level) artificials out, dropping redundant rows
    keep = []
    for i in range(len(t.rows)):
        if t.basis[i] is None:
            col = min(t.rows[i], default=None)
            if col is None:
                continue
            t.pivot(i, col)
        keep.append(i)
    t.rows = [t.rows[i] for i in keep]
    t.rhs = [t.rhs[i] for i in keep]
    t.basis = [t.basis[i] for i in keep]
    return t


def _check(problem, x, value):
    if not problem.is_feasible_point(x) or problem.value(x) != value:
        raise ArithmeticError("simplex returned a point that fails exact verification")


def lp_solve(problem: LpProblem, seed: int | None = None) -> LpSolution:
    """Solve exactly. With a seed the variable and row order are shuffled
    first, which sends Bland's rule down a different pivot path."""
    n = problem.n_vars
    order, row_order = list(range(n)), list(range(len(problem.rows)))
    if seed is not None:
        rng = random.Random(seed)
        rng.shuffle(order)
        rng.shuffle(row_order)
    t = _phase_one(problem, order, row_order)
    if t is None:
        return LpSolution(INFEASIBLE)
    c = [problem.objective[v] for v in order]
    obj = t.objective_row(c)
    status = t.run(obj)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=t.pivots)
    xp = t.point()
    x = [Fraction(0)] * n
    for k, v in enumerate(order):
        x[v] = xp[k]
    _check(problem, x, obj[1])
    basis = tuple(sorted(order[b] for b in t.basis))
    return LpSolution(OPTIMAL, obj[1], x, basis, t.pivots)


@dataclass
class RangeResult:
    status: str
    ranges: list | None = None  # per-variable (min, max)

    @property
    def unique(self) -> bool:
        return self.ranges is not None and all(lo == hi for lo, hi in self.ranges)

    def point(self):
        if not self.unique:
            raise ValueError("ranges are not all degenerate")
        return [lo for lo, _ in self.ranges]


def coordinate_ranges(problem: LpProblem, fixed_objective_value) -> RangeResult:
    """Range of every variable over the face where the objective equals
    ``fixed_objective_value``. All-degenerate ranges mean the face is a point.

    Phase one runs once; each of the 2*n coordinate LPs then starts from a
    copy of that feasible basis.
    """
    pinned = problem.with_equality(dict(enumerate(problem.objective)), fixed_objective_value, "pin")
    base = _phase_one(pinned)
    if base is None:
        return RangeResult(INFEASIBLE)
    n = problem.n_vars
    ranges = []
    for j in range(n):
        bounds = []
        for sign in (-1, 1):
            t = base.copy()
            c = [0] * n
            c[j] = sign
            obj = t.objective_row(c)
            status = t.run(obj)
            if status != OPTIMAL:
                raise ArithmeticError("coordinate LP unbounded on a bounded polytope")
            x = t.point()
            _check(pinned.with_objective(c), x, obj[1])
            bounds.append(sign * obj[1])
        ranges.append(tuple(bounds))
    return RangeResult(OPTIMAL, ranges)


# -- the Hardy LP -----------------------------------------------------------


def build_hardy_lp(scenario, pattern: HardyPattern) -> LpProblem:
    """Variables are all 4**n joint probabilities. Rows: one normalization
    per context, every no-signaling equality, one row per pattern zero.
    The objective is the target entry."""
    scenario = _as_scenario(scenario)
    if pattern.scenario != scenario:
        raise StructuralError("pattern and scenario disagree on the number of parties")
    rows, rhs, labels = [], [], []
    for settings in scenario.contexts():
        rows.append({i: 1 for i in context_indices(scenario, settings)})
        rhs.append(1)
        labels.append("norm:" + "".join(map(str, settings)))
    for eq in no_signaling_equations(scenario):
        r = {i: 1 for i in eq.lhs}
        r.update({i: -1 for i in eq.rhs})
        rows.append(r)
        rhs.append(0)
        labels.append(f"ns:party{eq.party + 1}")
    for i in pattern.zero_indices:
        rows.append({i: 1})
        rhs.append(0)
        labels.append(f"zero:{i}")
    objective = [0] * scenario.size
    objective[pattern.target_index] = 1
    var_labels = [f"x{i}" for i in range(scenario.size)]
    return LpProblem(objective, rows, rhs, labels, var_labels)


def _term(c, name):
    if c == 1:
        return name
    return f"{c}*{name}"


def dump_lp(problem: LpProblem) -> str:
    """One ``sum c_i*x_i = b`` line per constraint plus the objective,
    variables in index order."""

    def expr(coeffs):
        parts = []
        for j in sorted(coeffs):
            c = coeffs[j]
            if not c:
                continue
            t = _term(abs(c), problem.var_labels[j])
            parts.append(("- " if c < 0 else "+ ") + t)
        if not parts:
            return "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    lines = ["maximize " + expr(dict(enumerate(problem.objective)))]
    for label, r, b in zip(problem.row_labels, problem.rows, problem.rhs):
        lines.append(f"{label}: {expr(r)} = {b}")
    return "\n".join(lines) + "\n"


def solution_box_labels(scenario: Scenario, x: Sequence) -> list[tuple[int, str, Fraction]]:
    return [(i, p_label(scenario, i), v) for i, v in enumerate(x) if v != 0]
