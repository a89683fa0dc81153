"""
Exact rational simplex with Farkas infeasibility certificates.

Problems have the form

    A x (= or <=) b,  x >= 0,  optionally minimize c.x

and are solved with a dense two-phase tableau over ``fractions.Fraction``
using Bland's smallest-index rule. When Phase I ends with a positive
artificial sum, the Phase I duals give a certificate y with

    y^T A >= 0,   y^T b < 0,   y_i >= 0 on every <= row,

reported in the original row space.

Tableau dump format (written at DEBUG level when ``debug`` is set): a header
line with the column names (x1..xn original columns, s<i> slacks, a<i>
artificials, then ``| rhs``), one line per basic variable holding its name,
the row entries, ``|`` and the right-hand side, and a final line ``d``
holding the reduced costs and the negated objective value.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Union

from .exceptions import (
    CapExceededError,
    DimensionError,
    PivotLimitError,
    SolverContractError,
    UnboundedError,
)

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 4_000_000
DEFAULT_MAX_PIVOTS = 100_000


class RowSense(str, Enum):
    EQ = "=="
    LE = "<="


@dataclass
class LinearProgram:
    """Rows are constraints, columns are nonnegative variables."""

    A: List[List[Fraction]]
    b: List[Fraction]
    senses: Optional[List[RowSense]] = None
    objective: Optional[List[Fraction]] = None
    column_names: Optional[List[str]] = None

    def __post_init__(self):
        if not self.A:
            raise DimensionError("a linear program needs at least one row")
        self.A = [[Fraction(v) for v in row] for row in self.A]
        self.b = [Fraction(v) for v in self.b]
        widths = {len(row) for row in self.A}
        if len(widths) != 1:
            raise DimensionError(f"constraint rows have different lengths {sorted(widths)}")
        if len(self.b) != len(self.A):
            raise DimensionError(f"{len(self.A)} rows but {len(self.b)} right-hand sides")
        if self.senses is None:
            self.senses = [RowSense.EQ] * len(self.A)
        self.senses = [RowSense(s) for s in self.senses]
        if len(self.senses) != len(self.A):
            raise DimensionError("one sense per row is required")
        if self.objective is not None:
            self.objective = [Fraction(v) for v in self.objective]
            if len(self.objective) != self.n_cols:
                raise DimensionError(
                    f"objective has {len(self.objective)} entries for {self.n_cols} columns"
                )

    @property
    def n_rows(self) -> int:
        return len(self.A)

    @property
    def n_cols(self) -> int:
        return len(self.A[0])


@dataclass(frozen=True)
class Feasible:
    """A nonnegative solution; objective_value is set when an objective was given."""

    x: List[Fraction]
    objective_value: Optional[Fraction] = None
    pivots: int = 0

    @property
    def is_feasible(self) -> bool:
        return True


@dataclass(frozen=True)
class Infeasible:
    """A Farkas certificate y for the original rows."""

    y: List[Fraction]
    pivots: int = 0

    @property
    def is_feasible(self) -> bool:
        return False


LPOutcome = Union[Feasible, Infeasible]


def check_solution(lp: LinearProgram, x: Sequence[Fraction]) -> Optional[str]:
    """Return a description of the first violated condition, or None."""
    if len(x) != lp.n_cols:
        return f"solution has {len(x)} entries for {lp.n_cols} columns"
    for j, value in enumerate(x):
        if value < 0:
            return f"x[{j}] = {value} is negative"
    for i, (row, rhs, sense) in enumerate(zip(lp.A, lp.b, lp.senses)):
        lhs = sum((a * v for a, v in zip(row, x)), Fraction(0))
        if sense is RowSense.EQ and lhs != rhs:
            return f"row {i}: {lhs} != {rhs}"
        if sense is RowSense.LE and lhs > rhs:
            return f"row {i}: {lhs} > {rhs}"
    return None


def check_certificate(lp: LinearProgram, y: Sequence[Fraction]) -> Optional[str]:
    """Return a description of the first violated Farkas condition, or None."""
    if len(y) != lp.n_rows:
        return f"certificate has {len(y)} entries for {lp.n_rows} rows"
    for i, sense in enumerate(lp.senses):
        if sense is RowSense.LE and y[i] < 0:
            return f"y[{i}] = {y[i]} is negative on a <= row"
    for j in range(lp.n_cols):
        value = sum((y[i] * lp.A[i][j] for i in range(lp.n_rows)), Fraction(0))
        if value < 0:
            return f"(y^T A)[{j}] = {value} is negative"
    value = sum((yi * bi for yi, bi in zip(y, lp.b)), Fraction(0))
    if value >= 0:
        return f"y^T b = {value} is not negative"
    return None


def format_matrix(rows: List[List[str]]) -> str:
    """Left-aligned columns, negative numbers flush with the sign."""
    rows = [[v if v and v[0] == '-' else ' ' + v for v in r] for r in rows]
    width = max(len(r) for r in rows)
    lens = [0] * width
    for r in rows:
        for j, v in enumerate(r):
            lens[j] = max(lens[j], len(v))
    return "\n".join(" ".join(v.ljust(p) for v, p in zip(r, lens)).rstrip() for r in rows)


class SimplexTableau:
    """Dense tableau over Fractions. Row i is basic in ``basis[i]``."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction],
                 names: List[str], max_pivots: int = DEFAULT_MAX_PIVOTS,
                 debug: bool = False):
        self.T = [list(r) for r in rows]
        self.rhs = list(rhs)
        self.names = names
        self.m = len(rows)
        self.n = len(names)
        self.basis: List[int] = []
        self.d: List[Fraction] = [Fraction(0)] * self.n
        self.value = Fraction(0)
        self.pivots = 0
        self.unbounded_column: Optional[int] = None
        self.max_pivots = max_pivots
        self.debug = debug

    def set_costs(self, costs: List[Fraction]):
        """Reduced costs d_j = c_j - c_B^T T_j and the current objective."""
        self.d = list(costs)
        self.value = Fraction(0)
        for i, bv in enumerate(self.basis):
            cb = costs[bv]
            if cb == 0:
                continue
            row = self.T[i]
            for j in range(self.n):
                if row[j]:
                    self.d[j] -= cb * row[j]
            self.value += cb * self.rhs[i]

    def pivot(self, i: int, j: int):
        if self.pivots >= self.max_pivots:
            raise PivotLimitError(f"pivot ceiling of {self.max_pivots} reached")
        self.pivots += 1
        logger.debug(f"Pivot {self.names[self.basis[i]]} -> {self.names[j]}  ({i},{j})")

        row = self.T[i]
        piv = row[j]
        for l in range(self.n):
            if row[l]:
                row[l] /= piv
        self.rhs[i] /= piv

        for k in range(self.m):
            if k == i:
                continue
            f = self.T[k][j]
            if f:
                other = self.T[k]
                for l in range(self.n):
                    if row[l]:
                        other[l] -= f * row[l]
                self.rhs[k] -= f * self.rhs[i]

        f = self.d[j]
        if f:
            for l in range(self.n):
                if row[l]:
                    self.d[l] -= f * row[l]
            self.value += f * self.rhs[i]

        self.basis[i] = j
        if self.debug:
            logger.debug("\n" + self.dump())

    def bland_step(self, allowed: Sequence[bool]) -> str:
        """One primal step: 'optimal', 'unbounded' or 'go_on'."""
        entering = next((j for j in range(self.n) if allowed[j] and self.d[j] < 0), None)
        if entering is None:
            return 'optimal'
        best = None
        for i in range(self.m):
            a = self.T[i][entering]
            if a > 0:
                key = (self.rhs[i] / a, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            self.unbounded_column = entering
            return 'unbounded'
        self.pivot(best[1], entering)
        return 'go_on'

    def run(self, allowed: Sequence[bool]) -> str:
        while True:
            status = self.bland_step(allowed)
            if status != 'go_on':
                return status

    def dump(self) -> str:
        header = [''] + self.names + ['|', 'rhs']
        body = [[self.names[bv]] + [str(v) for v in r] + ['|', str(rh)]
                for bv, r, rh in zip(self.basis, self.T, self.rhs)]
        costs = [['d'] + [str(v) for v in self.d] + ['|', str(-self.value)]]
        return format_matrix([header] + body + costs)


def solve(lp: LinearProgram, size_cap: int = DEFAULT_SIZE_CAP,
          max_pivots: int = DEFAULT_MAX_PIVOTS, debug: bool = False) -> LPOutcome:
    """
    Decide feasibility (and optimize, when an objective is present).

    Args:
        lp: The linear program
        size_cap: Largest allowed tableau size (rows x columns)
        max_pivots: Pivot ceiling across both phases
        debug: Log every tableau at DEBUG level

    Returns:
        Feasible(x, objective_value) or Infeasible(y), both re-checked exactly

    Raises:
        CapExceededError: tableau larger than ``size_cap``
        UnboundedError: objective unbounded below
        PivotLimitError: pivot ceiling reached
    """
    m, n = lp.n_rows, lp.n_cols
    slack_rows = [i for i, s in enumerate(lp.senses) if s is RowSense.LE]
    n_struct = n + len(slack_rows)
    width = n_struct + m
    if m * width > size_cap:
        raise CapExceededError(f"LP tableau {m}x{width} exceeds the size cap {size_cap}", size_cap)

    names = ([f"x{j + 1}" for j in range(n)]
             + [f"s{i + 1}" for i in slack_rows]
             + [f"a{i + 1}" for i in range(m)])

    # flip rows so that every right-hand side is nonnegative
    signs = [Fraction(-1) if bi < 0 else Fraction(1) for bi in lp.b]
    rows = []
    for i in range(m):
        row = [signs[i] * v for v in lp.A[i]]
        row += [signs[i] if i == r else Fraction(0) for r in slack_rows]
        row += [Fraction(1) if i == k else Fraction(0) for k in range(m)]
        rows.append(row)
    rhs = [signs[i] * lp.b[i] for i in range(m)]

    tableau = SimplexTableau(rows, rhs, names, max_pivots=max_pivots, debug=debug)
    tableau.basis = list(range(n_struct, width))
    phase1_costs = [Fraction(0)] * n_struct + [Fraction(1)] * m
    tableau.set_costs(phase1_costs)
    logger.debug(f"Phase I on {m} rows x {n} columns ({len(slack_rows)} slacks)")
    if debug:
        logger.debug("\n" + tableau.dump())

    tableau.run([True] * width)

    if tableau.value > 0:
        # Phase I duals: u_i = 1 - d(a_i); y' = -u certifies the flipped system
        y = [-signs[i] * (1 - tableau.d[n_struct + i]) for i in range(m)]
        problem = check_certificate(lp, y)
        if problem:
            raise SolverContractError(f"Farkas certificate failed its re-check: {problem}")
        logger.debug(f"Infeasible after {tableau.pivots} pivots")
        return Infeasible(y=y, pivots=tableau.pivots)

    _drive_out_artificials(tableau, n_struct)

    allowed = [j < n_struct for j in range(width)]
    objective_value = None
    if lp.objective is not None:
        costs = list(lp.objective) + [Fraction(0)] * (width - n)
        tableau.set_costs(costs)
        status = tableau.run(allowed)
        if status == 'unbounded':
            raise UnboundedError(
                f"objective unbounded along column {names[tableau.unbounded_column]}"
            )
        objective_value = tableau.value

    x = [Fraction(0)] * n
    for i, bv in enumerate(tableau.basis):
        if bv < n:
            x[bv] = tableau.rhs[i]
    problem = check_solution(lp, x)
    if problem:
        raise SolverContractError(f"solution failed its re-check: {problem}")
    if objective_value is not None:
        objective_value = sum((c * v for c, v in zip(lp.objective, x)), Fraction(0))
    logger.debug(f"Feasible after {tableau.pivots} pivots")
    return Feasible(x=x, objective_value=objective_value, pivots=tableau.pivots)


def _drive_out_artificials(tableau: SimplexTableau, n_struct: int):
    """Pivot zero-level artificials out of the basis where a structural entry allows."""
    for i in range(tableau.m):
        if tableau.basis[i] < n_struct:
            continue
        for j in range(n_struct):
            if tableau.T[i][j] != 0:
                tableau.pivot(i, j)
                break
        else:
            logger.debug(f"Row {i + 1} is redundant")
