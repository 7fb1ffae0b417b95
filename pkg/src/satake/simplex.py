"""
Exact rational linear programming.

Two-phase tableau simplex over Fractions with Bland's rule, for problems

    maximize c.x  subject to  rows (coeffs, sense, rhs),  x >= 0

where sense is one of "<=", ">=", "==".
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import InternalInconsistency, ValidationError

logger = logging.getLogger(__name__)

Constraint = Tuple[Sequence[Fraction], str, Fraction]

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


@dataclass
class LPResult:
    status: str
    value: Optional[Fraction] = None
    x: List[Fraction] = field(default_factory=list)


class SimplexTableau:
    """Dense tableau in canonical form with respect to the current basis."""

    def __init__(
        self,
        rows: List[List[Fraction]],
        rhs: List[Fraction],
        basis: List[int],
        width: int,
    ):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.n = width
        self.costs: List[Fraction] = [Fraction(0)] * self.n
        self.reduced: List[Fraction] = [Fraction(0)] * self.n
        self.pivots = 0

    def set_objective(self, costs: Sequence[Fraction]) -> None:
        """Install an objective and price out the basic columns."""
        self.costs = list(costs)
        self.reduced = list(costs)
        for i, bvar in enumerate(self.basis):
            cb = self.costs[bvar]
            if cb:
                row = self.rows[i]
                for j in range(self.n):
                    if row[j]:
                        self.reduced[j] -= cb * row[j]

    @property
    def value(self) -> Fraction:
        return sum(
            (self.costs[b] * self.rhs[i] for i, b in enumerate(self.basis)),
            Fraction(0),
        )

    def pivot(self, i: int, j: int) -> None:
        piv = self.rows[i][j]
        row_i = [v / piv for v in self.rows[i]]
        self.rows[i] = row_i
        self.rhs[i] = self.rhs[i] / piv
        for k in range(len(self.rows)):
            if k == i:
                continue
            f = self.rows[k][j]
            if f:
                row_k = self.rows[k]
                for col in range(self.n):
                    if row_i[col]:
                        row_k[col] -= f * row_i[col]
                self.rhs[k] -= f * self.rhs[i]
        f = self.reduced[j]
        if f:
            for col in range(self.n):
                if row_i[col]:
                    self.reduced[col] -= f * row_i[col]
        logger.debug("pivot %d -> %d", self.basis[i], j)
        self.basis[i] = j
        self.pivots += 1

    def bland_step(self, allowed: Optional[Sequence[bool]] = None) -> str:
        entering = None
        for j in range(self.n):
            if self.reduced[j] > 0 and (allowed is None or allowed[j]):
                entering = j
                break
        if entering is None:
            return OPTIMAL
        best = None
        for i, row in enumerate(self.rows):
            if row[entering] > 0:
                key = (self.rhs[i] / row[entering], self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED
        self.pivot(best[1], entering)
        return "go_on"

    def run(self, allowed: Optional[Sequence[bool]] = None) -> str:
        while True:
            status = self.bland_step(allowed)
            if status in (OPTIMAL, UNBOUNDED):
                return status


def solve_lp(
    objective: Sequence[Fraction], constraints: Sequence[Constraint]
) -> LPResult:
    """Maximize objective.x over the constraints with x >= 0.

    Args:
        objective: Cost vector c
        constraints: List of (coefficients, sense, rhs)

    Returns:
        LPResult with status optimal, unbounded or infeasible
    """
    n = len(objective)
    norm_rows = []
    for coeffs, sense, rhs in constraints:
        if len(coeffs) != n:
            raise ValidationError("Constraint width does not match the objective")
        if sense not in ("<=", ">=", "=="):
            raise ValidationError(f"Unknown constraint sense {sense!r}")
        coeffs = [Fraction(c) for c in coeffs]
        rhs = Fraction(rhs)
        if rhs < 0:
            coeffs = [-c for c in coeffs]
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        norm_rows.append((coeffs, sense, rhs))

    n_slack = sum(1 for _, s, _ in norm_rows if s != "==")
    n_art = sum(1 for _, s, _ in norm_rows if s != "<=")
    width = n + n_slack + n_art
    rows: List[List[Fraction]] = []
    rhs_col: List[Fraction] = []
    basis: List[int] = []
    slack_col, art_col = n, n + n_slack
    for coeffs, sense, rhs in norm_rows:
        row = coeffs + [Fraction(0)] * (n_slack + n_art)
        if sense == "<=":
            row[slack_col] = Fraction(1)
            basis.append(slack_col)
            slack_col += 1
        else:
            if sense == ">=":
                row[slack_col] = Fraction(-1)
                slack_col += 1
            row[art_col] = Fraction(1)
            basis.append(art_col)
            art_col += 1
        rows.append(row)
        rhs_col.append(rhs)

    tableau = SimplexTableau(rows, rhs_col, basis, width)
    first_art = n + n_slack
    if n_art:
        tableau.set_objective([Fraction(0)] * first_art + [Fraction(-1)] * n_art)
        tableau.run()
        if tableau.value < 0:
            return LPResult(INFEASIBLE)
        _drive_out_artificials(tableau, first_art)

    allowed = [j < first_art for j in range(width)]
    costs = [Fraction(c) for c in objective] + [Fraction(0)] * (width - n)
    tableau.set_objective(costs)
    status = tableau.run(allowed)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)

    x = [Fraction(0)] * n
    for i, b in enumerate(tableau.basis):
        if b < n:
            x[b] = tableau.rhs[i]
    logger.debug("LP optimal after %d pivots", tableau.pivots)
    return LPResult(OPTIMAL, tableau.value, x)


def _drive_out_artificials(tableau: SimplexTableau, first_art: int) -> None:
    """Pivot zero-level artificials out of the basis, dropping redundant rows."""
    i = 0
    while i < len(tableau.rows):
        if tableau.basis[i] < first_art:
            i += 1
            continue
        if tableau.rhs[i] != 0:
            raise InternalInconsistency("Artificial variable left at nonzero level")
        row = tableau.rows[i]
        for j in range(first_art):
            if row[j] != 0:
                tableau.pivot(i, j)
                i += 1
                break
        else:
            del tableau.rows[i]
            del tableau.rhs[i]
            del tableau.basis[i]

