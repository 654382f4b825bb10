"""Exact linear programming over the rationals.

A dense two-phase simplex for problems in standard form

    minimize  c·x   subject to   A x = b,  x >= 0,

with ``fractions.Fraction`` arithmetic throughout.  Bland's rule is used
for both entering and leaving variables, so the method terminates on every
input.  When the constraints are infeasible a Farkas certificate y with
Aᵀy <= 0 and b·y > 0 is returned (and re-verified before handing it out).

Problem sizes in this package are small (tens of rows, hundreds of
columns), where exactness matters far more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Row = Sequence[Fraction]


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    certificate: tuple[Fraction, ...] | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(tableau: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = tableau[row][col]
    inv = 1 / piv
    tableau[row] = [v * inv for v in tableau[row]]
    for r, tr in enumerate(tableau):
        if r != row and tr[col] != 0:
            f = tr[col]
            prow = tableau[row]
            tableau[r] = [v - f * p for v, p in zip(tr, prow)]
    basis[row] = col


def _simplex(tableau: list[list[Fraction]], basis: list[int], cost: list[Fraction]) -> str:
    """Run simplex on a feasible tableau; mutates tableau/basis in place.

    ``tableau`` rows are [a_1 .. a_n | b] with b >= 0 and an identity on the
    basis columns.  Returns "optimal" or "unbounded".
    """
    m = len(tableau)
    n = len(tableau[0]) - 1
    while True:
        # reduced costs via the current basis
        y_cost = [cost[basis[r]] for r in range(m)]
        entering = -1
        for j in range(n):
            if j in basis:
                continue
            red = cost[j] - sum(y_cost[r] * tableau[r][j] for r in range(m))
            if red < 0:
                entering = j
                break  # Bland: first improving index
        if entering < 0:
            return "optimal"
        leaving = -1
        best = None
        for r in range(m):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leaving]):
                    best = ratio
                    leaving = r
        if leaving < 0:
            return "unbounded"
        _pivot(tableau, basis, leaving, entering)


def solve_lp(
    a_eq: Sequence[Row],
    b_eq: Row,
    cost: Row | None = None,
) -> LpResult:
    """Minimize cost·x subject to a_eq x = b_eq, x >= 0, exactly.

    With ``cost=None`` only feasibility is decided (phase 1 alone).
    """
    m = len(a_eq)
    if m == 0:
        n = 0 if cost is None else len(cost)
        zeros = tuple(Fraction(0) for _ in range(n))
        return LpResult("optimal", zeros, Fraction(0))
    n = len(a_eq[0])
    a = [[Fraction(v) for v in row] for row in a_eq]
    b = [Fraction(v) for v in b_eq]
    flip = [1] * m
    for r in range(m):
        if b[r] < 0:
            a[r] = [-v for v in a[r]]
            b[r] = -b[r]
            flip[r] = -1

    # phase 1: artificial columns n .. n+m-1
    tableau = [a[r] + [Fraction(1) if k == r else Fraction(0) for k in range(m)] + [b[r]] for r in range(m)]
    basis = [n + r for r in range(m)]
    phase1_cost = [Fraction(0)] * n + [Fraction(1)] * m
    status = _simplex(tableau, basis, phase1_cost)
    assert status == "optimal"  # phase 1 is bounded below by 0
    infeas = sum(tableau[r][-1] for r in range(m) if basis[r] >= n)
    if infeas > 0:
        y = _farkas_certificate(tableau, basis, phase1_cost, a_eq, b_eq, flip, n, m)
        return LpResult("infeasible", certificate=y)

    # drive remaining artificials out of the basis (degenerate rows)
    for r in range(m):
        if basis[r] >= n:
            piv_col = next((j for j in range(n) if tableau[r][j] != 0), None)
            if piv_col is None:
                continue  # redundant row; harmless to keep the zero artificial
            _pivot(tableau, basis, r, piv_col)

    if cost is None:
        x = _extract(tableau, basis, n)
        return LpResult("optimal", x, Fraction(0))

    # phase 2: forbid artificials by pricing them prohibitively is unsound with
    # exact arithmetic; instead they stay basic only on redundant zero rows.
    full_cost = [Fraction(v) for v in cost] + [Fraction(0)] * m
    status = _simplex_restricted(tableau, basis, full_cost, n)
    if status == "unbounded":
        return LpResult("unbounded")
    x = _extract(tableau, basis, n)
    obj = sum(Fraction(cost[j]) * x[j] for j in range(n))
    return LpResult("optimal", x, obj)


def _simplex_restricted(tableau, basis, cost, n_real) -> str:
    """Phase-2 simplex that never lets an artificial column enter."""
    m = len(tableau)
    while True:
        y_cost = [cost[basis[r]] for r in range(m)]
        entering = -1
        for j in range(n_real):
            if j in basis:
                continue
            red = cost[j] - sum(y_cost[r] * tableau[r][j] for r in range(m))
            if red < 0:
                entering = j
                break
        if entering < 0:
            return "optimal"
        leaving = -1
        best = None
        for r in range(m):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leaving]):
                    best = ratio
                    leaving = r
        if leaving < 0:
            return "unbounded"
        _pivot(tableau, basis, leaving, entering)


def _extract(tableau, basis, n) -> tuple[Fraction, ...]:
    x = [Fraction(0)] * n
    for r, j in enumerate(basis):
        if j < n:
            x[j] = tableau[r][-1]
    return tuple(x)


def _farkas_certificate(tableau, basis, phase1_cost, a_eq, b_eq, flip, n, m) -> tuple[Fraction, ...]:
    # Dual vector of the phase-1 optimum: y_i = 1 - (reduced cost of the i-th
    # artificial column), then undo the row sign flips.
    y = []
    for i in range(m):
        col = n + i
        red = phase1_cost[col] - sum(phase1_cost[basis[r]] * tableau[r][col] for r in range(m))
        y.append(Fraction(flip[i]) * (1 - red))
    # verify Farkas: yᵀA <= 0 componentwise and y·b > 0
    for j in range(n):
        s = sum(y[i] * Fraction(a_eq[i][j]) for i in range(m))
        if s > 0:
            raise AssertionError("internal error: invalid infeasibility certificate")
    if sum(y[i] * Fraction(b_eq[i]) for i in range(m)) <= 0:
        raise AssertionError("internal error: invalid infeasibility certificate")
    return tuple(y)


def feasible_point(a_eq: Sequence[Row], b_eq: Row) -> LpResult:
    """Phase-1 feasibility for A x = b, x >= 0."""
    return solve_lp(a_eq, b_eq, cost=None)
