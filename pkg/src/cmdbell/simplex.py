"""Phase-1 simplex for ``A x = b, x >= 0`` feasibility.

Works on plain Python numbers: with Fraction inputs every pivot is exact and
the tolerance is zero; with floats a small absolute tolerance is used.
Bland's rule prevents cycling. Infeasible problems come back with a Farkas
certificate ``z`` satisfying ``z . A >= 0`` columnwise and ``z . b < 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import Number, is_exact

FLOAT_TOL = 1e-10


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    x: tuple | None
    certificate: tuple | None
    pivots: int


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def solve_feasibility(A: Sequence[Sequence[Number]], b: Sequence[Number], tol: float | None = None,
                      max_pivots: int = 10_000) -> FeasibilityResult:
    m = len(A)
    n = len(A[0]) if m else 0
    exact = is_exact(b) and all(is_exact(row) for row in A)
    if tol is None:
        tol = 0 if exact else FLOAT_TOL
    conv = Fraction if exact else float
    zero, one = conv(0), conv(1)

    signs = [-1 if v < 0 else 1 for v in b]
    # tableau columns: n structural, m artificial, rhs
    T = []
    for i in range(m):
        s = signs[i]
        row = [conv(s * a) for a in A[i]] + [one if k == i else zero for k in range(m)] + [conv(s * b[i])]
        T.append(row)
    basis = [n + i for i in range(m)]
    width = n + m + 1
    # reduced costs of the phase-1 objective (sum of artificials); last entry is -objective
    cost = [zero] * width
    for j in range(n):
        cost[j] = -sum((T[i][j] for i in range(m)), zero)
    cost[-1] = -sum((T[i][-1] for i in range(m)), zero)

    pivots = 0
    while True:
        enter = next((j for j in range(n + m) if cost[j] < -tol), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = T[i][enter]
            if a > tol:
                ratio = T[i][-1] / a
                if best is None or ratio < best - tol or (abs(ratio - best) <= tol and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:  # phase-1 objective is bounded below, so this cannot happen
            raise RuntimeError("unbounded phase-1 direction")
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        prow = T[leave]
        for i in range(m):
            if i != leave:
                f = T[i][enter]
                if f:
                    T[i] = [v - f * p for v, p in zip(T[i], prow)]
        f = cost[enter]
        cost = [c - f * p for c, p in zip(cost, prow)]
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit exceeded")

    objective = -cost[-1]
    if objective > tol * max(1, m):
        y = [signs[k] * (one - cost[n + k]) for k in range(m)]
        certificate = tuple(-v for v in y)
        return FeasibilityResult(False, None, certificate, pivots)
    x = [zero] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i][-1]
    return FeasibilityResult(True, tuple(x), None, pivots)


def check_certificate(A, b, z, tol: float = 0.0) -> bool:
    """True if ``z`` proves ``A x = b, x >= 0`` infeasible."""
    cols = list(zip(*A))
    return all(_dot(z, c) >= -tol for c in cols) and _dot(z, b) < -tol
