"""CMD and no-signaling constraint matrices over the 48-dimensional xi space.

Columns are ordered block-major: column ``16 * b + lambda`` belongs to block
``NON_REFERENCE_PAIRS[b]`` and strategy index ``lambda``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Callable, Sequence

from .model import (
    N_STRATEGIES,
    NON_REFERENCE_PAIRS,
    OUTCOMES,
    Number,
    SettingPair,
    XiVector,
    is_exact,
)

DIM = 3 * N_STRATEGIES


@dataclass(frozen=True)
class RowLabel:
    kind: str  # "cmd", "norm", "signal-alice", "signal-bob"
    eta: int
    name: str


@dataclass(frozen=True)
class ConstraintMatrix:
    rows: tuple[tuple[int, ...], ...]
    labels: tuple[RowLabel, ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != len(self.labels):
            raise ValueError("one label per row required")
        for r in rows:
            if len(r) != DIM:
                raise ValueError(f"constraint rows need {DIM} entries, got {len(r)}")

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), DIM)

    def select(self, kind: str) -> "ConstraintMatrix":
        keep = [k for k, lab in enumerate(self.labels) if lab.kind == kind]
        return ConstraintMatrix(tuple(self.rows[k] for k in keep), tuple(self.labels[k] for k in keep))

    def gram(self) -> list[list[int]]:
        return [[_dot(r, s) for s in self.rows] for r in self.rows]

    def pairwise_orthogonal(self) -> bool:
        return self._orthogonal

    @cached_property
    def _orthogonal(self) -> bool:
        g = self.gram()
        n = len(g)
        return all(g[a][b] == 0 for a in range(n) for b in range(n) if a != b)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        if header:
            cols = [f"{p.name}:{lam}" for p in NON_REFERENCE_PAIRS for lam in range(N_STRATEGIES)]
            buf.write("label," + ",".join(cols) + "\n")
        for lab, r in zip(self.labels, self.rows):
            buf.write(lab.name + "," + ",".join(str(v) for v in r) + "\n")
        return buf.getvalue()


def _dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v) if a and b)


def _block_row(pair: SettingPair, values: Sequence[int]) -> tuple[int, ...]:
    row = [0] * DIM
    b = NON_REFERENCE_PAIRS.index(pair)
    row[16 * b:16 * (b + 1)] = values
    return tuple(row)


def _add(*rows: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sum(col) for col in zip(*rows))


def _neg(values: Sequence[int]) -> list[int]:
    return [-v for v in values]


def build_cmd_matrix() -> ConstraintMatrix:
    """The 6x48 CMD matrix.

    Rows 0-2 (eta=1) hold ``alpha(lambda, X) * beta(lambda, Y)`` on block (X, Y);
    rows 3-5 (eta=2) are all-ones on each block (normalization).
    """
    rows, labels = [], []
    for pair in NON_REFERENCE_PAIRS:
        a, b = OUTCOMES[pair.alice], OUTCOMES[pair.bob]
        rows.append(_block_row(pair, [x * y for x, y in zip(a, b)]))
        labels.append(RowLabel("cmd", 1, f"cmd[{pair.name}]"))
    for pair in NON_REFERENCE_PAIRS:
        rows.append(_block_row(pair, [1] * N_STRATEGIES))
        labels.append(RowLabel("norm", 2, f"norm[{pair.name}]"))
    return ConstraintMatrix(tuple(rows), tuple(labels))


def build_nosignal_matrix() -> ConstraintMatrix:
    """The 7x48 no-signaling matrix.

    Alice row j is ``alpha(lambda, A_j)`` on (A_j, B1) minus the same on
    (A_j, B2); Bob row j is ``beta(lambda, B_j)`` on (A1, B_j) minus (A2, B_j).
    Reference-pair (A1, B1) contributions are omitted because that block of xi
    is identically zero, and the normalization row for (A1, B1) vanishes
    entirely and is dropped.
    """
    P = SettingPair
    one = [1] * N_STRATEGIES
    a1, a2 = OUTCOMES[P.A1B1.alice], OUTCOMES[P.A2B1.alice]
    b1, b2 = OUTCOMES[P.A1B1.bob], OUTCOMES[P.A1B2.bob]
    rows = [
        _block_row(P.A1B2, _neg(a1)),
        _add(_block_row(P.A2B1, a2), _block_row(P.A2B2, _neg(a2))),
        _block_row(P.A2B1, _neg(b1)),
        _add(_block_row(P.A1B2, b2), _block_row(P.A2B2, _neg(b2))),
        _block_row(P.A2B1, one),
        _block_row(P.A1B2, one),
        _block_row(P.A2B2, one),
    ]
    labels = [
        RowLabel("signal-alice", 1, "alice[A1]"),
        RowLabel("signal-alice", 1, "alice[A2]"),
        RowLabel("signal-bob", 2, "bob[B1]"),
        RowLabel("signal-bob", 2, "bob[B2]"),
        RowLabel("norm", 3, "norm[A2B1]"),
        RowLabel("norm", 4, "norm[A1B2]"),
        RowLabel("norm", 4, "norm[A2B2]"),
    ]
    return ConstraintMatrix(tuple(rows), tuple(labels))


# -- exact elimination -----------------------------------------------------


def _integer_rref(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free reduced echelon form over the integers.

    Each pivot row keeps an integer pivot; entries above and below pivots are
    eliminated by integer row combinations and rows are divided by their gcd.
    Returns the nonzero rows and their pivot columns.
    """
    m = [list(r) for r in rows]
    ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((k for k in range(r, len(m)) if m[k][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        p = m[r][c]
        for k in range(len(m)):
            if k != r and m[k][c] != 0:
                f = m[k][c]
                m[k] = [p * x - f * y for x, y in zip(m[k], m[r])]
                g = math.gcd(*m[k])
                if g > 1:
                    m[k] = [x // g for x in m[k]]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _as_integer_rows(rows: Sequence[Sequence[Number]]) -> list[list[int]]:
    out = []
    for r in rows:
        fr = [Fraction(v) for v in r]
        den = math.lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * den) for f in fr])
    return out


def rank(matrix: ConstraintMatrix) -> int:
    if not matrix.rows:
        return 0
    _, pivots = _integer_rref(_as_integer_rows(matrix.rows))
    return len(pivots)


@dataclass(frozen=True)
class KernelBasis:
    vectors: tuple[tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.vectors)


def _gram_schmidt_integer(vectors: list[list[int]]) -> list[list[int]]:
    out: list[list[Fraction]] = []
    norms: list[Fraction] = []
    for v in vectors:
        w = [Fraction(x) for x in v]
        for u, nu in zip(out, norms):
            c = _dot(w, u) / nu
            if c:
                w = [x - c * y for x, y in zip(w, u)]
        den = math.lcm(*(x.denominator for x in w))
        ints = [int(x * den) for x in w]
        g = math.gcd(*ints)
        ints = [x // g for x in ints]
        out.append([Fraction(x) for x in ints])
        norms.append(Fraction(_dot(ints, ints)))
    return [[int(x) for x in u] for u in out]


def kernel_basis(matrix: ConstraintMatrix, orthogonal: bool = True) -> KernelBasis:
    """Exact integer basis of the null space.

    The elimination basis is made pairwise orthogonal by exact Gram-Schmidt
    unless ``orthogonal=False``.
    """
    ncols = DIM
    if not matrix.rows:
        red, pivots = [], []
    else:
        red, pivots = _integer_rref(_as_integer_rows(matrix.rows))
    free = [c for c in range(ncols) if c not in set(pivots)]
    lcm_p = math.lcm(*(red[k][c] for k, c in enumerate(pivots))) if pivots else 1
    vectors = []
    for f in free:
        v = [0] * ncols
        v[f] = lcm_p
        for k, c in enumerate(pivots):
            if red[k][f]:
                v[c] = -lcm_p * red[k][f] // red[k][c]
        g = math.gcd(*v)
        vectors.append([x // g for x in v])
    if orthogonal:
        vectors = _gram_schmidt_integer(vectors)
    return KernelBasis(tuple(tuple(v) for v in vectors))


# -- residuals and projection ----------------------------------------------


@dataclass(frozen=True)
class Residual:
    values: tuple
    max_abs: Number

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs <= tol


def _flat(xi) -> tuple:
    return xi.flat() if isinstance(xi, XiVector) else tuple(xi)


def residual(matrix: ConstraintMatrix, xi) -> Residual:
    """Per-row dot products with ``xi`` (an :class:`XiVector` or flat 48-sequence)."""
    v = _flat(xi)
    if is_exact(v):
        vals = tuple(sum((a * x for a, x in zip(r, v) if a), Fraction(0)) for r in matrix.rows)
    else:
        vals = tuple(math.fsum(a * x for a, x in zip(r, v) if a) for r in matrix.rows)
    return Residual(vals, max((abs(x) for x in vals), default=0))


def project_to_kernel(matrix: ConstraintMatrix, xi) -> tuple[XiVector, XiVector]:
    """Split ``xi`` into ``(xi_parallel, xi_perp)`` with ``xi_parallel`` in the kernel.

    Requires pairwise orthogonal rows, so the row-space component is
    ``sum(row . xi / row . row * row)``.
    """
    if not matrix.pairwise_orthogonal():
        raise ValueError("project_to_kernel requires pairwise orthogonal rows")
    v = _flat(xi)
    exact = is_exact(v)
    perp = [Fraction(0) if exact else 0.0] * DIM
    for r, d in zip(matrix.rows, residual(matrix, v).values):
        rr = _dot(r, r)
        if rr == 0 or d == 0:
            continue
        c = Fraction(d) / rr if exact else d / rr
        for k, a in enumerate(r):
            if a:
                perp[k] += c * a
    par = [x - p for x, p in zip(v, perp)]
    return XiVector.from_flat(par), XiVector.from_flat(perp)


CMD_MATRIX = build_cmd_matrix()
NOSIGNAL_MATRIX = build_nosignal_matrix()
CMD_CORRELATION_ROWS = CMD_MATRIX.select("cmd")

MatrixBuilder = Callable[[], ConstraintMatrix]
