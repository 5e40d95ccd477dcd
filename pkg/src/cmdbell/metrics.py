"""Correlations, CHSH-family Bell values, the xi-induced shift and Hall's bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .constraints import CMD_CORRELATION_ROWS, residual
from .model import (
    ALL_PAIRS,
    OUTCOMES,
    HVModel,
    Number,
    Setting,
    SettingPair,
    XiVector,
    distribution_for,
    is_exact,
)


def _weighted_sum(signs: Sequence[int], p: Sequence[Number]) -> Number:
    if is_exact(p):
        return sum((s * v for s, v in zip(signs, p)), Fraction(0))
    return math.fsum(s * v for s, v in zip(signs, p))


_CORR_SIGNS = {
    pair: tuple(a * b for a, b in zip(OUTCOMES[pair.alice], OUTCOMES[pair.bob])) for pair in ALL_PAIRS
}


def correlation(model: HVModel, pair: SettingPair) -> Number:
    """``E(X, Y)`` averaged over the pair's own hidden-variable distribution."""
    return _weighted_sum(_CORR_SIGNS[pair], distribution_for(model, pair).p)


def correlations(model: HVModel) -> dict[SettingPair, Number]:
    return {pair: correlation(model, pair) for pair in ALL_PAIRS}


def generalized_correlation(model: HVModel, measured: SettingPair, dist: SettingPair) -> Number:
    """Outcomes of ``measured`` averaged over ``P(lambda | dist)``."""
    return _weighted_sum(_CORR_SIGNS[measured], distribution_for(model, dist).p)


def local_expectation(model: HVModel, setting: Setting, pair: SettingPair) -> Number:
    """``E_XY(Z)``: single-party expectation of ``setting`` under ``P(lambda | pair)``."""
    return _weighted_sum(OUTCOMES[setting], distribution_for(model, pair).p)


def marginal_probability(model: HVModel, setting: Setting, outcome: int, pair: SettingPair) -> Number:
    if outcome not in (1, -1):
        raise ValueError(f"outcome must be +1 or -1, got {outcome!r}")
    e = local_expectation(model, setting, pair)
    if isinstance(e, Fraction):
        return (1 + outcome * e) / 2
    return (1.0 + outcome * e) / 2.0


def joint_probability(model: HVModel, pair: SettingPair, alpha: int, beta: int) -> Number:
    """``P(alpha, beta | X, Y)`` summed directly over strategies."""
    a, b = OUTCOMES[pair.alice], OUTCOMES[pair.bob]
    p = distribution_for(model, pair).p
    picked = [v for k, v in enumerate(p) if a[k] == alpha and b[k] == beta]
    return sum(picked, Fraction(0)) if is_exact(p) else math.fsum(picked)


# -- Bell expressions ------------------------------------------------------


@dataclass(frozen=True)
class WeightVector:
    w11: Number
    w12: Number
    w21: Number
    w22: Number
    bound: Number = 2

    def weight(self, pair: SettingPair) -> Number:
        return (self.w11, self.w12, self.w21, self.w22)[ALL_PAIRS.index(pair)]

    def as_tuple(self) -> tuple:
        return (self.w11, self.w12, self.w21, self.w22)

    @property
    def label(self) -> str:
        return "(" + ",".join(f"{int(w):+d}" if float(w).is_integer() else str(w) for w in self.as_tuple()) + ")"

    def is_chsh(self) -> bool:
        ws = self.as_tuple()
        return all(w in (1, -1) for w in ws) and math.prod(ws) == -1 and self.bound == 2


CHSH_STANDARD = WeightVector(1, 1, 1, -1)


def chsh_family() -> list[WeightVector]:
    """All eight +-1 weight patterns with product -1, each with bound 2."""
    return [
        WeightVector(*ws, bound=2)
        for ws in itertools.product((1, -1), repeat=4)
        if math.prod(ws) == -1
    ]


CHSH_FAMILY: tuple[WeightVector, ...] = tuple(chsh_family())


def bell_value(model: HVModel, w: WeightVector, corr: dict | None = None) -> Number:
    corr = correlations(model) if corr is None else corr
    return sum(w.weight(p) * corr[p] for p in ALL_PAIRS)


def chsh_values(model: HVModel) -> list[Number]:
    """Bell values for every member of :data:`CHSH_FAMILY`, in order."""
    corr = correlations(model)
    return [bell_value(model, w, corr) for w in CHSH_FAMILY]


def max_chsh(model: HVModel) -> Number:
    return max(chsh_values(model))


def cmd_dot_products(xi: XiVector) -> tuple:
    """``M^(eta=1) xi``: one entry per non-reference pair (A1B2, A2B1, A2B2)."""
    return residual(CMD_CORRELATION_ROWS, xi).values


def gamma(xi: XiVector, w: WeightVector) -> Number:
    """Shift of the Bell value caused by ``xi``: ``(w12, w21, w22) . M^(eta=1) xi``."""
    t = cmd_dot_products(xi)
    return w.w12 * t[0] + w.w21 * t[1] + w.w22 * t[2]


def gamma_max(xi: XiVector) -> Number:
    """Largest ``gamma`` over the CHSH family."""
    return max(gamma(xi, w) for w in CHSH_FAMILY)


def hall_measure(xi: XiVector) -> tuple[Number, Number]:
    """Largest L1 distance between any two blocks (the reference block is zero).

    Returns ``(measure, min(2 + 3 * measure, 4))``.
    """
    blocks = [xi.block(p) for p in ALL_PAIRS]
    exact = is_exact(xi.flat())
    best = Fraction(0) if exact else 0.0
    for u, v in itertools.combinations(blocks, 2):
        d = [abs(x - y) for x, y in zip(u, v)]
        dist = sum(d, Fraction(0)) if exact else math.fsum(d)
        best = max(best, dist)
    return best, min(2 + 3 * best, 4)


@dataclass(frozen=True)
class BellReport:
    weights: tuple[WeightVector, ...]
    values: tuple
    reference_values: tuple
    gammas: tuple
    gamma_max: Number
    hall_measure: Number
    hall_bound: Number

    @property
    def max_value(self) -> Number:
        return max(self.values)

    def to_dict(self) -> dict:
        return {
            "members": [w.label for w in self.weights],
            "S": [float(v) for v in self.values],
            "gamma": [float(v) for v in self.gammas],
            "gamma_max": float(self.gamma_max),
            "hall_measure": float(self.hall_measure),
            "hall_bound": float(self.hall_bound),
        }


def bell_report(model: HVModel) -> BellReport:
    ref = model.with_reference_only()
    m, bound = hall_measure(model.xi)
    return BellReport(
        weights=CHSH_FAMILY,
        values=tuple(chsh_values(model)),
        reference_values=tuple(chsh_values(ref)),
        gammas=tuple(gamma(model.xi, w) for w in CHSH_FAMILY),
        gamma_max=gamma_max(model.xi),
        hall_measure=m,
        hall_bound=bound,
    )

