"""Landmark models and seeded random models."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .constraints import CMD_MATRIX, NOSIGNAL_MATRIX, ConstraintMatrix, project_to_kernel
from .model import (
    ALL_PAIRS,
    N_STRATEGIES,
    NON_REFERENCE_PAIRS,
    OUTCOMES,
    STRATEGIES,
    Distribution,
    HVModel,
    Number,
    SettingPair,
    XiVector,
    model_from_distributions,
)

WITNESS_MAX_EPSILON = Fraction(1, 16)
PR_BOX_SIGNS = {SettingPair.A1B1: 1, SettingPair.A1B2: 1, SettingPair.A2B1: 1, SettingPair.A2B2: -1}

# Behavior: pair -> {(alpha, beta): probability}
Behavior = Mapping[SettingPair, Mapping[tuple[int, int], Number]]


class ParameterError(ValueError):
    """Constructor parameters outside their admissible range."""


def uniform_mi_model(exact: bool = True) -> HVModel:
    return HVModel(Distribution.uniform(exact), XiVector.zero(exact))


def signaling_cmd_witness(epsilon: Number = WITNESS_MAX_EPSILON) -> HVModel:
    """Uniform reference with ``epsilon * a1(lambda)`` added on the (A1, B2) block.

    The correlations are untouched but Alice's A1 marginal depends on Bob's
    setting. Positivity requires ``0 <= epsilon <= 1/16``.
    """
    if not 0 <= epsilon <= WITNESS_MAX_EPSILON:
        raise ParameterError(f"epsilon must satisfy 0 <= epsilon <= 1/16 (= 0.0625) for positivity, got {epsilon}")
    exact = isinstance(epsilon, (int, Fraction))
    zero = Fraction(0) if exact else 0.0
    a1 = OUTCOMES[SettingPair.A1B2.alice]
    blocks = {p: (zero,) * N_STRATEGIES for p in NON_REFERENCE_PAIRS}
    blocks[SettingPair.A1B2] = tuple(epsilon * a for a in a1)
    return HVModel(Distribution.uniform(exact), XiVector(blocks))


def behavior_model(behavior: Behavior) -> HVModel:
    """Completion of a behavior ``P(alpha, beta | X, Y)`` into a deterministic model.

    For each pair the measured bits of ``lambda`` follow the behavior and the
    two unmeasured bits are uniform, so ``P(lambda | X, Y) = P(a_X, b_Y | X, Y) / 4``.
    """
    dists = {}
    for pair in ALL_PAIRS:
        table = behavior[pair]
        a, b = OUTCOMES[pair.alice], OUTCOMES[pair.bob]
        exact = all(isinstance(v, (int, Fraction)) for v in table.values())
        quarter = Fraction(1, 4) if exact else 0.25
        dists[pair] = Distribution(tuple(table[(a[k], b[k])] * quarter for k in range(N_STRATEGIES)))
    return model_from_distributions(dists)


def pr_box_model() -> HVModel:
    """Each pair uniform over the 8 strategies with ``a_i b_j`` equal to the PR-box sign."""
    dists = {}
    for pair in ALL_PAIRS:
        a, b = OUTCOMES[pair.alice], OUTCOMES[pair.bob]
        sigma = PR_BOX_SIGNS[pair]
        dists[pair] = Distribution(tuple(Fraction(int(a[k] * b[k] == sigma), 8) for k in range(N_STRATEGIES)))
    return model_from_distributions(dists)


def singlet_angles(alice: Sequence[float] = (0.0, math.pi / 2),
                   bob: Sequence[float] = (math.pi / 4, 3 * math.pi / 4)) -> tuple[float, float, float, float]:
    """Relative angles ``theta_ij = alice_i - bob_j`` in pair order (11, 12, 21, 22)."""
    return tuple(alice[p.i - 1] - bob[p.j - 1] for p in ALL_PAIRS)


STANDARD_ANGLES = singlet_angles()


def singlet_behavior(angles: Sequence[float]) -> dict:
    """Singlet joint probabilities ``(1 - alpha beta cos theta) / 4``."""
    if len(angles) != 4:
        raise ParameterError(f"need four angles (theta11, theta12, theta21, theta22), got {len(angles)}")
    out = {}
    for pair, theta in zip(ALL_PAIRS, angles):
        c = math.cos(theta)
        out[pair] = {(al, be): (1.0 - al * be * c) / 4.0 for al in (1, -1) for be in (1, -1)}
    return out


def brans_model(angles: Sequence[float] = STANDARD_ANGLES) -> HVModel:
    """Deterministic model with fully setting-dependent ``lambda`` giving singlet statistics."""
    return behavior_model(singlet_behavior(angles))


# -- random models ---------------------------------------------------------


def random_reference(rng: np.random.Generator, concentration: float = 1.0) -> Distribution:
    p = rng.dirichlet([concentration] * N_STRATEGIES)
    p = [float(v) for v in p]
    p[-1] = 1.0 - math.fsum(p[:-1])
    if p[-1] < 0:
        p[-1] = 0.0
    return Distribution(p)


def _rescale(reference: Distribution, raw: Sequence[float], magnitude: float) -> XiVector:
    """Largest multiple of ``raw`` with entries at most ``magnitude`` that keeps positivity."""
    biggest = max(abs(v) for v in raw)
    if magnitude == 0 or biggest == 0:
        return XiVector.zero(exact=False)
    scale = magnitude / biggest
    for b in range(3):
        for k in range(N_STRATEGIES):
            v = raw[16 * b + k]
            if v < 0:
                scale = min(scale, reference.p[k] / -v)
    xi = [scale * v for v in raw]
    # a ratio-limited entry can land a rounding error below zero
    for b in range(3):
        for k in range(N_STRATEGIES):
            i = 16 * b + k
            if reference.p[k] + xi[i] < 0:
                xi[i] = -reference.p[k]
    return XiVector.from_flat(xi)


def random_kernel_model(matrix: ConstraintMatrix, seed, magnitude: float,
                        reference: Distribution | None = None) -> HVModel:
    """Random 48-vector projected onto the kernel of ``matrix``, then positivity-rescaled."""
    if magnitude < 0:
        raise ParameterError(f"magnitude must be >= 0, got {magnitude}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(3 * N_STRATEGIES).tolist()
    par, _ = project_to_kernel(matrix, raw)
    if reference is None:
        reference = Distribution.uniform(exact=False)
    return HVModel(reference, _rescale(reference, par.flat(), magnitude))


def random_cmd_model(seed=None, magnitude: float = 1 / 16, reference: Distribution | None = None) -> HVModel:
    """Random model with ``xi`` in the CMD kernel; uniform reference unless given."""
    return random_kernel_model(CMD_MATRIX, seed, magnitude, reference)


def random_nosignaling_model(seed=None, magnitude: float = 1 / 16,
                             reference: Distribution | None = None) -> HVModel:
    """Random model with ``xi`` in the no-signaling kernel."""
    return random_kernel_model(NOSIGNAL_MATRIX, seed, magnitude, reference)


def random_model(seed=None, magnitude: float = 1 / 16, reference: Distribution | None = None) -> HVModel:
    """Random ``xi`` with zero block sums, positivity-rescaled; uniform reference unless given."""
    if magnitude < 0:
        raise ParameterError(f"magnitude must be >= 0, got {magnitude}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((3, N_STRATEGIES))
    raw -= raw.mean(axis=1, keepdims=True)
    if reference is None:
        reference = Distribution.uniform(exact=False)
    return HVModel(reference, _rescale(reference, raw.ravel().tolist(), magnitude))


def random_distributions_model(seed=None, concentration: float = 1.0) -> HVModel:
    """Four independent Dirichlet distributions, one per setting pair."""
    rng = np.random.default_rng(seed)
    return model_from_distributions({p: random_reference(rng, concentration) for p in ALL_PAIRS})


def _deterministic_behavior(strategy_index: int) -> dict:
    lam = STRATEGIES[strategy_index]
    out = {}
    for pair in ALL_PAIRS:
        a, b = OUTCOMES[pair.alice][lam.index], OUTCOMES[pair.bob][lam.index]
        out[pair] = {(al, be): float(al == a and be == b) for al in (1, -1) for be in (1, -1)}
    return out


def _pr_behavior(flips: tuple[int, int, int]) -> dict:
    """PR box whose correlation signs (product -1) are picked by ``flips``."""
    signs = dict(PR_BOX_SIGNS)
    for pair, f in zip(NON_REFERENCE_PAIRS, flips):
        signs[pair] *= f
    if math.prod(signs.values()) == 1:
        signs[SettingPair.A1B1] *= -1
    return {
        pair: {(al, be): 0.5 * (al * be == signs[pair]) for al in (1, -1) for be in (1, -1)}
        for pair in ALL_PAIRS
    }


def random_nosignaling_behavior(rng: np.random.Generator) -> dict:
    """Mixture of a relabeled PR box, deterministic local points, and white noise."""
    flips = tuple(int(v) for v in rng.choice([1, -1], size=3))
    t = rng.uniform(0.0, 1.0)
    k = int(rng.integers(1, 5))
    weights = rng.dirichlet([1.0] * k)
    points = rng.integers(0, N_STRATEGIES, size=k)
    noise = rng.uniform(0.0, 0.3)
    pr = _pr_behavior(flips)
    locals_ = [_deterministic_behavior(int(i)) for i in points]
    out = {}
    for pair in ALL_PAIRS:
        table = {}
        for cell in pr[pair]:
            local = sum(w * d[pair][cell] for w, d in zip(weights, locals_))
            table[cell] = t * pr[pair][cell] + (1 - t) * ((1 - noise) * local + noise * 0.25)
        out[pair] = table
    return out
