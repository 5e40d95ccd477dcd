"""Self-verification suite behind ``cmd-bell verify``.

Each check returns a :class:`CheckResult`; :func:`run_all` runs them in order.
The matrix builders can be swapped out so a harness can confirm that a broken
builder is caught.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import constructors as C
from .classifier import S2, S4, classify, find_mi_representation, signaling_contrasts
from .constraints import (
    ConstraintMatrix,
    build_cmd_matrix,
    build_nosignal_matrix,
    kernel_basis,
    project_to_kernel,
    rank,
    residual,
)
from .metrics import CHSH_FAMILY, bell_report, chsh_values, gamma, gamma_max, hall_measure
from .model import (
    N_STRATEGIES,
    XiVector,
    dumps_model,
    is_valid,
    loads_model,
)
from .sampler import SIGMAS, estimate_chsh, estimate_signaling, sample_run

RESIDUAL_TOL = 1e-9
FINE_TOL = 1e-7


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.2f}s, budget {self.budget:g}s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": self.seconds, "budget": self.budget}


@dataclass
class Config:
    cmd_builder: Callable[[], ConstraintMatrix] = build_cmd_matrix
    nosignal_builder: Callable[[], ConstraintMatrix] = build_nosignal_matrix
    seed: int = 20140101
    n_cmd_models: int = 10_000
    n_converse: int = 10_000
    n_hall: int = 10_000
    n_fine: int = 1_000
    witness_shots: int = 100_000
    brans_shots_total: int = 1_000_000


def check_kernel_dimensions(cfg: Config) -> tuple[bool, str]:
    M, N = cfg.cmd_builder(), cfg.nosignal_builder()
    rm, rn = rank(M), rank(N)
    km, kn = kernel_basis(M).dimension, kernel_basis(N).dimension
    om, on = M.pairwise_orthogonal(), N.pairwise_orthogonal()
    ok = (M.shape, N.shape) == ((6, 48), (7, 48)) and (rm, km, rn, kn) == (6, 42, 7, 41) and om and on
    return ok, f"rank(M)={rm} nullity={km} rank(N)={rn} nullity={kn} orthogonal M={om} N={on}"


def _mixed_reference(rng, k: int):
    return None if k % 2 == 0 else C.random_reference(rng, concentration=0.3)


def check_cmd_implies_bell(cfg: Config) -> tuple[bool, str]:
    M = cfg.cmd_builder()
    rng = np.random.default_rng(cfg.seed)
    worst, bad = -math.inf, 0
    for k in range(cfg.n_cmd_models):
        ref = _mixed_reference(rng, k)
        m = C.random_kernel_model(M, rng.integers(2**63), float(rng.uniform(0, 0.5)), ref)
        if not is_valid(m):
            bad += 1
            continue
        worst = max(worst, max(chsh_values(m)))
    ok = bad == 0 and worst <= 2 + RESIDUAL_TOL
    return ok, f"{cfg.n_cmd_models} models, max CHSH = {worst:.12g}, invalid = {bad}"


def check_bell_implies_cmd(cfg: Config) -> tuple[bool, str]:
    M = cfg.cmd_builder()
    cmd_rows = M.select("cmd")
    rng = np.random.default_rng(cfg.seed + 1)
    zero_gamma = nonzero_gamma = failures = 0
    for _ in range(cfg.n_converse):
        raw = rng.standard_normal((3, N_STRATEGIES))
        raw -= raw.mean(axis=1, keepdims=True)
        par, perp = project_to_kernel(M, raw.ravel().tolist())
        keep = rng.integers(0, 2, size=3)
        # keep a random subset of the CMD directions
        perp_kept = [v if keep[k // 16] else 0.0 for k, v in enumerate(perp.flat())]
        xi = XiVector.from_flat([a + b for a, b in zip(par.flat(), perp_kept)])
        gammas = [abs(gamma(xi, w)) for w in CHSH_FAMILY]
        res = residual(cmd_rows, xi).max_abs
        all_zero = max(gammas) <= RESIDUAL_TOL
        zero_gamma += all_zero
        nonzero_gamma += not all_zero
        if all_zero != (res <= RESIDUAL_TOL):
            failures += 1
    ok = failures == 0 and zero_gamma > 0 and nonzero_gamma > 0
    return ok, f"{cfg.n_converse} xi: {zero_gamma} with all gamma = 0, {nonzero_gamma} not; mismatches = {failures}"


def check_signaling_witness(cfg: Config) -> tuple[bool, str]:
    m = C.signaling_cmd_witness(Fraction(1, 16))
    case = classify(m).case
    contrast = signaling_contrasts(m)["alice[A1]"]
    est = {e.name: e for e in estimate_signaling(m, cfg.witness_shots, seed=cfg.seed)}["alice[A1]"]
    ok = case == S2 and contrast == 1 and est.contains(1.0)
    return ok, (f"case {case}, analytic contrast {contrast}, sampled {est.estimate:.6f} "
                f"+- {est.radius:.6f} ({SIGMAS:g} sigma)")


def check_brans(cfg: Config) -> tuple[bool, str]:
    m = C.brans_model()
    best = max(chsh_values(m))
    case = classify(m).case
    est = estimate_chsh(m, cfg.brans_shots_total // 4, seed=cfg.seed)
    target = 2 * math.sqrt(2)
    sampled_ok = abs(est.best - target) <= SIGMAS * est.stderr
    ok = abs(best - target) <= 1e-12 and case == S4 and sampled_ok
    return ok, (f"analytic {best:.12g}, case {case}, sampled {est.best:.6f} +- "
                f"{SIGMAS * est.stderr:.6f}")


def check_pr_box(cfg: Config) -> tuple[bool, str]:
    r = bell_report(C.pr_box_model())
    ok = (r.max_value == 4 and r.gamma_max == 3 and r.hall_measure == 1 and r.hall_bound == 4
          and r.max_value <= min(2 + 3 * r.hall_measure, 4) and r.max_value == min(2 + 3 * r.hall_measure, 4))
    return ok, f"max CHSH {r.max_value}, gamma_max {r.gamma_max}, M {r.hall_measure}, hall bound {r.hall_bound}"


def check_gamma_vs_hall(cfg: Config) -> tuple[bool, str]:
    xi = C.signaling_cmd_witness(Fraction(1, 16)).xi
    g = gamma_max(xi)
    m, bound = hall_measure(xi)
    ok = g == 0 and bound == 4
    return ok, f"gamma_max {g}, M {m}, min(2+3M,4) = {bound}"


def check_hall_dominance(cfg: Config) -> tuple[bool, str]:
    rng = np.random.default_rng(cfg.seed + 2)
    worst_gap, bad = -math.inf, 0
    for k in range(cfg.n_hall):
        if k % 3 == 2:
            m = C.random_distributions_model(rng.integers(2**63), concentration=float(rng.uniform(0.05, 2)))
        else:
            m = C.random_model(rng.integers(2**63), float(rng.uniform(0, 0.5)), _mixed_reference(rng, k))
        if not is_valid(m):
            bad += 1
            continue
        _, bound = hall_measure(m.xi)
        worst_gap = max(worst_gap, max(chsh_values(m)) - bound)
    ok = bad == 0 and worst_gap <= RESIDUAL_TOL
    return ok, f"{cfg.n_hall} models, max(CHSH - hall bound) = {worst_gap:.6g}, invalid = {bad}"


def check_fine(cfg: Config) -> tuple[bool, str]:
    rng = np.random.default_rng(cfg.seed + 3)
    agree = feasible = 0
    for k in range(cfg.n_fine):
        if k % 4 == 3:
            m = C.random_nosignaling_model(rng.integers(2**63), float(rng.uniform(0, 0.5)),
                                           C.random_reference(rng, 0.3))
        else:
            m = C.behavior_model(C.random_nosignaling_behavior(rng))
        rep = find_mi_representation(m)
        bell_ok = max(chsh_values(m)) <= 2 + FINE_TOL
        agree += rep.feasible == bell_ok
        feasible += rep.feasible
    ok = agree == cfg.n_fine and 0 < feasible < cfg.n_fine
    return ok, f"{agree}/{cfg.n_fine} agree ({feasible} feasible, {cfg.n_fine - feasible} infeasible)"


def check_round_trip(cfg: Config) -> tuple[bool, str]:
    rng = np.random.default_rng(cfg.seed + 4)
    models = [C.random_model(rng.integers(2**63), 0.05, C.random_reference(rng)) for _ in range(50)]
    models += [C.random_distributions_model(rng.integers(2**63)) for _ in range(50)]
    exact = [C.pr_box_model(), C.signaling_cmd_witness(), C.uniform_mi_model()]
    rt_ok = all(loads_model(dumps_model(m)) == m for m in models)
    rt_ok &= all(loads_model(dumps_model(m, exact=True)) == m for m in exact)
    rt_ok &= all(dumps_model(loads_model(dumps_model(m))) == dumps_model(m) for m in models)
    m = C.brans_model()
    shots = 300_000
    runs = [sample_run(m, p, shots, seed=cfg.seed, workers=w) for p in m.xi.as_dict() for w in (1, 4)]
    det_ok = all(runs[k].counts == runs[k + 1].counts for k in range(0, len(runs), 2))
    det_ok &= sample_run(m, runs[0].pair, shots, cfg.seed).counts == runs[0].counts
    return rt_ok and det_ok, f"JSON round trip {'ok' if rt_ok else 'FAILED'}, parallel sampling {'identical' if det_ok else 'DIFFERS'}"


CHECKS = [
    (1, "kernel dimensions", check_kernel_dimensions, 1.0),
    (2, "CMD implies Bell intact", check_cmd_implies_bell, 5.0),
    (3, "Bell implies CMD", check_bell_implies_cmd, 5.0),
    (4, "signaling witness", check_signaling_witness, 5.0),
    (5, "Brans singlet model", check_brans, 10.0),
    (6, "PR box", check_pr_box, 1.0),
    (7, "gamma_max vs Hall bound", check_gamma_vs_hall, 1.0),
    (8, "Hall bound dominance", check_hall_dominance, 5.0),
    (9, "Fine equivalence", check_fine, 20.0),
    (10, "round trip and determinism", check_round_trip, 2.0),
]


def run_check(number: int, cfg: Config | None = None) -> CheckResult:
    cfg = cfg or Config()
    for n, name, fn, budget in CHECKS:
        if n == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn(cfg)
            except Exception as exc:  # a crashing check is a failed check
                ok, detail = False, f"error: {type(exc).__name__}: {exc}"
            return CheckResult(n, name, ok, detail, time.perf_counter() - t0, budget)
    raise KeyError(number)


def run_all(cfg: Config | None = None) -> list[CheckResult]:
    cfg = cfg or Config()
    return [run_check(n, cfg) for n, *_ in CHECKS]
