"""Acceptance criteria 1-10, each at its stated tolerance and runtime budget.

Every test prints one ``[PASS]``/``[FAIL]`` line (visible even under capture).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cmdbell import constructors as C
from cmdbell.classifier import classify, find_mi_representation, signaling_contrasts
from cmdbell.constraints import (
    CMD_MATRIX,
    build_cmd_matrix,
    build_nosignal_matrix,
    kernel_basis,
    project_to_kernel,
    rank,
    residual,
)
from cmdbell.metrics import CHSH_FAMILY, bell_report, chsh_values, gamma, gamma_max, hall_measure
from cmdbell.model import ALL_PAIRS, XiVector, dumps_model, loads_model, validate
from cmdbell.sampler import estimate_chsh, estimate_signaling, sample_run

F = Fraction
SEED = 8675309


@pytest.fixture
def report(capsys):
    t0 = time.perf_counter()

    def emit(number, name, ok, detail, budget):
        secs = time.perf_counter() - t0
        ok = ok and secs < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}: {detail} "
                  f"({secs:.2f}s < {budget}s)")
        assert ok, detail

    return emit


def test_criterion_01_kernel_dimensions(report):
    M, N = build_cmd_matrix(), build_nosignal_matrix()
    dims = (rank(M), kernel_basis(M).dimension, rank(N), kernel_basis(N).dimension)
    gm, gn = M.gram(), N.gram()
    orth = all(g[a][b] == 0 for g in (gm, gn) for a in range(len(g)) for b in range(len(g)) if a != b)
    ok = M.shape == (6, 48) and N.shape == (7, 48) and dims == (6, 42, 7, 41) and orth
    report(1, "rank/nullity of M and N, row orthogonality", ok,
           f"rank(M), nullity(M), rank(N), nullity(N) = {dims}, orthogonal = {orth}", 1)


def test_criterion_02_cmd_keeps_bell_intact(report):
    rng = np.random.default_rng(SEED)
    worst = -math.inf
    invalid = 0
    for k in range(10_000):
        ref = C.random_reference(rng, float(rng.choice([0.2, 1.0]))) if k % 2 else None
        m = C.random_cmd_model(int(rng.integers(2**62)), float(rng.uniform(0, 0.5)), ref)
        invalid += bool(validate(m))
        worst = max(worst, max(chsh_values(m)))
    report(2, "CMD => all 8 CHSH <= 2 + 1e-9", invalid == 0 and worst <= 2 + 1e-9,
           f"10^4 models, max CHSH {worst:.12f}, invalid {invalid}", 5)


def test_criterion_03_bell_implies_cmd(report):
    rng = np.random.default_rng(SEED + 1)
    cmd_rows = CMD_MATRIX.select("cmd")
    implication_failures = witnesses_missed = n_zero = n_nonzero = 0
    for _ in range(10_000):
        raw = rng.standard_normal((3, 16))
        raw -= raw.mean(axis=1, keepdims=True)
        par, perp = project_to_kernel(CMD_MATRIX, raw.ravel().tolist())
        mask = rng.integers(0, 2, size=3)
        xi = XiVector.from_flat([a + (b if mask[k // 16] else 0.0)
                                 for k, (a, b) in enumerate(zip(par.flat(), perp.flat()))])
        gammas = [gamma(xi, w) for w in CHSH_FAMILY]
        res = residual(cmd_rows, xi).max_abs
        if all(abs(g) <= 1e-9 for g in gammas):
            n_zero += 1
            implication_failures += res > 1e-9
        else:
            n_nonzero += 1
        if res > 1e-9 and not any(abs(g) > 1e-9 for g in gammas):
            witnesses_missed += 1
    ok = implication_failures == 0 and witnesses_missed == 0 and n_zero > 0 and n_nonzero > 0
    report(3, "all gamma = 0 => M(eta=1) residual <= 1e-9", ok,
           f"{n_zero} all-zero-gamma xi, {n_nonzero} others, failures {implication_failures + witnesses_missed}", 5)


def test_criterion_04_signaling_witness(report):
    m = C.signaling_cmd_witness(F(1, 16))
    case = classify(m).case
    analytic = signaling_contrasts(m)["alice[A1]"]
    sampled = {c.name: c for c in estimate_signaling(m, 100_000, seed=SEED)}["alice[A1]"]
    ok = case == "S2-without-MI" and analytic == 1 and abs(sampled.estimate - 1.0) <= sampled.radius
    report(4, "witness is S2, Alice-A1 contrast 1.0", ok,
           f"case {case}, analytic {analytic}, sampled {sampled.estimate:.5f} +- {sampled.radius:.5f}", 5)


def test_criterion_05_brans(report):
    m = C.brans_model(C.singlet_angles())
    best = max(chsh_values(m))
    case = classify(m).case
    est = estimate_chsh(m, 250_000, seed=SEED)
    target = 2 * math.sqrt(2)
    ok = abs(best - target) <= 1e-12 and case == "S4" and abs(est.best - target) <= 4 * est.stderr
    report(5, "Brans: CHSH 2*sqrt(2), S4, sampled within 4 sigma", ok,
           f"analytic {best:.15f}, case {case}, sampled {est.best:.5f} +- {4 * est.stderr:.5f}", 10)


def test_criterion_06_pr_box(report):
    r = bell_report(C.pr_box_model())
    cap = min(2 + 3 * r.hall_measure, 4)
    ok = (r.max_value, r.gamma_max, r.hall_measure, r.hall_bound) == (4, 3, 1, 4) and r.max_value == cap
    report(6, "PR box: CHSH 4, gamma_max 3, M 1, bound 4 (equality)", ok,
           f"{r.max_value}, {r.gamma_max}, {r.hall_measure}, {r.hall_bound}", 1)


def test_criterion_07_gamma_max_vs_hall(report):
    xi = C.signaling_cmd_witness(F(1, 16)).xi
    g = gamma_max(xi)
    _, bound = hall_measure(xi)
    report(7, "witness gamma_max 0 vs Hall bound 4", g == 0 and bound == 4,
           f"gamma_max {g}, min(2+3M,4) {bound}", 1)


def test_criterion_08_hall_dominance(report):
    rng = np.random.default_rng(SEED + 2)
    gap = -math.inf
    for k in range(10_000):
        s = int(rng.integers(2**62))
        if k % 2:
            m = C.random_distributions_model(s, float(rng.uniform(0.05, 2.0)))
        else:
            m = C.random_model(s, float(rng.uniform(0, 1)), C.random_reference(rng, 0.5))
        assert not validate(m)
        gap = max(gap, max(chsh_values(m)) - hall_measure(m.xi)[1])
    report(8, "CHSH <= min(2+3M, 4) + 1e-9", gap <= 1e-9, f"10^4 models, max(CHSH - bound) {gap:.6f}", 5)


def test_criterion_09_fine_equivalence(report):
    rng = np.random.default_rng(SEED + 3)
    mismatches = feasible = 0
    for k in range(1_000):
        if k % 5 == 4:
            m = C.random_nosignaling_model(int(rng.integers(2**62)), float(rng.uniform(0, 0.5)),
                                           C.random_reference(rng, 0.3))
        else:
            m = C.behavior_model(C.random_nosignaling_behavior(rng))
        assert all(abs(c) <= 1e-9 for c in signaling_contrasts(m).values())
        rep = find_mi_representation(m)
        feasible += rep.feasible
        mismatches += rep.feasible != (max(chsh_values(m)) <= 2 + 1e-7)
    ok = mismatches == 0 and 0 < feasible < 1000
    report(9, "no-signaling: MI-representable <=> CHSH <= 2", ok,
           f"10^3 models, {feasible} feasible, mismatches {mismatches}", 20)


def test_criterion_10_round_trip_and_determinism(report):
    rng = np.random.default_rng(SEED + 4)
    models = [C.random_distributions_model(int(rng.integers(2**62))) for _ in range(100)]
    models += [C.pr_box_model(), C.brans_model(), C.signaling_cmd_witness(0.03125)]
    rt = all(loads_model(dumps_model(m)) == m and dumps_model(loads_model(dumps_model(m))) == dumps_model(m)
             for m in models)
    rt &= loads_model(dumps_model(C.pr_box_model(), exact=True)) == C.pr_box_model()
    m = C.brans_model()
    det = True
    for pair in ALL_PAIRS:
        serial = sample_run(m, pair, 200_000, seed=SEED, workers=1)
        det &= all(sample_run(m, pair, 200_000, seed=SEED, workers=w).counts == serial.counts for w in (2, 5))
    report(10, "JSON round trip bit-exact, sampling parallel-invariant", rt and det,
           f"round trip {rt}, determinism {det}", 2)
