"""Monte Carlo measurement runs.

Shots are split into fixed chunks by shot index; chunk ``k`` of pair ``p``
draws from its own Philox stream keyed by ``(seed, p, k)``. Counts are
therefore identical whatever the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifier import CONTRASTS
from .metrics import CHSH_FAMILY
from .model import ALL_PAIRS, N_STRATEGIES, OUTCOMES, HVModel, SettingPair, distribution_for

CHUNK_SIZE = 1 << 16
SIGMAS = 4.0
CELLS = ("++", "+-", "-+", "--")
_CELL_SIGNS = {"++": (1, 1), "+-": (1, -1), "-+": (-1, 1), "--": (-1, -1)}


@dataclass(frozen=True)
class RunResult:
    pair: SettingPair
    shots: int
    seed: int
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"pair": self.pair.name, "shots": self.shots, "seed": self.seed,
                "counts": {c: int(self.counts[c]) for c in CELLS}}

    @classmethod
    def from_dict(cls, doc: dict) -> "RunResult":
        counts = {c: int(doc["counts"][c]) for c in CELLS}
        shots = int(doc["shots"])
        if sum(counts.values()) != shots or min(counts.values()) < 0:
            raise ValueError("counts must be non-negative and sum to shots")
        return cls(SettingPair.parse(doc["pair"]), shots, int(doc["seed"]), counts)


def _cdf(p) -> np.ndarray:
    probs = np.array([float(v) for v in p])
    cdf = np.cumsum(probs)
    last = int(np.flatnonzero(probs > 0)[-1])
    cdf[last:] = 1.0
    return cdf


def _chunk_counts(cdf: np.ndarray, seed: int, pair_index: int, chunk: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(pair_index, chunk))
    rng = np.random.Generator(np.random.Philox(ss))
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    return np.bincount(idx, minlength=N_STRATEGIES)


def strategy_counts(model: HVModel, pair: SettingPair, shots: int, seed: int = 0,
                    workers: int = 1, chunk_size: int = CHUNK_SIZE) -> np.ndarray:
    """Number of times each strategy index was drawn."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    cdf = _cdf(distribution_for(model, pair).p)
    pair_index = ALL_PAIRS.index(pair)
    chunks = [(k, min(chunk_size, shots - k * chunk_size)) for k in range(math.ceil(shots / chunk_size))]

    def run(job):
        k, n = job
        return _chunk_counts(cdf, seed, pair_index, k, n)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(job) for job in chunks]
    return np.sum(parts, axis=0)


def sample_run(model: HVModel, pair: SettingPair, shots: int, seed: int = 0, workers: int = 1) -> RunResult:
    per_strategy = strategy_counts(model, pair, shots, seed, workers)
    a, b = OUTCOMES[pair.alice], OUTCOMES[pair.bob]
    counts = dict.fromkeys(CELLS, 0)
    for k, n in enumerate(per_strategy):
        counts[("+" if a[k] == 1 else "-") + ("+" if b[k] == 1 else "-")] += int(n)
    return RunResult(pair, shots, seed, counts)


def estimate_correlation(result: RunResult) -> tuple[float, float]:
    """Sample mean of ``alpha * beta`` and its standard error ``sqrt((1 - E^2) / shots)``."""
    if result.shots < 1:
        raise ValueError("shots must be >= 1")
    s = sum(_CELL_SIGNS[c][0] * _CELL_SIGNS[c][1] * result.counts[c] for c in CELLS)
    e = s / result.shots
    return e, math.sqrt(max(0.0, 1.0 - e * e) / result.shots)


def estimate_local(result: RunResult, party: str) -> tuple[float, float]:
    """Mean outcome of one side (``"alice"`` or ``"bob"``) with its standard error."""
    side = 0 if party == "alice" else 1
    s = sum(_CELL_SIGNS[c][side] * result.counts[c] for c in CELLS)
    e = s / result.shots
    return e, math.sqrt(max(0.0, 1.0 - e * e) / result.shots)


@dataclass(frozen=True)
class ContrastEstimate:
    name: str
    estimate: float
    radius: float

    def contains(self, value: float) -> bool:
        return abs(self.estimate - value) <= self.radius


def sample_all_pairs(model: HVModel, shots: int, seed: int = 0, workers: int = 1) -> dict[SettingPair, RunResult]:
    return {pair: sample_run(model, pair, shots, seed, workers) for pair in ALL_PAIRS}


def estimate_signaling(model: HVModel, shots: int, seed: int = 0, workers: int = 1,
                       runs: dict | None = None) -> list[ContrastEstimate]:
    """Empirical marginal contrasts (same orientation as the analytic ones) with 4-sigma radii."""
    runs = sample_all_pairs(model, shots, seed, workers) if runs is None else runs
    out = []
    for name, (setting, first, second) in CONTRASTS.items():
        party = "alice" if name.startswith("alice") else "bob"
        e1, s1 = estimate_local(runs[first], party)
        e2, s2 = estimate_local(runs[second], party)
        out.append(ContrastEstimate(name, e2 - e1, SIGMAS * math.hypot(s1, s2)))
    return out


@dataclass(frozen=True)
class ChshEstimate:
    values: tuple[float, ...]
    stderr: float

    @property
    def best(self) -> float:
        return max(self.values)


def estimate_chsh(model: HVModel, shots_per_pair: int, seed: int = 0, workers: int = 1,
                  runs: dict | None = None) -> ChshEstimate:
    runs = sample_all_pairs(model, shots_per_pair, seed, workers) if runs is None else runs
    est = {pair: estimate_correlation(runs[pair]) for pair in ALL_PAIRS}
    values = tuple(sum(w.weight(p) * est[p][0] for p in ALL_PAIRS) for w in CHSH_FAMILY)
    stderr = math.sqrt(sum(se * se for _, se in est.values()))
    return ChshEstimate(values, stderr)
