"""Case analysis by kernel membership and single-distribution representability."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .constraints import CMD_MATRIX, NOSIGNAL_MATRIX, ConstraintMatrix, residual
from .model import (
    ALL_PAIRS,
    OUTCOMES,
    RESIDUAL_TOL,
    STRATEGIES,
    Distribution,
    HVModel,
    Number,
    Setting,
    SettingPair,
    require_valid,
)
from .metrics import correlations, local_expectation
from .simplex import solve_feasibility

S1 = "S1"
S2 = "S2-without-MI"
S3 = "S3"
S4 = "S4"

_LABELS = {(True, True): S1, (True, False): S2, (False, False): S3, (False, True): S4}


def case_label(in_ker_m: bool, in_ker_n: bool) -> str:
    return _LABELS[(bool(in_ker_m), bool(in_ker_n))]


@dataclass(frozen=True)
class Classification:
    in_ker_M: bool
    in_ker_N: bool
    case: str
    residual_M: Number
    residual_N: Number

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "in_ker_M": self.in_ker_M,
            "in_ker_N": self.in_ker_N,
            "residual_M": float(self.residual_M),
            "residual_N": float(self.residual_N),
        }


def classify(model: HVModel, tol: float = RESIDUAL_TOL,
             cmd_matrix: ConstraintMatrix = CMD_MATRIX,
             nosignal_matrix: ConstraintMatrix = NOSIGNAL_MATRIX) -> Classification:
    if tol <= 0:
        raise ValueError("tol must be positive")
    require_valid(model)
    rm = residual(cmd_matrix, model.xi).max_abs
    rn = residual(nosignal_matrix, model.xi).max_abs
    in_m, in_n = rm <= tol, rn <= tol
    return Classification(in_m, in_n, case_label(in_m, in_n), rm, rn)


# Each contrast compares one party's setting across the other party's two settings.
# Its value is minus the matching no-signaling row applied to xi.
CONTRASTS: dict[str, tuple[Setting, SettingPair, SettingPair]] = {
    "alice[A1]": (Setting.A1, SettingPair.A1B1, SettingPair.A1B2),
    "alice[A2]": (Setting.A2, SettingPair.A2B1, SettingPair.A2B2),
    "bob[B1]": (Setting.B1, SettingPair.A1B1, SettingPair.A2B1),
    "bob[B2]": (Setting.B2, SettingPair.A1B2, SettingPair.A2B2),
}


def signaling_contrasts(model: HVModel) -> dict[str, Number]:
    """Local-expectation differences ``E_second(Z) - E_first(Z)`` for each setting ``Z``."""
    out = {}
    for name, (setting, first, second) in CONTRASTS.items():
        out[name] = local_expectation(model, setting, second) - local_expectation(model, setting, first)
    return out


def is_nosignaling(model: HVModel, tol: float = RESIDUAL_TOL) -> bool:
    require_valid(model)
    return all(abs(c) <= tol for c in signaling_contrasts(model).values())


# -- single-distribution (MI) representation --------------------------------

# Local expectations are matched against the pair with the partner's first setting,
# except B2, which has no (A1, B1)-compatible pair.
MARGINAL_SOURCES: dict[Setting, SettingPair] = {
    Setting.A1: SettingPair.A1B1,
    Setting.A2: SettingPair.A2B1,
    Setting.B1: SettingPair.A1B1,
    Setting.B2: SettingPair.A1B2,
}


@dataclass(frozen=True)
class MIRepresentation:
    feasible: bool
    distribution: Distribution | None
    certificate: tuple | None
    signaling: bool
    targets: tuple
    constraints: tuple

    @property
    def ambiguous(self) -> bool:
        """Signaling models have setting-dependent marginals; the targets are one choice."""
        return self.signaling


def mi_constraints() -> list[tuple[str, tuple[int, ...]]]:
    """Rows of the 9x16 system: normalization, four correlations, four local expectations."""
    rows = [("norm", (1,) * len(STRATEGIES))]
    for pair in ALL_PAIRS:
        a, b = OUTCOMES[pair.alice], OUTCOMES[pair.bob]
        rows.append((f"E[{pair.name}]", tuple(x * y for x, y in zip(a, b))))
    for setting in MARGINAL_SOURCES:
        rows.append((f"E[{setting.name}]", OUTCOMES[setting]))
    return rows


def find_mi_representation(model: HVModel, tol: float = RESIDUAL_TOL) -> MIRepresentation:
    """Search for one setting-independent distribution reproducing the observed statistics.

    Infeasible results carry a Farkas certificate over the nine constraints.
    """
    require_valid(model)
    corr = correlations(model)
    targets = [Fraction(1) if model.exact else 1.0]
    targets += [corr[p] for p in ALL_PAIRS]
    targets += [local_expectation(model, s, pair) for s, pair in MARGINAL_SOURCES.items()]
    rows = mi_constraints()
    A = [r for _, r in rows]
    signaling = any(abs(c) > tol for c in signaling_contrasts(model).values())
    res = solve_feasibility(A, targets)
    dist = None
    if res.feasible:
        q = list(res.x)
        if not model.exact:
            q = [max(0.0, float(v)) for v in q]
            total = sum(q)
            q = [v / total for v in q]
        dist = Distribution(q)
    return MIRepresentation(res.feasible, dist, res.certificate, signaling,
                            tuple(targets), tuple(name for name, _ in rows))
