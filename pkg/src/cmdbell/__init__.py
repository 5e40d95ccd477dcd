"""Concealed measurement dependence (CMD) analysis for deterministic
two-party, two-setting, two-outcome hidden-variable models."""

from .classifier import Classification, classify, find_mi_representation, is_nosignaling
from .constraints import (
    ConstraintMatrix,
    KernelBasis,
    build_cmd_matrix,
    build_nosignal_matrix,
    kernel_basis,
    project_to_kernel,
    rank,
    residual,
)
from .constructors import (
    brans_model,
    pr_box_model,
    random_cmd_model,
    random_model,
    signaling_cmd_witness,
    uniform_mi_model,
)
from .metrics import (
    CHSH_FAMILY,
    WeightVector,
    bell_report,
    bell_value,
    chsh_family,
    correlation,
    gamma,
    gamma_max,
    generalized_correlation,
    hall_measure,
    local_expectation,
    marginal_probability,
)
from .model import (
    STRATEGIES,
    Distribution,
    HVModel,
    Setting,
    SettingPair,
    Strategy,
    XiVector,
    distribution_for,
    outcome,
    validate,
    xi_from_distributions,
)
from .sampler import RunResult, estimate_correlation, estimate_signaling, sample_run

__version__ = "0.1.0"
