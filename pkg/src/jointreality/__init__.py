"""Device-independent no-go tests of joint reality for a dephased qubit."""

from .bloch import (
    BlochVector,
    EnsembleQuartet,
    Observable,
    dephase,
    ensemble_quartet,
    expectation,
    rotate,
)
from .criteria import (
    CriterionReport,
    ExpectationQuartet,
    SignChoice,
    ell_theta_mu,
    evaluate,
    linear_criterion,
    linear_criterion_max,
    nonlinear_criterion,
    tau_theta_mu,
)
from .oracle import check_joint_reality, reconstruct_region

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "CriterionReport",
    "EnsembleQuartet",
    "ExpectationQuartet",
    "Observable",
    "SignChoice",
    "check_joint_reality",
    "dephase",
    "ell_theta_mu",
    "ensemble_quartet",
    "evaluate",
    "expectation",
    "linear_criterion",
    "linear_criterion_max",
    "nonlinear_criterion",
    "reconstruct_region",
    "rotate",
    "tau_theta_mu",
]
