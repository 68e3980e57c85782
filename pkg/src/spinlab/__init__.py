"""Spin-correlation laboratory: singlet correlations, Bell's inequality,
local hidden-variable models, Furry mixtures and no-signaling checks."""

from .bell import BellTriple, InequalityReport, evaluate_inequality, violation_scan
from .measure import (
    expectation,
    joint_correlation,
    sample_joint,
    sample_measurement,
    sequential_stern_gerlach,
    single_particle_correlation,
)
from .qstate import (
    XHAT,
    YHAT,
    ZHAT,
    Direction,
    QubitKet,
    TwoQubitKet,
    schmidt_decompose,
    singlet,
    spin_eigenstate,
    spin_operator,
    tensor_product,
)

__version__ = "0.1.0"

__all__ = [
    "XHAT", "YHAT", "ZHAT", "BellTriple", "Direction", "InequalityReport", "QubitKet",
    "TwoQubitKet", "evaluate_inequality", "expectation", "joint_correlation", "sample_joint",
    "sample_measurement", "schmidt_decompose", "sequential_stern_gerlach",
    "single_particle_correlation", "singlet", "spin_eigenstate", "spin_operator",
    "tensor_product", "violation_scan",
]
