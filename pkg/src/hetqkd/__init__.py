"""Eavesdropping bounds and optimal Gaussian attacks for coherent-state CV-QKD.

Variances are expressed in shot-noise units (N0 = 1) throughout. Quadrature
vectors use the ordering (X_1, ..., X_n, P_1, ..., P_n); mode 0 is the signal
mode B' arriving at Bob, the remaining modes are Eve's ancillas.
"""

from hetqkd.config import TOLERANCES, Tolerances
from hetqkd.errors import (
    ConditioningError,
    DimensionError,
    DomainError,
    UnrealizableAttackError,
)

__all__ = [
    "TOLERANCES",
    "Tolerances",
    "ConditioningError",
    "DimensionError",
    "DomainError",
    "UnrealizableAttackError",
]

__version__ = "0.1.0"
