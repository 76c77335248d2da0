"""Numerical tolerances shared by the library, the tests and the CLI."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    symplectic: float = 1e-10
    determinant: float = 1e-8
    symmetric: float = 1e-12
    orthogonal: float = 1e-10
    symplectic_eigenvalue: float = 1e-8
    invariants: float = 1e-8
    schur_vs_det_ratio: float = 1e-10
    channel_roundtrip: float = 1e-10
    bound_saturation: float = 1e-8
    homodyne_equality: float = 1e-8
    heterodyne_bound: float = 1e-8
    cross_derivation: float = 1e-9
    coincidence: float = 1e-9
    family_dominance: float = 1e-9
    channel_symmetry: float = 1e-6


TOLERANCES = Tolerances()
