"""Closed-form eavesdropping bounds, mutual informations and key rates.

Informations are in bits per channel symbol. An infinite Eve noise stands for
an eavesdropper decoupled from the signal and yields zero information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hetqkd.errors import DomainError

PROTOCOLS = ("homodyne", "heterodyne_old", "heterodyne_new")
DIRECTIONS = ("DR", "RR")


def chi_total(T: float, eps: float) -> float:
    """Total added noise referred to the channel input."""
    if T <= 0:
        raise DomainError(f"transmission must be positive, got T={T}")
    return 1.0 / T + eps - 1.0


def homodyne_rr_bound(V: float, T: float, chi: float) -> float:
    """Minimal conditional variance of Bob's quadrature given Eve (reverse reconciliation)."""
    if V < 1 or T <= 0 or chi < 0:
        raise DomainError(f"invalid channel V={V}, T={T}, chi={chi}")
    return V / (T * (1.0 + chi * V))


def homodyne_dr_chi(chi_q: float) -> float:
    """Eve's equivalent input noise against homodyne direct reconciliation."""
    if chi_q < 0:
        raise DomainError(f"chi must be non-negative, got {chi_q}")
    return math.inf if chi_q == 0 else 1.0 / chi_q


def hetero_chi_E_min(T: float, eps: float) -> float:
    """Smallest noise Eve can have on each of her two heterodyne measurements."""
    if T <= 0 or eps < 0 or eps > 2:
        raise DomainError(f"need T > 0 and 0 <= eps <= 2, got T={T}, eps={eps}")
    arg = 2.0 - 2.0 * T + T * eps
    if arg < 0:
        raise DomainError(f"2 - 2T + T eps = {arg:.6g} < 0 for T={T}, eps={eps}")
    den = (math.sqrt(arg) + math.sqrt(eps)) ** 2
    if den == 0.0:
        return math.inf
    return T * (2.0 - eps) ** 2 / den + 1.0


def hetero_V_min(V: float, chi_E: float) -> float:
    """Minimal conditional variance of B' given Eve's heterodyne data."""
    if math.isinf(chi_E):
        return float(V)
    return (V * chi_E + 1.0) / (V + chi_E)


def hetero_old_conditional(V: float, T: float, chi: float) -> float:
    """Conditional variance at Bob's detector obtained from the homodyne bound."""
    return 0.5 * (homodyne_rr_bound(V, T, chi) + 1.0)


def _half_log2(ratio: float) -> float:
    if not ratio > 0:
        raise DomainError(f"non-positive variance ratio {ratio}")
    return 0.5 * math.log2(ratio)


def shannon_eve_info(V: float, chi_E: float) -> float:
    """Information on one quadrature of Alice's modulation from a measurement of noise chi_E."""
    if math.isinf(chi_E):
        return 0.0
    return _half_log2((V + chi_E) / (1.0 + chi_E))


@dataclass(frozen=True)
class RateReport:
    protocol: str
    direction: str
    I_AB: float
    I_EVE: float
    dI: float
    dI_eff: float
    beta: float


def mutual_informations(
    T: float,
    eps: float,
    V: float,
    protocol: str,
    direction: str = "RR",
    beta: float = 1.0,
    *,
    chi_E: tuple[float, float] | None = None,
    V_cond: tuple[float, float] | None = None,
) -> RateReport:
    """Shannon informations and secret rates for a symmetric channel.

    Without ``chi_E`` / ``V_cond`` Eve is assumed to reach the bound of the
    chosen protocol; passing them evaluates a specific attack instead
    (``V_cond`` is the conditional variance of B' for reverse reconciliation,
    ``chi_E`` Eve's input-referred noises for direct reconciliation, one
    entry per quadrature; homodyne uses the first entry).
    """
    if protocol not in PROTOCOLS:
        raise DomainError(f"unknown protocol {protocol!r}")
    if direction not in DIRECTIONS:
        raise DomainError(f"unknown direction {direction!r}")
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"reconciliation efficiency must lie in [0, 1], got {beta}")
    chi = chi_total(T, eps)
    homodyne = protocol == "homodyne"

    if homodyne:
        I_AB = _half_log2((V + chi) / (1.0 + chi))
    else:
        I_AB = math.log2((T * (V + chi) + 1.0) / (T * (1.0 + chi) + 1.0))

    if direction == "RR":
        if V_cond is None:
            if protocol == "heterodyne_new":
                v = hetero_V_min(V, hetero_chi_E_min(T, eps))
            else:
                v = homodyne_rr_bound(V, T, chi)
            V_cond = (v, v)
        if homodyne:
            I_EVE = _half_log2(T * (V + chi) / V_cond[0])
        else:
            V_B = (T * (V + chi) + 1.0) / 2.0
            I_EVE = sum(_half_log2(V_B / (0.5 * (vq + 1.0))) for vq in V_cond)
    else:
        if chi_E is None:
            c = hetero_chi_E_min(T, eps) if protocol == "heterodyne_new" else homodyne_dr_chi(chi)
            chi_E = (c, c)
        if homodyne:
            I_EVE = shannon_eve_info(V, chi_E[0])
        else:
            I_EVE = sum(shannon_eve_info(V, c) for c in chi_E)

    return RateReport(protocol, direction, I_AB, I_EVE, I_AB - I_EVE, beta * I_AB - I_EVE, beta)


def coincidence_chi(T: float, V: float, direction: str = "RR") -> float:
    """Channel noise at which the heterodyne and homodyne bounds coincide."""
    if direction == "RR":
        if T <= 0 or V < 1:
            raise DomainError(f"need T > 0 and V >= 1, got T={T}, V={V}")
        return math.sqrt(1.0 - T + T / V**2) / T - 1.0 / V
    if direction == "DR":
        if T < 1:
            raise DomainError(f"direct-reconciliation coincidence needs T >= 1, got T={T}")
        return math.sqrt(1.0 - 1.0 / T)
    raise DomainError(f"unknown direction {direction!r}")


# -- derivation through the symplectic invariants ------------------------------------


@dataclass(frozen=True)
class InvariantSolution:
    V_B: float
    c: float
    x: float
    y: float
    z: float
    sigma: int
    V_cond: float

    def eve_split(self, V_Em: float | None = None) -> tuple[float, float, float, float]:
        """One choice of ``(c_m, c_n, V_Em, V_En)`` consistent with ``x, y, z``.

        The split is free up to ``V_Em``; the default ``sqrt(y)`` gives Eve's
        two modes equal variances.
        """
        V_Em = math.sqrt(self.y) if V_Em is None else V_Em
        q = self.V_B - self.V_cond  # c_m^2 / V_Em
        c_m = math.sqrt(max(q * V_Em, 0.0))
        V_En = self.y / V_Em
        c_n = self.x / c_m if c_m else 0.0
        return c_m, c_n, V_Em, V_En

    def covariance(self, V_Em: float | None = None) -> np.ndarray:
        c_m, c_n, V_Em, V_En = self.eve_split(V_Em)
        c, vb = self.c, self.V_B
        gx = np.array([[vb, c_m, c_n], [c_m, V_Em, c], [c_n, c, V_En]])
        gp = np.array([[vb, c_n, c_m], [c_n, V_En, c], [c_m, c, V_Em]])
        zero = np.zeros((3, 3))
        return np.block([[gx, zero], [zero, gp]])


def _xz(V: float, V_B: float, c: float, y: float) -> tuple[float, float]:
    x = 0.25 * (2.0 * (1.0 - c * c - y) + V * V - V_B * V_B)
    z = V_B * y - V - c * c * (V_B + c) + 0.5 * c * (2.0 * (1.0 - y) + V * V - V_B * V_B)
    return x, z


def _smaller_root(V_B: float, y: float, z: float, disc: float, tol: float) -> float:
    if disc < -tol * max(1.0, z * z):
        raise DomainError(f"inconsistent invariant solution (discriminant {disc:.3e})")
    return V_B - (z + math.sqrt(max(disc, 0.0))) / (2.0 * y)


def conditional_from_y(T: float, chi: float, V: float, y: float, tol: float = 1e-9) -> float:
    """Heterodyne conditional variance of B' as a function of Eve's variance product y."""
    V_B = T * (V + chi)
    c = (V - V_B) / 2.0
    x, z = _xz(V, V_B, c, y)
    return _smaller_root(V_B, y, z, z * z - 4.0 * y * x * x, tol)


def invariant_solution(T: float, chi: float, V: float, tol: float = 1e-9) -> InvariantSolution:
    """Solve the three-mode invariants for Eve's best heterodyne conditional variance."""
    if T <= 0 or chi < 0 or V < 1:
        raise DomainError(f"invalid channel V={V}, T={T}, chi={chi}")
    V_B = T * (V + chi)
    c = (V - V_B) / 2.0
    y = c * c + T * (V * chi + 1.0)
    x, z = _xz(V, V_B, c, y)
    # z^2 - 4 y x^2 at this y, factored; the direct difference cancels when eps -> 0
    eps = chi - 1.0 / T + 1.0
    disc = T * T * eps * (V * V - 1.0) ** 2 * (2.0 - 2.0 * T + T * eps)
    V_cond = _smaller_root(V_B, y, z, disc, tol)
    return InvariantSolution(V_B, c, x, y, z, 1, V_cond)
