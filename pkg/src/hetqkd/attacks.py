"""Gaussian attacks on the signal mode: channel extraction, the symmetric
one-parameter family, and the four tuned attacks that reach the heterodyne bound.

Mode 0 is the signal B' delivered to Bob. In three-mode attacks Eve measures
X on mode 1 (E1) and P on mode 2 (E2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hetqkd.config import TOLERANCES
from hetqkd.errors import DomainError, UnrealizableAttackError
from hetqkd.gaussian_core import (
    BlockDiagSymplectic,
    IwasawaParams,
    beam_splitter,
    complete_orthogonal,
    compose_iwasawa,
    conditional_variance,
    input_covariance,
    passive,
    propagate,
    squeezer,
    two_mode_amplifier,
)

_R2 = 1.0 / math.sqrt(2.0)

# Eve's heterodyne splitter: X read on E1, P on E2.
_EVE_SPLITTER = np.array([[1.0, 0.0, 0.0], [0.0, _R2, _R2], [0.0, -_R2, _R2]])
# Mixing of the two EPR arms (also Eve's joint measurement in the entangling cloner).
_EPR_MIXER = np.array([[1.0, 0.0, 0.0], [0.0, _R2, -_R2], [0.0, _R2, _R2]])
_SWAP_02 = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
_BS50_01 = np.array([[_R2, -_R2, 0.0], [_R2, _R2, 0.0], [0.0, 0.0, 1.0]])

KINDS = ("feedforward", "cloning", "teleportation", "entangling-cloner")


@dataclass(frozen=True)
class ChannelParams:
    T_X: float
    T_P: float
    eps_X: float
    eps_P: float
    chi_X: float
    chi_P: float
    V: float
    N0: float = 1.0

    @classmethod
    def symmetric(cls, T: float, eps: float, V: float) -> "ChannelParams":
        chi = 1.0 / T + eps - 1.0
        return cls(T, T, eps, eps, chi, chi, V)

    def is_symmetric(self, tol: float = TOLERANCES.channel_symmetry) -> bool:
        return abs(self.T_X - self.T_P) <= tol and abs(self.chi_X - self.chi_P) <= tol


@dataclass(frozen=True)
class EveView:
    """Eve's input-referred noises and Bob's conditional variances given her data."""

    chi_XE1: float
    chi_PE2: float
    V_XcondE: float
    V_PcondE: float

    def as_array(self) -> np.ndarray:
        return np.array([self.chi_XE1, self.chi_PE2, self.V_XcondE, self.V_PcondE])


def _row_channel(row: np.ndarray) -> tuple[float, float, float]:
    t = row[0]
    if t == 0.0:
        raise DomainError("signal is not transmitted to Bob (zero gain on mode 0)")
    T = t * t
    chi = float(np.sum(row[1:] ** 2) / T)
    return float(T), chi, chi - 1.0 / T + 1.0


def channel_params_from(S: BlockDiagSymplectic, V: float) -> ChannelParams:
    """Transmission and noise seen by Bob on each quadrature, for any number of modes."""
    T_X, chi_X, eps_X = _row_channel(S.sx[0])
    T_P, chi_P, eps_P = _row_channel(S.sp[0])
    return ChannelParams(T_X, T_P, eps_X, eps_P, chi_X, chi_P, V)


def _eve_noise(row: np.ndarray) -> float:
    gain_sq = float(row[0]) ** 2
    if gain_sq == 0.0:
        return math.inf
    return float(np.sum(row[1:] ** 2)) / gain_sq


def eve_view_from(S: BlockDiagSymplectic, V: float) -> EveView:
    if S.n_modes != 3:
        raise DomainError(f"Eve's view is defined on three modes, got {S.n_modes}")
    gamma = propagate(S, input_covariance(V, 3))
    return EveView(
        chi_XE1=_eve_noise(S.sx[1]),
        chi_PE2=_eve_noise(S.sp[2]),
        V_XcondE=conditional_variance(gamma, 0, [1]),
        V_PcondE=conditional_variance(gamma, 3, [5]),
    )


def eve_view_closed_form(p: IwasawaParams, V: float) -> EveView:
    """Eve's view written through ``r = a s1 / s2`` and the first column of B.

    Valid for three-mode attacks whose Iwasawa factors are ``p``.
    """
    s1, s2 = p.D[0], p.D[1]
    b1, b4 = p.B[0, 0], p.B[1, 0]
    r = p.A[1, 0] * s1 / s2
    den_x = (r * b1 + b4) ** 2
    den_p = p.B[2, 0] ** 2  # 1 - b1^2 - b4^2 without cancellation
    if den_x <= 1e-14 * (r * r + 1.0) or den_p <= 1e-14:
        raise DomainError("closed form is singular: Eve is decoupled from one quadrature")
    chi_x = (r * r + 1.0) / den_x - 1.0
    chi_p = 1.0 / den_p - 1.0
    vx = s1**2 / (r * r + 1.0) * (V * chi_p + 1.0) * (chi_x + 1.0) / ((V + chi_x) * (chi_p + 1.0))
    vp = (r * r + 1.0) / s1**2 * (V * chi_x + 1.0) * (chi_p + 1.0) / ((V + chi_p) * (chi_x + 1.0))
    return EveView(chi_x, chi_p, vx, vp)


# -- symmetric family ---------------------------------------------------------


@dataclass(frozen=True)
class SymmetricAttackFamily:
    T: float
    chi: float
    b4: float
    sigma: int
    s1: float
    b1: float
    r: float
    delta: float
    rho: float
    params: IwasawaParams = field(repr=False)


def family_rho(T: float, chi: float) -> float:
    return (T * chi) ** 2 - (1.0 - T) ** 2


def symmetrize(
    T: float,
    chi: float,
    b4: float,
    sigma: int = 1,
    *,
    s2: float = 1.0,
    s3: float = 1.0,
    c: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[SymmetricAttackFamily, BlockDiagSymplectic]:
    """Three-mode attack with identical X and P channels, parameterized by ``b4``.

    ``s2``, ``s3``, ``c`` and the orthogonal completion of B (canonical when
    ``rng`` is None) do not affect Eve's view; they are exposed so that random
    members of the family can be drawn.
    """
    if sigma not in (1, -1):
        raise DomainError(f"sigma must be +1 or -1, got {sigma}")
    if T <= 0 or chi < 0:
        raise DomainError(f"need T > 0 and chi >= 0, got T={T}, chi={chi}")
    rho = family_rho(T, chi)
    if rho < -1e-14:
        raise DomainError(f"channel T={T}, chi={chi} cannot be symmetrized (rho={rho:.3e} < 0)")
    rho = max(rho, 0.0)
    s1 = math.sqrt(T * (1.0 + chi))
    b1 = 1.0 / math.sqrt(1.0 + chi)
    free = 1.0 - b1 * b1  # chi / (1 + chi)

    if free <= 1e-15:
        if b4 != 0.0:
            raise DomainError("a noiseless channel admits only b4 = 0")
        p = IwasawaParams(np.eye(3), np.array([s1, 1.0, 1.0]), np.eye(3))
        fam = SymmetricAttackFamily(T, chi, 0.0, sigma, s1, b1, 0.0, 0.0, rho, p)
        return fam, compose_iwasawa(p)

    if b4 * b4 >= free:
        raise DomainError(f"b4={b4} outside the admissible range b4^2 < {free:.6g}")
    b7 = math.sqrt(free - b4 * b4)
    if b7 == 0.0:
        raise DomainError("degenerate orthogonal basis (b7 = 0)")
    r = (b1 * b4 * (1.0 - s1 * s1) + sigma * math.sqrt((free - b4 * b4) * rho)) / free
    a = r * s2 / s1
    delta = s3 * (b1 * (s1 * s1 - 1.0) / s1 + a * b4 / s2) / b7
    B = complete_orthogonal(np.array([b1, b4, b7]), rng).T
    A = np.array([[1.0, 0.0, 0.0], [a, 1.0, 0.0], [a * c - delta, c, 1.0]])
    p = IwasawaParams(A, np.array([s1, s2, s3]), B)
    fam = SymmetricAttackFamily(T, chi, b4, sigma, s1, b1, r, delta, rho, p)
    return fam, compose_iwasawa(p)


def optimal_b4(T: float, chi: float, sigma: int = 1) -> float:
    """Value of ``b4`` at which the family gives Eve the most information."""
    s1sq = T * (1.0 + chi)
    b1sq = 1.0 / (1.0 + chi)
    if s1sq < 1.0 - 1e-12:
        raise DomainError(f"T(1+chi) = {s1sq:.6g} < 1 lies outside the family's coverage")
    inner = 1.0 - s1sq * (2.0 * b1sq - 1.0)
    num = math.sqrt(s1sq) * math.sqrt(inner) - math.sqrt(b1sq * max(s1sq - 1.0, 0.0))
    return sigma * num / (s1sq + 1.0)


# -- named attacks --------------------------------------------------------------


@dataclass(frozen=True)
class NamedAttack:
    kind: str
    T: float
    eps: float
    tuning: dict
    symplectic: BlockDiagSymplectic = field(repr=False)


def _check_eps(eps: float, upper_inclusive: bool = True) -> None:
    if eps < 0 or eps > 2 or (eps == 2 and not upper_inclusive):
        raise DomainError(f"excess noise eps={eps} outside the quantum regime [0, 2]")


def _feed_forward_gains(gx: float, gp: float) -> BlockDiagSymplectic:
    """``X_B += gx X_E1`` and ``P_B += gp P_E2``, with the matching back-action."""
    lower = np.eye(3)
    lower[0, 1] = gx
    upper = np.eye(3)
    upper[0, 2] = gp
    return BlockDiagSymplectic.from_x_block(lower) @ BlockDiagSymplectic(np.linalg.inv(upper).T, upper)


def _epr_source(s: float) -> BlockDiagSymplectic:
    """EPR pair on modes 1 and 2: squeezers (1/s, s) mixed on a 50/50 splitter."""
    return passive(_EPR_MIXER) @ squeezer(3, 1, 1.0 / s) @ squeezer(3, 2, s)


def build_feed_forward(T: float, eps: float) -> NamedAttack:
    """Tap, heterodyne the tapped beam and displace Bob's mode by gain ``g_E``."""
    if T <= 0:
        raise DomainError(f"transmission must be positive, got T={T}")
    _check_eps(eps)
    if 2.0 - 2.0 * T + T * eps < 0:
        raise UnrealizableAttackError(f"no real feed-forward tuning for T={T}, eps={eps}")
    g = math.sqrt(eps * T)
    T_E = 4.0 * (2.0 - math.sqrt(eps * (2.0 - 2.0 * T + T * eps))) / ((2.0 + T * eps) ** 2 / T) - T * (
        2.0 - eps
    ) / (2.0 + T * eps)
    if not 0.0 <= T_E <= 1.0:
        raise UnrealizableAttackError(f"feed-forward tap transmission T_E={T_E:.6g} outside [0, 1]")
    S = _feed_forward_gains(g, -g) @ passive(_EVE_SPLITTER) @ beam_splitter(3, 0, 1, T_E)
    return NamedAttack("feedforward", T, eps, {"g_E": g, "T_E": T_E}, S)


def build_teleportation(T: float, eps: float) -> NamedAttack:
    """Bell-measure the signal against one EPR arm and displace the other arm to Bob."""
    if T <= 0:
        raise DomainError(f"transmission must be positive, got T={T}")
    _check_eps(eps)
    den = (1.0 - math.sqrt(T)) ** 2
    if den == 0.0:
        raise UnrealizableAttackError("teleportation tuning is singular at T = 1")
    s_sq = (1.0 - T + T * eps - math.sqrt(T * eps * (2.0 - 2.0 * T + T * eps))) / den
    if s_sq <= 0:
        raise UnrealizableAttackError(f"teleportation squeezing s^2={s_sq:.6g} is not positive")
    s = math.sqrt(s_sq)
    g = math.sqrt(2.0 * T)
    S = _feed_forward_gains(g, g) @ passive(_SWAP_02) @ passive(_BS50_01) @ _epr_source(s)
    return NamedAttack("teleportation", T, eps, {"g_E": g, "s": s}, S)


def build_entangling_cloner(T: float, eps: float) -> NamedAttack:
    """Replace the line by a beam-splitter of transmission T fed by one EPR arm."""
    if not 0.0 < T < 1.0:
        raise UnrealizableAttackError(f"entangling cloner needs 0 < T < 1, got T={T}")
    if eps < 0:
        raise DomainError(f"excess noise must be non-negative, got eps={eps}")
    rhs = T * eps / (1.0 - T) + 1.0
    # smaller root of s^4 - 2 rhs s^2 + 1 = 0; the other root swaps the EPR arms
    s_sq = 1.0 / (rhs + math.sqrt(rhs * rhs - 1.0))
    s = math.sqrt(s_sq)
    S = passive(_EPR_MIXER) @ beam_splitter(3, 0, 1, T) @ _epr_source(s)
    return NamedAttack("entangling-cloner", T, eps, {"T_E": T, "s": s}, S)


def build_cloning(T: float, eps: float) -> NamedAttack:
    """Amplify the signal, tap the amplified beam, jointly measure tap and idler."""
    if T <= 0:
        raise DomainError(f"transmission must be positive, got T={T}")
    if eps >= 2:
        raise UnrealizableAttackError(f"cloning gain diverges for eps={eps} >= 2")
    _check_eps(eps)
    G = 1.0 / (1.0 - eps / 2.0)
    T_E = T * (1.0 - eps / 2.0)
    if T_E > 1.0:
        raise UnrealizableAttackError(f"cloning tap transmission T_E={T_E:.6g} exceeds 1")
    S = passive(_EVE_SPLITTER) @ beam_splitter(3, 0, 1, T_E) @ two_mode_amplifier(3, 0, 2, G)
    return NamedAttack("cloning", T, eps, {"T_E": T_E, "G": G}, S)


BUILDERS = {
    "feedforward": build_feed_forward,
    "cloning": build_cloning,
    "teleportation": build_teleportation,
    "entangling-cloner": build_entangling_cloner,
}


def build(kind: str, T: float, eps: float) -> NamedAttack:
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise DomainError(f"unknown attack kind {kind!r}; choose from {', '.join(KINDS)}") from None
    return builder(T, eps)


def swap_eve_roles(S: BlockDiagSymplectic) -> BlockDiagSymplectic:
    """Relabel E1 <-> E2 so that X is read on the new E2 and P on the new E1."""
    perm = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    return passive(perm) @ S


def eve_view_swapped(S: BlockDiagSymplectic, V: float) -> EveView:
    """Eve's view when she reads X on mode 2 and P on mode 1."""
    gamma = propagate(S, input_covariance(V, 3))
    return EveView(
        chi_XE1=_eve_noise(S.sx[2]),
        chi_PE2=_eve_noise(S.sp[1]),
        V_XcondE=conditional_variance(gamma, 0, [2]),
        V_PcondE=conditional_variance(gamma, 3, [4]),
    )
