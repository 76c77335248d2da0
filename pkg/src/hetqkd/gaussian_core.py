"""Symplectic matrices, Iwasawa composition and covariance-matrix calculus.

Quadratures are ordered (X_1, ..., X_n, P_1, ..., P_n) and all variances are
in shot-noise units. Attacks that do not mix X and P are represented by the
pair of n x n blocks ``(S_X, S_P)``; symplecticity then reduces to
``S_P = S_X^{-T}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from hetqkd.config import TOLERANCES
from hetqkd.errors import ConditioningError, DimensionError, DomainError

# Condition number above which a conditioning block is treated as singular.
_MAX_CONDITION = 1e13


def symplectic_form(n: int) -> np.ndarray:
    """Return the 2n x 2n form [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _half_dim(matrix: np.ndarray) -> int:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] % 2:
        raise DimensionError(f"odd dimension {matrix.shape[0]} has no mode structure")
    return matrix.shape[0] // 2


def symplectic_residual(S: np.ndarray) -> float:
    """Max-norm of ``S Omega S^T - Omega``; zero iff ``S`` is exactly symplectic."""
    S = np.asarray(S, dtype=float)
    omega = symplectic_form(_half_dim(S))
    return float(np.max(np.abs(S @ omega @ S.T - omega)))


@dataclass(frozen=True)
class BlockDiagSymplectic:
    """A symplectic map acting separately on the X and the P quadratures."""

    sx: np.ndarray
    sp: np.ndarray

    @classmethod
    def from_x_block(cls, sx: np.ndarray) -> "BlockDiagSymplectic":
        sx = np.asarray(sx, dtype=float)
        return cls(sx, np.linalg.inv(sx).T)

    @classmethod
    def identity(cls, n: int) -> "BlockDiagSymplectic":
        return cls(np.eye(n), np.eye(n))

    @property
    def n_modes(self) -> int:
        return self.sx.shape[0]

    def full(self) -> np.ndarray:
        n = self.n_modes
        zero = np.zeros((n, n))
        return np.block([[self.sx, zero], [zero, self.sp]])

    def block_residual(self) -> float:
        """Max-norm of ``S_X S_P^T - I``, zero iff the pair is symplectic."""
        return float(np.max(np.abs(self.sx @ self.sp.T - np.eye(self.n_modes))))

    def __matmul__(self, other: "BlockDiagSymplectic") -> "BlockDiagSymplectic":
        return BlockDiagSymplectic(self.sx @ other.sx, self.sp @ other.sp)


@dataclass(frozen=True)
class IwasawaParams:
    """Factors of ``S_X = A diag(D) B`` for a block-diagonal symplectic map.

    ``A`` is lower unitriangular (feed-forward), ``D`` holds the single-mode
    squeezing factors and ``B`` is orthogonal (beam-splitters and phase flips).
    The P block follows as ``A^{-T} diag(D)^{-1} B``.
    """

    A: np.ndarray
    D: np.ndarray
    B: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.D)

    @property
    def delta(self) -> float:
        """``a c - b`` for three modes: the (0, 2) entry of ``A^{-T}``."""
        if self.n_modes != 3:
            raise DimensionError("delta is defined for three modes only")
        a, b, c = self.A[1, 0], self.A[2, 0], self.A[2, 1]
        return float(a * c - b)

    def validate(self, tol: float = TOLERANCES.orthogonal) -> None:
        n = self.n_modes
        if self.A.shape != (n, n) or self.B.shape != (n, n):
            raise DimensionError("A, D and B must describe the same number of modes")
        if np.any(~np.isfinite(self.D)) or np.any(self.D <= 0):
            raise DomainError(f"squeezing factors must be strictly positive, got {self.D}")
        if np.any(np.triu(self.A, 1) != 0) or np.any(np.diag(self.A) != 1):
            raise DomainError("A must be lower unitriangular")
        err = np.max(np.abs(self.B @ self.B.T - np.eye(n)))
        if err > tol:
            raise DomainError(f"B is not orthogonal (residual {err:.3e})")


def compose_iwasawa(p: IwasawaParams) -> BlockDiagSymplectic:
    p.validate()
    a_inv_t = np.linalg.inv(p.A).T
    sx = p.A @ np.diag(p.D) @ p.B
    sp = a_inv_t @ np.diag(1.0 / p.D) @ p.B
    return BlockDiagSymplectic(sx, sp)


def iwasawa_factors(sx: np.ndarray) -> IwasawaParams:
    """Recover ``(A, D, B)`` from the X block by an LQ factorization.

    The factorization is unique once the diagonal of ``D`` is required to be
    positive, which is how QR sign ambiguities are fixed here.
    """
    sx = np.asarray(sx, dtype=float)
    q, r = np.linalg.qr(sx.T)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    lower = (r * signs[:, None]).T  # L = R^T with positive diagonal
    B = (q * signs[None, :]).T
    D = np.diag(lower).copy()
    A = lower / D[None, :]
    np.fill_diagonal(A, 1.0)
    A = np.tril(A)
    return IwasawaParams(A, D, B)


def euler_orthogonal(angles: Sequence[float], sign: int = 1) -> np.ndarray:
    """3 x 3 orthogonal matrix from z-y-z Euler angles and a determinant sign."""
    if sign not in (1, -1):
        raise DomainError(f"determinant sign must be +1 or -1, got {sign}")
    alpha, beta, gamma = angles

    def rz(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    def ry(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])

    rot = rz(alpha) @ ry(beta) @ rz(gamma)
    return rot if sign == 1 else rot @ np.diag([1.0, 1.0, -1.0])


def random_orthogonal(n: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix (both determinant signs occur).

    QR of a Gaussian matrix, with the columns of Q rescaled by the signs of
    diag(R) so the distribution does not depend on the QR convention.
    """
    if n < 1:
        raise DomainError(f"need at least one mode, got n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs[None, :]


def complete_orthogonal(first_row: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Orthogonal matrix whose first row is the unit vector ``first_row``.

    Remaining rows come from Gram-Schmidt on the canonical basis when ``rng``
    is None, otherwise on Gaussian random vectors.
    """
    u = np.asarray(first_row, dtype=float)
    n = len(u)
    if abs(np.linalg.norm(u) - 1.0) > TOLERANCES.orthogonal:
        raise DomainError("first row must be a unit vector")
    if rng is None:
        # canonical vectors least aligned with u go first, ties broken by index
        order = np.argsort(np.abs(u), kind="stable")
        candidates = np.eye(n)[order]
    else:
        candidates = rng.standard_normal((n, n))
    rows = [u]
    for v in candidates:
        if len(rows) == n:
            break
        w = v - sum(np.dot(v, r) * r for r in rows)
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            rows.append(w / norm)
    if len(rows) < n:
        raise DomainError("could not complete an orthonormal basis")
    return np.array(rows)


def input_covariance(V: float, n_modes: int) -> np.ndarray:
    """Alice's thermal signal of variance V on mode 0, vacuum elsewhere."""
    diag = np.ones(2 * n_modes)
    diag[0] = V
    diag[n_modes] = V
    return np.diag(diag)


def propagate(S: np.ndarray | BlockDiagSymplectic, gamma: np.ndarray) -> np.ndarray:
    """``S gamma S^T``, symmetrized against round-off."""
    if isinstance(S, BlockDiagSymplectic):
        S = S.full()
    S = np.asarray(S, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if S.shape[1] != gamma.shape[0] or gamma.shape[0] != gamma.shape[1]:
        raise DimensionError(f"cannot propagate {gamma.shape} covariance through {S.shape} map")
    out = S @ gamma @ S.T
    return 0.5 * (out + out.T)


def conditional_variance(gamma: np.ndarray, target: int, given: Iterable[int]) -> float:
    """Variance of quadrature ``target`` after optimal linear estimation from ``given``.

    Schur complement ``g_tt - g_tG g_GG^{-1} g_Gt`` of the covariance matrix.
    """
    gamma = np.asarray(gamma, dtype=float)
    given = list(given)
    if not given:
        raise DomainError("conditioning set must not be empty")
    if target in given:
        return 0.0
    block = gamma[np.ix_(given, given)]
    if np.linalg.cond(block) > _MAX_CONDITION:
        raise ConditioningError(f"conditioning block on {given} is singular")
    cross = gamma[target, given]
    return float(gamma[target, target] - cross @ np.linalg.solve(block, cross))


def determinant_ratio(gamma: np.ndarray, target: int, given: Iterable[int]) -> float:
    """The same conditional variance written as ``det(g_{t+G}) / det(g_G)``."""
    gamma = np.asarray(gamma, dtype=float)
    given = list(given)
    if not given:
        raise DomainError("conditioning set must not be empty")
    den = np.linalg.det(gamma[np.ix_(given, given)])
    if abs(den) < 1e-300:
        raise ConditioningError(f"conditioning block on {given} is singular")
    idx = [target] + given
    return float(np.linalg.det(gamma[np.ix_(idx, idx)]) / den)


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Sorted symplectic eigenvalues, from the spectrum of ``Omega^{-1} gamma``."""
    n = _half_dim(gamma)
    omega = symplectic_form(n)
    eig = np.abs(np.linalg.eigvals(np.linalg.solve(omega, gamma)))
    return np.sort(eig)[::2]


def is_physical(gamma: np.ndarray, tol: float = TOLERANCES.symplectic_eigenvalue) -> bool:
    gamma = np.asarray(gamma, dtype=float)
    if np.max(np.abs(gamma - gamma.T)) > TOLERANCES.symmetric * max(1.0, np.max(np.abs(gamma))):
        return False
    return bool(np.all(symplectic_eigenvalues(gamma) >= 1.0 - tol))


@dataclass(frozen=True)
class InvariantTriple:
    delta1: float
    delta2: float
    delta3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.delta1, self.delta2, self.delta3])


def symplectic_invariants(gamma: np.ndarray) -> InvariantTriple:
    """Three-mode symplectic invariants.

    ``Delta_j`` is the sum of the principal minors of order 2j of
    ``Omega gamma``, i.e. the j-th elementary symmetric polynomial of the
    squared symplectic eigenvalues.
    """
    n = _half_dim(gamma)
    if n != 3:
        raise DimensionError(f"invariants are implemented for three modes, got {n}")
    m = symplectic_form(3) @ np.asarray(gamma, dtype=float)
    deltas = []
    with np.errstate(divide="ignore", invalid="ignore"):  # exactly singular minors
        for j in (1, 2, 3):
            total = 0.0
            for idx in itertools.combinations(range(6), 2 * j):
                total += np.linalg.det(m[np.ix_(idx, idx)])
            deltas.append(float(total))
    return InvariantTriple(*deltas)


# -- elementary optical maps -------------------------------------------------


def passive(orthogonal: np.ndarray) -> BlockDiagSymplectic:
    o = np.asarray(orthogonal, dtype=float)
    return BlockDiagSymplectic(o, o.copy())


def beam_splitter(n: int, i: int, j: int, transmission: float) -> BlockDiagSymplectic:
    """Mode ``i`` keeps amplitude sqrt(T), mode ``j`` is coupled in with -sqrt(1-T)."""
    if not 0.0 <= transmission <= 1.0:
        raise DomainError(f"beam-splitter transmission must lie in [0, 1], got {transmission}")
    t, r = np.sqrt(transmission), np.sqrt(1.0 - transmission)
    o = np.eye(n)
    o[i, i], o[i, j] = t, -r
    o[j, i], o[j, j] = r, t
    return passive(o)


def squeezer(n: int, mode: int, s: float) -> BlockDiagSymplectic:
    """Scale X of ``mode`` by ``s`` and P by ``1/s``."""
    if s <= 0:
        raise DomainError(f"squeezing factor must be positive, got {s}")
    d = np.ones(n)
    d[mode] = s
    return BlockDiagSymplectic(np.diag(d), np.diag(1.0 / d))


def shear(n: int, target: int, source: int, gain: float) -> BlockDiagSymplectic:
    """``X_target += gain X_source``; the back-action ``P_source -= gain P_target``."""
    sx = np.eye(n)
    sx[target, source] = gain
    return BlockDiagSymplectic.from_x_block(sx)


def two_mode_amplifier(n: int, i: int, j: int, gain: float) -> BlockDiagSymplectic:
    """Phase-insensitive amplifier of intensity gain ``G`` on mode ``i`` with idler ``j``."""
    if gain < 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {gain}")
    a, b = np.sqrt(gain), np.sqrt(gain - 1.0)
    sx = np.eye(n)
    sx[i, i], sx[i, j], sx[j, i], sx[j, j] = a, b, b, a
    sp = np.eye(n)
    sp[i, i], sp[i, j], sp[j, i], sp[j, j] = a, -b, -b, a
    return BlockDiagSymplectic(sx, sp)
