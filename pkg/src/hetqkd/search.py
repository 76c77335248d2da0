"""Randomized verification of the bounds over Iwasawa-parameterized attacks.

Eve owns ``2 * n_pairs`` ancilla modes. Every sample is drawn from its own
generator seeded with ``(seed, index)``, so results do not depend on how the
samples are scheduled across workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from hetqkd import bounds
from hetqkd.attacks import ChannelParams, channel_params_from
from hetqkd.config import TOLERANCES, Tolerances
from hetqkd.errors import DomainError
from hetqkd.gaussian_core import (
    BlockDiagSymplectic,
    IwasawaParams,
    complete_orthogonal,
    compose_iwasawa,
    random_orthogonal,
)

MODES = ("homodyne", "heterodyne")


@dataclass(frozen=True)
class SearchConfig:
    n_pairs: int = 1
    samples: int = 100_000
    seed: int = 0
    V: float = 11.0
    # target channel for the heterodyne search
    T: float = 0.5
    eps: float = 0.02
    log_squeeze: tuple[float, float] = (-2.0, 2.0)
    feedforward_std: float = 1.0
    mixing: bool = True
    channel_mode: str = "symmetrize"
    tolerances: Tolerances = TOLERANCES

    def __post_init__(self):
        if self.n_pairs < 1:
            raise DomainError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if self.samples < 1:
            raise DomainError(f"samples must be >= 1, got {self.samples}")
        if self.seed < 0 or self.seed >= 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        lo, hi = self.log_squeeze
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise DomainError(f"invalid squeezing exponent range {self.log_squeeze}")
        if self.feedforward_std < 0:
            raise DomainError("feed-forward spread must be non-negative")
        if self.V <= 1:
            raise DomainError(f"V must exceed 1 (non-zero modulation), got {self.V}")
        if self.channel_mode not in ("symmetrize", "condition"):
            raise DomainError(f"unknown channel mode {self.channel_mode!r}")

    @property
    def n_modes(self) -> int:
        return 2 * self.n_pairs + 1


def sample_rng(cfg: SearchConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, index])


def _random_factors(cfg: SearchConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = cfg.n_modes
    A = np.eye(n)
    rows, cols = np.tril_indices(n, -1)
    A[rows, cols] = cfg.feedforward_std * rng.standard_normal(len(rows))
    D = np.exp(rng.uniform(*cfg.log_squeeze, size=n))
    B = random_orthogonal(n, rng) if cfg.mixing else np.eye(n)
    return A, D, B


def random_attack(cfg: SearchConfig, index: int) -> BlockDiagSymplectic:
    A, D, B = _random_factors(cfg, sample_rng(cfg, index))
    return compose_iwasawa(IwasawaParams(A, D, B))


def random_symmetric_attack(cfg: SearchConfig, index: int) -> BlockDiagSymplectic | None:
    """Random attack reproducing the channel ``(cfg.T, cfg.eps)`` on both quadratures.

    Bob's X row fixes the first squeezing factor and the first column of B.
    The first row of ``A^{-T}`` is then solved so that the P row has the same
    gain and noise; that row is the intersection of a sphere and a hyperplane
    and a random point of it is taken. Returns None when the intersection is
    empty for this draw.
    """
    rng = sample_rng(cfg, index)
    n = cfg.n_modes
    chi = bounds.chi_total(cfg.T, cfg.eps)
    s1 = math.sqrt(cfg.T * (1.0 + chi))
    b1 = 1.0 / math.sqrt(1.0 + chi)
    A, D, _ = _random_factors(cfg, rng)
    D[0] = s1

    tail = rng.standard_normal(n - 1)
    tail *= math.sqrt(1.0 - b1 * b1) / np.linalg.norm(tail)
    B = complete_orthogonal(np.concatenate([[b1], tail]), rng).T

    col = B[1:, 0]
    col_sq = float(col @ col)
    target = math.sqrt(cfg.T) - b1 / s1
    radius_sq = s1 * s1 - 1.0 / (s1 * s1)
    if col_sq <= 1e-15:
        if abs(target) > 1e-12 or radius_sq > 1e-12:
            return None
        w = np.zeros(n - 1)
    else:
        along = target / col_sq
        perp_sq = radius_sq - along * along * col_sq
        if perp_sq < -1e-12:
            return None
        u = rng.standard_normal(n - 1)
        u -= (u @ col) / col_sq * col
        u /= np.linalg.norm(u)
        w = along * col + math.sqrt(max(perp_sq, 0.0)) * u

    upper = np.linalg.inv(A).T
    upper[0, 1:] = w * D[1:]
    A = np.linalg.inv(upper).T
    A = np.tril(A)
    np.fill_diagonal(A, 1.0)
    return compose_iwasawa(IwasawaParams(A, D, B))


# -- per-sample evaluation ------------------------------------------------------


def _projection_residual(rows: np.ndarray, target: np.ndarray) -> float | None:
    """Squared distance from ``target`` to the span of ``rows``.

    With the input noises whitened, this is the conditional variance of the
    quadrature ``target . u`` given the quadratures ``rows @ u``; it avoids
    forming the covariance matrix and the cancellation of a Schur complement.
    """
    q, r = np.linalg.qr(rows.T)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-13 * diag.max():
        return None
    resid = target - q @ (q.T @ target)
    return float(resid @ resid)


def _quadrature_stats(block: np.ndarray, V: float, eve: list[int]) -> tuple[float, float] | None:
    """Conditional variances of Bob's and of Alice's quadrature given Eve's modes ``eve``.

    ``block`` is the X (or P) block of the attack. Mode 0 carries Alice's
    modulation (variance ``V - 1``) plus vacuum, so the whitened noise vector
    is (modulation, vacuum of mode 0, vacua of the ancillas).
    """
    if np.all(block[eve, 0] == 0.0):
        return None
    mod = math.sqrt(V - 1.0)
    lifted = np.column_stack([mod * block[:, 0], block])
    bob = _projection_residual(lifted[eve], lifted[0])
    alice_row = np.zeros(lifted.shape[1])
    alice_row[0] = mod
    alice = _projection_residual(lifted[eve], alice_row)
    if bob is None or alice is None:
        return None
    return bob, alice


def homodyne_sample_metrics(S: BlockDiagSymplectic, V: float) -> dict | None:
    """Deviation of Eve's homodyne conditional variances from the closed forms.

    Eve measures Bob's quadrature on all her modes. Returns None for
    degenerate samples (Eve decoupled or singular conditioning block).
    """
    ch = channel_params_from(S, V)
    eve = list(range(1, S.n_modes))
    out = {"T_X": ch.T_X, "T_P": ch.T_P, "chi_X": ch.chi_X, "chi_P": ch.chi_P}
    dev = 0.0
    for name, block, T_o, chi_o in (("X", S.sx, ch.T_P, ch.chi_P), ("P", S.sp, ch.T_X, ch.chi_X)):
        stats = _quadrature_stats(block, V, eve)
        if stats is None:
            return None
        rr, dr = stats
        rr_ref = V / (T_o * (V * chi_o + 1.0))
        dr_ref = (V - 1.0) * (1.0 + chi_o) / (V * chi_o + 1.0)
        out[f"V_RR_{name}"], out[f"V_RR_{name}_ref"] = rr, rr_ref
        out[f"V_DR_{name}"], out[f"V_DR_{name}_ref"] = dr, dr_ref
        dev = max(dev, abs(rr - rr_ref) / abs(rr_ref), abs(dr - dr_ref) / abs(dr_ref))
    out["deviation"] = dev
    return out


def heterodyne_sample_metrics(S: BlockDiagSymplectic, V: float, ch: ChannelParams | None = None) -> dict | None:
    """Eve's heterodyne informations for an attack against the bounds of its channel.

    Eve reads X on the first half of her modes and P on the second half.
    ``ch`` overrides the channel used for the bound (defaults to the X channel).
    """
    n = S.n_modes
    pairs = (n - 1) // 2
    if ch is None:
        ch = channel_params_from(S, V)
    x_stats = _quadrature_stats(S.sx, V, list(range(1, 1 + pairs)))
    p_stats = _quadrature_stats(S.sp, V, list(range(1 + pairs, n)))
    if x_stats is None or p_stats is None:
        return None
    (vx, ax), (vp, ap) = x_stats, p_stats
    T, eps, chi = ch.T_X, ch.eps_X, ch.chi_X
    chi_min = bounds.hetero_chi_E_min(T, eps)
    v_min = bounds.hetero_V_min(V, chi_min)
    V_B = (T * (V + chi) + 1.0) / 2.0
    I_BE = 0.5 * math.log2(V_B / (0.5 * (vx + 1.0))) + 0.5 * math.log2(V_B / (0.5 * (vp + 1.0)))
    I_BE_bound = math.log2(V_B / (0.5 * (v_min + 1.0)))
    I_AE = 0.5 * math.log2((V - 1.0) / ax) + 0.5 * math.log2((V - 1.0) / ap)
    I_AE_bound = 2.0 * bounds.shannon_eve_info(V, chi_min)
    return {
        "T": T,
        "eps": eps,
        "V_XcondE": vx,
        "V_PcondE": vp,
        "product_margin": (vx + 1.0) * (vp + 1.0) - (v_min + 1.0) ** 2,
        "I_BE": I_BE,
        "I_BE_bound": I_BE_bound,
        "I_AE": I_AE,
        "I_AE_bound": I_AE_bound,
        "violation_RR": I_BE - I_BE_bound,
        "violation_DR": I_AE - I_AE_bound,
    }


# -- outcome ----------------------------------------------------------------------


@dataclass
class SearchOutcome:
    mode: str
    config: SearchConfig
    records: dict[str, np.ndarray] = field(repr=False)
    n_samples: int
    n_degenerate: int
    n_rejected: int
    max_deviation: float = 0.0  # homodyne: relative deviation from the closed forms
    max_violation_RR: float = -math.inf  # heterodyne: I_BE - bound, in bits
    max_violation_DR: float = -math.inf
    n_violations: int = 0
    n_asymmetric: int = 0

    @property
    def n_evaluated(self) -> int:
        return self.n_samples - self.n_degenerate - self.n_rejected

    @property
    def rejected_fraction(self) -> float:
        return (self.n_degenerate + self.n_rejected) / self.n_samples

    @property
    def passed(self) -> bool:
        if self.n_evaluated == 0:
            return False
        tol = self.config.tolerances
        if self.mode == "homodyne":
            return self.max_deviation <= tol.homodyne_equality
        return self.n_violations == 0

    def summary_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.mode == "homodyne":
            detail = f"max relative deviation {self.max_deviation:.3e}"
        else:
            detail = (
                f"violations {self.n_violations}, max I_BE excess {self.max_violation_RR:.3e} bits, "
                f"max I_AE excess {self.max_violation_DR:.3e} bits"
            )
        return (
            f"[{status}] {self.mode} n_pairs={self.config.n_pairs} samples={self.n_samples} "
            f"evaluated={self.n_evaluated} degenerate={self.n_degenerate} rejected={self.n_rejected}: {detail}"
        )

    def summary_row(self) -> dict:
        return {
            "mode": self.mode,
            "n_pairs": self.config.n_pairs,
            "samples": self.n_samples,
            "seed": self.config.seed,
            "evaluated": self.n_evaluated,
            "degenerate": self.n_degenerate,
            "rejected": self.n_rejected,
            "asymmetric": self.n_asymmetric,
            "max_deviation": _fmt(self.max_deviation) if self.mode == "homodyne" else "",
            "max_violation_RR": _fmt(self.max_violation_RR) if self.mode == "heterodyne" else "",
            "max_violation_DR": _fmt(self.max_violation_DR) if self.mode == "heterodyne" else "",
            "violations": self.n_violations,
            "passed": int(self.passed),
        }

    def write_csv(self, path) -> None:
        row = self.summary_row()
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row), lineterminator="\n")
            writer.writeheader()
            writer.writerow(row)


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _evaluate_range(mode: str, cfg: SearchConfig, start: int, stop: int) -> list:
    results = []
    for index in range(start, stop):
        if mode == "homodyne":
            results.append(homodyne_sample_metrics(random_attack(cfg, index), cfg.V))
            continue
        if cfg.channel_mode == "symmetrize":
            S = random_symmetric_attack(cfg, index)
            if S is None:
                results.append("rejected")
                continue
            ch = channel_params_from(S, cfg.V)
        else:
            S = random_attack(cfg, index)
            ch = channel_params_from(S, cfg.V)
            if not ch.is_symmetric(cfg.tolerances.channel_symmetry) or not 0.0 <= ch.eps_X <= 2.0:
                results.append("rejected")
                continue
        try:
            results.append(heterodyne_sample_metrics(S, cfg.V, ch))
        except DomainError:
            results.append("rejected")
    return results


def _run(mode: str, cfg: SearchConfig, workers: int) -> SearchOutcome:
    if mode not in MODES:
        raise DomainError(f"unknown search mode {mode!r}")
    if workers <= 1:
        results = _evaluate_range(mode, cfg, 0, cfg.samples)
    else:
        edges = np.linspace(0, cfg.samples, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_evaluate_range, mode, cfg, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
            results = [r for fut in futures for r in fut.result()]

    kept = [(i, r) for i, r in enumerate(results) if isinstance(r, dict)]
    n_rejected = sum(1 for r in results if r == "rejected")
    n_degenerate = sum(1 for r in results if r is None)
    records: dict[str, np.ndarray] = {"index": np.array([i for i, _ in kept], dtype=np.int64)}
    if kept:
        for key in kept[0][1]:
            records[key] = np.array([r[key] for _, r in kept])
    outcome = SearchOutcome(mode, cfg, records, cfg.samples, n_degenerate, n_rejected)
    if not kept:
        return outcome
    tol = cfg.tolerances
    if mode == "homodyne":
        outcome.max_deviation = float(np.max(records["deviation"]))
        asym = (np.abs(records["T_X"] - records["T_P"]) > tol.channel_symmetry) | (
            np.abs(records["chi_X"] - records["chi_P"]) > tol.channel_symmetry
        )
        outcome.n_asymmetric = int(np.sum(asym))
    else:
        outcome.max_violation_RR = float(np.max(records["violation_RR"]))
        outcome.max_violation_DR = float(np.max(records["violation_DR"]))
        bad = (records["violation_RR"] > tol.heterodyne_bound) | (records["violation_DR"] > tol.heterodyne_bound)
        outcome.n_violations = int(np.sum(bad))
    return outcome


def verify_homodyne_optimality(cfg: SearchConfig, workers: int = 1) -> SearchOutcome:
    """Check that quantum-memory attacks on the homodyne protocol sit exactly on its bounds."""
    return _run("homodyne", cfg, workers)


def verify_heterodyne_bound(cfg: SearchConfig, workers: int = 1) -> SearchOutcome:
    """Check that no random symmetric attack beats the new heterodyne bounds."""
    return _run("heterodyne", cfg, workers)


def config_dict(cfg: SearchConfig) -> dict:
    d = asdict(cfg)
    d.pop("tolerances")
    return d
