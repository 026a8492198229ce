"""Degrees-of-freedom accounting, reference baselines and rate-slope sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .channel import ChannelRealization, CsitPattern, LambdaDistribution, draw_channels
from .decoder import DecodeReport, EffectiveSystem, combine
from .scheme import SymbolSet, TransmitBlock, classify_case, encode, transmit
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "PERFECT_CSIT_DOF", "DELAYED_CSIT_DOF", "NO_CSIT_DOF", "DofAccount",
    "RateSweep", "dof_account", "baseline_mix", "sum_rate", "rate_sweep",
    "fit_slope", "power_normalization",
]

# Known sum-DoF of the two-user SISO X-channel under fixed CSIT (cited results,
# not re-derived here).
PERFECT_CSIT_DOF = Fraction(4, 3)
DELAYED_CSIT_DOF = Fraction(6, 5)
NO_CSIT_DOF = Fraction(1)


@dataclass(frozen=True)
class DofAccount:
    symbols_delivered: int
    slots_used: int

    @property
    def dof(self) -> Fraction:
        return Fraction(self.symbols_delivered, self.slots_used)

    @classmethod
    def from_ranks(cls, ranks: Sequence[int], slots_used: int) -> "DofAccount":
        """Account from identifiable dimensions, e.g. the oracle's ranks."""
        return cls(int(sum(ranks)), slots_used)


def dof_account(report: DecodeReport, pattern: CsitPattern,
                tolerances: Tolerances = DEFAULT_TOLERANCES
                ) -> Union[DofAccount, list[DofAccount]]:
    """Symbols decoded below tolerance per slot; a list when the report is batched."""
    ok_u, ok_v = report.receiver_ok(tolerances)
    delivered = 3 * np.asarray(ok_u, dtype=int) + 2 * np.asarray(ok_v, dtype=int)
    if delivered.ndim == 0:
        return DofAccount(int(delivered), pattern.n)
    return [DofAccount(int(d), pattern.n) for d in delivered.ravel()]


def baseline_mix(dist: LambdaDistribution) -> Fraction:
    """DoF of time-sharing the fixed-CSIT schemes in proportion to ``dist``."""
    return (dist.lambda_p * PERFECT_CSIT_DOF + dist.lambda_d * DELAYED_CSIT_DOF
            + dist.lambda_n * NO_CSIT_DOF)


def _logdet_psd(K: np.ndarray, eps: float) -> np.ndarray:
    sign, logdet = np.linalg.slogdet(K)
    bad = (sign.real <= 0) | ~np.isfinite(logdet)
    if np.any(bad):
        eye = np.eye(K.shape[-1])
        sign2, logdet2 = np.linalg.slogdet(K + eps * eye)
        logdet = np.where(bad, logdet2, logdet)
    return logdet


def sum_rate(system: EffectiveSystem, power: float,
             tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Gaussian-input sum rate of both effective systems, bits per channel use.

    Each receiver contributes ``log2 det(I + (power/2) A A^H K^-1)``,
    evaluated as ``log2 det(K + (power/2) A A^H) - log2 det(K)``; the total
    is divided by the four slots of a block.
    """
    if power <= 0:
        raise ValueError("power must be positive")
    total = 0.0
    for A, K in ((system.a_u, system.k_u), (system.a_v, system.k_v)):
        gram = A @ np.conj(np.swapaxes(A, -1, -2))
        signal = _logdet_psd(K + 0.5 * power * gram, tolerances.noise_reg)
        noise = _logdet_psd(K, tolerances.noise_reg)
        total = total + (signal - noise) / np.log(2.0)
    return np.maximum(total, 0.0) / system.w_u.shape[-1]


def power_normalization(block: TransmitBlock) -> np.ndarray:
    """Per-block factor making the largest per-slot transmit energy one."""
    energy = np.sum(np.abs(block.precoders) ** 2, axis=-1)
    return 1.0 / np.sqrt(energy.max(axis=(-2, -1)))


def fit_slope(powers: Sequence[float], rates: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)`` of rate against log2(power)."""
    x = np.log2(np.asarray(powers, dtype=float))
    slope, intercept = np.polyfit(x, np.asarray(rates, dtype=float), 1)
    return float(slope), float(intercept)


@dataclass
class RateSweep:
    pattern: CsitPattern
    powers: np.ndarray
    mean_rate: np.ndarray
    std_rate: np.ndarray
    trials: int
    resample_count: int
    slope: float
    intercept: float

    def top_half_slope(self) -> float:
        """Slope refitted on the upper half of the power grid."""
        k = len(self.powers) // 2
        return fit_slope(self.powers[k:], self.mean_rate[k:])[0]

    def rows(self) -> list[dict]:
        return [{"power": float(p), "log2_power": float(np.log2(p)), "mean_rate": float(m),
                 "std_rate": float(s)}
                for p, m, s in zip(self.powers, self.mean_rate, self.std_rate)]


def _clean_channels(pattern, case, symbols, rng, trials, clip):
    """Draw channels, redrawing whole blocks whose precoders exceed ``clip``."""
    h = draw_channels(rng, 4, trials).h.copy()
    resampled = 0
    while True:
        channels = ChannelRealization(h)
        block = encode(pattern, case, symbols, channels)
        bad = np.abs(block.precoders).max(axis=(-3, -2, -1)) > clip
        if not bad.any():
            return channels, block, resampled
        resampled += int(bad.sum())
        h = h.copy()
        h[bad] = draw_channels(rng, 4, int(bad.sum())).h


def rate_sweep(pattern: CsitPattern, powers: Sequence[float], trials: int,
               seed: Optional[int] = 0,
               tolerances: Tolerances = DEFAULT_TOLERANCES) -> RateSweep:
    """Average sum rate over ``trials`` channel draws at every power.

    The same draws serve every power point, so the averaged curve is
    monotone in power and the fitted slope estimates the pre-log factor.
    """
    case = classify_case(pattern)
    if trials < 1:
        raise ValueError("rate sweep needs at least one trial")
    powers = np.asarray(powers, dtype=float)
    if powers.size < 2:
        raise ValueError("rate sweep needs at least two power points")
    if np.any(powers <= 0) or np.any(np.diff(powers) <= 0):
        raise ValueError("powers must be positive and strictly increasing")
    ch_seq, sym_seq, noise_seq = np.random.SeedSequence(seed).spawn(3)
    rng = np.random.default_rng(ch_seq)
    symbols = SymbolSet.random(sym_seq, trials)
    channels, block, resampled = _clean_channels(pattern, case, symbols, rng, trials,
                                                 tolerances.precoder_clip)
    block = block.scaled(power_normalization(block))
    received = transmit(block, channels, 1.0, noise_seq)
    system = combine(block.case, channels, received)
    rates = np.stack([sum_rate(system, p, tolerances) for p in powers])
    mean = rates.mean(axis=1)
    std = rates.std(axis=1)
    slope, intercept = fit_slope(powers, mean)
    return RateSweep(pattern, powers, mean, std, trials, resampled, slope, intercept)
