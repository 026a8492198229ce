"""Batched encode -> transmit -> combine -> solve runs with per-trial bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import ChannelRealization, CsitPattern, draw_channels
from .decoder import DecodeReport, EffectiveSystem, combine, oracle_identifiability, solve
from .scheme import SchemeCase, SymbolSet, TransmitBlock, classify_case, encode, transmit
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = ["Simulation", "simulate"]


@dataclass
class Simulation:
    """Everything one batch of blocks produced, indexed by trial."""

    pattern: CsitPattern
    case: SchemeCase
    channels: ChannelRealization
    symbols: SymbolSet
    block: TransmitBlock
    system: EffectiveSystem
    report: DecodeReport
    rank1: np.ndarray
    rank2: np.ndarray
    tolerances: Tolerances

    @property
    def trials(self) -> int:
        return self.channels.batch_shape[0]

    @property
    def leakage(self) -> np.ndarray:
        return self.system.leakage_ratio()

    @property
    def decoded(self) -> np.ndarray:
        ok_u, ok_v = self.report.receiver_ok(self.tolerances)
        return ok_u & ok_v & (self.leakage < self.tolerances.cancel)

    @property
    def delivered(self) -> np.ndarray:
        ok_u, ok_v = self.report.receiver_ok(self.tolerances)
        return 3 * ok_u.astype(int) + 2 * ok_v.astype(int)

    @property
    def oracle_full(self) -> np.ndarray:
        want = (2, 3) if self.case.mirrored else (3, 2)
        return (self.rank1 == want[0]) & (self.rank2 == want[1])

    @property
    def success_rate(self) -> float:
        return float(np.mean(self.decoded))

    def dof(self) -> Fraction:
        """Symbols delivered per slot, pooled over all trials."""
        return Fraction(int(self.delivered.sum()), self.trials * self.pattern.n)


def simulate(pattern: CsitPattern, trials: int, seed: int = 0, noise_power: float = 0.0,
             tolerances: Tolerances = DEFAULT_TOLERANCES) -> Simulation:
    """Run ``trials`` independent blocks of the scheme for ``pattern``.

    Channels, symbols and noise come from three streams spawned from
    ``seed``; identical arguments give bit-identical results.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    case = classify_case(pattern)
    ch_seq, sym_seq, noise_seq = np.random.SeedSequence(seed).spawn(3)
    channels = draw_channels(ch_seq, 4, trials, floor=tolerances.channel_floor)
    symbols = SymbolSet.random(sym_seq, trials)
    block = encode(pattern, case, symbols, channels)
    received = transmit(block, channels, noise_power, noise_seq)
    system = combine(case, channels, received)
    report = solve(system, tolerances, strict=False)
    if noise_power == 0:
        report.attach_truth(symbols.as_array())
    report.audit = {"reads": len(block.access_log), "forbidden": block.forbidden_reads}
    rank1, rank2 = oracle_identifiability(pattern, channels, block, rtol=tolerances.rank_rtol)
    return Simulation(pattern, case, channels, symbols, block, system, report,
                      np.asarray(rank1), np.asarray(rank2), tolerances)
