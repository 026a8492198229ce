"""Transmit-side construction of the four-slot creation/resurrection schemes.

Every synergistic pattern is served by one generic scheme built from five
components, each occupying one slot:

========  ==========================================================
``U1``    ``x1 = u1_1, x2 = u2``: creates interference at the other
          receiver while giving the primary receiver a fresh equation.
``U2``    ``x1 = u1_2, x2 = u2``: the second such creation slot.
``V``     ``x1 = v1, x2 = v2``: creates interference at the primary
          receiver.
``RV``    distributed resurrection of the ``V`` interference, needing
          delayed CSIT of the ``V`` slot and perfect CSIT now.
``RU``    resurrection of both ``U`` interference terms from transmitter
          1 alone, needing only delayed CSIT of the ``U`` slots.
========  ==========================================================

Five components fit in four slots with exactly one overlap, and the kind of
overlap is the case label: ``V`` with a ``U`` is case 1, ``RV`` with ``RU``
is case 2 and ``RV`` with a ``U`` is case 3.  The *primary* receiver is the
one decoding the three ``u`` symbols (receiver 1, or receiver 2 for a
mirrored pattern).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional

import numpy as np

from .channel import (ChannelRealization, CsitPattern, CsitState, CsitView,
                      AccessRecord, SeedLike, _as_generator, complex_normal)

__all__ = [
    "SYMBOL_NAMES", "SymbolSet", "Case", "SchemeCase", "SlotRoles",
    "NotSynergistic", "TABLE1", "TransmitBlock", "ReceivedSignals",
    "mirror_pattern", "derive_roles", "classify_case", "build_precoders",
    "encode", "transmit",
]

SYMBOL_NAMES = ("u1_1", "u1_2", "u2", "v1", "v2")
U11, U12, U2, V1, V2 = range(5)
U_SYMBOLS = (U11, U12, U2)
V_SYMBOLS = (V1, V2)


class NotSynergistic(ValueError):
    """The pattern (and its mirror) is not one of the synergistic patterns."""


class Case(IntEnum):
    CASE1 = 1
    CASE2 = 2
    CASE3 = 3


# Synergistic patterns for Lambda(1/8, 3/8, 1/2) and their case labels.
TABLE1: dict[str, Case] = {
    "DD,ND,PN,NN": Case.CASE1,
    "ND,DD,PN,NN": Case.CASE1,
    "ND,DD,NN,PN": Case.CASE1,
    "DD,ND,NN,PN": Case.CASE1,
    "DD,PN,ND,NN": Case.CASE1,
    "ND,ND,DN,PN": Case.CASE2,
    "ND,DN,ND,PN": Case.CASE2,
    "DN,ND,ND,PN": Case.CASE2,
    "ND,DN,PD,NN": Case.CASE3,
    "DN,ND,PD,NN": Case.CASE3,
    "DN,PD,ND,NN": Case.CASE3,
}

_OVERLAP_CASE = {
    frozenset({"U1", "V"}): Case.CASE1,
    frozenset({"U2", "V"}): Case.CASE1,
    frozenset({"RV", "RU"}): Case.CASE2,
    frozenset({"U1", "RV"}): Case.CASE3,
    frozenset({"U2", "RV"}): Case.CASE3,
}


@dataclass
class SymbolSet:
    """The five data symbols; each field may be a scalar or a batch array."""

    u1_1: complex
    u1_2: complex
    u2: complex
    v1: complex
    v2: complex

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(
            *[np.asarray(getattr(self, k), dtype=np.complex128) for k in SYMBOL_NAMES]),
            axis=-1)

    @classmethod
    def from_array(cls, arr) -> "SymbolSet":
        arr = np.asarray(arr, dtype=np.complex128)
        if arr.shape[-1] != 5:
            raise ValueError("expected five symbols along the last axis")
        if not np.all(np.isfinite(arr)):
            raise ValueError("symbols must be finite")
        return cls(*(arr[..., k] for k in range(5)))

    @classmethod
    def random(cls, seed: SeedLike, trials: Optional[int] = None) -> "SymbolSet":
        """Unit-power CN(0, 1) symbols."""
        rng = _as_generator(seed)
        shape = (5,) if trials is None else (trials, 5)
        return cls.from_array(complex_normal(rng, shape))


@dataclass(frozen=True)
class SlotRoles:
    """Which slot hosts each scheme component (slots are 1-indexed)."""

    primary: int
    v_create: int
    v_resurrect: int
    u_create: tuple[int, int]
    u_resurrect: int
    n: int = 4

    @property
    def other(self) -> int:
        return 3 - self.primary

    @property
    def mirrored(self) -> bool:
        return self.primary == 2

    def components(self, slot: int) -> frozenset[str]:
        comps = set()
        if slot == self.u_create[0]:
            comps.add("U1")
        if slot == self.u_create[1]:
            comps.add("U2")
        if slot == self.v_create:
            comps.add("V")
        if slot == self.v_resurrect:
            comps.add("RV")
        if slot == self.u_resurrect:
            comps.add("RU")
        return frozenset(comps)

    @property
    def overlap_slot(self) -> Optional[int]:
        shared = [t for t in range(1, self.n + 1) if len(self.components(t)) > 1]
        return shared[0] if len(shared) == 1 else None

    @property
    def case(self) -> Optional[Case]:
        t = self.overlap_slot
        return None if t is None else _OVERLAP_CASE.get(self.components(t))

    @property
    def creation_slots(self) -> tuple[int, ...]:
        return tuple(t for t in range(1, self.n + 1)
                     if self.components(t) & {"U1", "U2", "V"})

    def label(self, slot: int) -> str:
        return "+".join(sorted(self.components(slot))) or "-"


def mirror_pattern(pattern: CsitPattern) -> CsitPattern:
    """Swap the CSIT states of the two receivers in every slot."""
    return CsitPattern(tuple(s.swapped() for s in pattern.slots))


def derive_roles(pattern: CsitPattern, primary: int) -> list[SlotRoles]:
    """All valid component placements with ``primary`` decoding the u-symbols.

    A placement is valid when ``V`` sits on a D slot of the primary receiver
    followed later by a P slot hosting ``RV``, both ``U`` slots are D slots of
    the other receiver, ``RU`` comes after them, every slot hosts something,
    and the single overlap is one of the three case types.
    """
    other = 3 - primary
    n = pattern.n
    s_p = pattern.receiver_states(primary)
    s_q = pattern.receiver_states(other)
    found = []
    for a, rv in itertools.combinations(range(1, n + 1), 2):
        if s_p[a - 1] is not CsitState.D or s_p[rv - 1] is not CsitState.P:
            continue
        for b1, b2 in itertools.combinations(range(1, n + 1), 2):
            if s_q[b1 - 1] is not CsitState.D or s_q[b2 - 1] is not CsitState.D:
                continue
            for ru in range(b2 + 1, n + 1):
                roles = SlotRoles(primary, a, rv, (b1, b2), ru, n)
                if all(roles.components(t) for t in range(1, n + 1)) and roles.case:
                    found.append(roles)
    return found


@dataclass(frozen=True)
class SchemeCase:
    """Case label of a pattern plus the slot-role map that realizes it."""

    case: Case
    mirrored: bool = False
    roles: Optional[SlotRoles] = field(default=None, compare=False, repr=False)


def classify_case(pattern: CsitPattern) -> SchemeCase:
    """Look the pattern (or its mirror) up in the synergistic table."""
    if pattern.n != 4:
        raise NotSynergistic(f"pattern {pattern} does not span four slots")
    key = str(pattern)
    if key in TABLE1:
        label, mirrored = TABLE1[key], False
    elif str(mirror_pattern(pattern)) in TABLE1:
        label, mirrored = TABLE1[str(mirror_pattern(pattern))], True
    else:
        raise NotSynergistic(f"pattern ({pattern}) is not synergistic, nor is its mirror")
    roles = derive_roles(pattern, 2 if mirrored else 1)
    if len(roles) != 1 or roles[0].case is not label:
        # Table and derivation disagree: needs manual review, never patched.
        raise RuntimeError(f"slot-role derivation for ({pattern}) gave {roles}, "
                           f"table says case {int(label)}")
    return SchemeCase(label, mirrored, roles[0])


Reader = Callable[..., object]


def build_precoders(case: SchemeCase, reader_for: Callable[[int, int], Reader],
                    batch_shape: tuple[int, ...] = ()) -> np.ndarray:
    """Precoding coefficients ``G[..., t-1, j-1, s]`` so that x_j(t) = G s.

    ``reader_for(t, j)`` returns a callable ``read(i, tau, link)`` giving
    ``h_{i,link}(tau)`` as known to transmitter ``j`` at slot ``t``.  Reads
    happen only where a coefficient is actually needed.
    """
    roles = case.roles
    p, q = roles.primary, roles.other
    a, rv = roles.v_create, roles.v_resurrect
    b1, b2 = roles.u_create
    sign = -1.0 if case.case is Case.CASE3 else 1.0
    G = np.zeros(batch_shape + (roles.n, 2, 5), dtype=np.complex128)
    for t in range(1, roles.n + 1):
        comps = roles.components(t)
        for j in (1, 2):
            g = G[..., t - 1, j - 1, :]
            read = reader_for(t, j)
            if "U1" in comps:
                g[..., U11 if j == 1 else U2] += 1.0
            if "U2" in comps:
                g[..., U12 if j == 1 else U2] += 1.0
            if "V" in comps:
                g[..., V1 if j == 1 else V2] += 1.0
            if "RV" in comps:
                g[..., V1 if j == 1 else V2] += read(p, a, j) / read(p, rv, j)
            if "RU" in comps and j == 1:
                g[..., U11] += sign * read(q, b2, 2) * read(q, b1, 1)
                g[..., U12] -= sign * read(q, b1, 2) * read(q, b2, 1)
    return G


@dataclass
class TransmitBlock:
    """Transmit signals ``x[..., j-1, t-1]`` plus everything needed to audit them."""

    x: np.ndarray
    precoders: np.ndarray
    pattern: CsitPattern
    case: SchemeCase
    access_log: list[AccessRecord] = field(default_factory=list)

    @property
    def forbidden_reads(self) -> int:
        return sum(not r.allowed for r in self.access_log)

    def scaled(self, factor) -> "TransmitBlock":
        """Block with signals and precoders multiplied by a (per-trial) factor."""
        f = np.asarray(factor)
        return TransmitBlock(self.x * f[..., None, None], self.precoders * f[..., None, None, None],
                             self.pattern, self.case, list(self.access_log))


def encode(pattern: CsitPattern, case: SchemeCase, symbols: SymbolSet,
           channels: ChannelRealization) -> TransmitBlock:
    """Build both transmitters' signals, reading CSIT only through views."""
    if channels.n != 4:
        raise ValueError("the schemes span exactly four slots")
    expected = classify_case(pattern)
    if (expected.case, expected.mirrored) != (case.case, case.mirrored):
        raise ValueError(f"case {case} does not match pattern ({pattern})")
    if case.roles is None:
        case = expected
    log: list[AccessRecord] = []

    def reader_for(t, j):
        view = CsitView(channels, pattern, t, j, log)
        return view.read

    G = build_precoders(case, reader_for, channels.batch_shape)
    s = symbols.as_array()
    x = np.einsum("...tjs,...s->...jt", G, s)
    return TransmitBlock(x, G, pattern, case, log)


@dataclass
class ReceivedSignals:
    """Observations ``y[..., i-1, t-1]`` and the precoding that produced them.

    Receivers hold global CSI and know the scheme, so the precoders are part
    of what they can reconstruct; carrying them avoids recomputing them.
    """

    y: np.ndarray
    noise_power: float
    precoders: np.ndarray
    case: SchemeCase

    def __post_init__(self):
        if not np.all(np.isfinite(self.y)):
            raise ValueError("received samples must be finite")


def transmit(block: TransmitBlock, channels: ChannelRealization, noise_power: float = 0.0,
             seed: SeedLike = None) -> ReceivedSignals:
    """Pass a block through the channel: y_i(t) = sum_j h_ij(t) x_j(t) + n_i(t)."""
    if noise_power < 0:
        raise ValueError("noise power must be nonnegative")
    if block.x.shape[-1] != channels.n:
        raise ValueError("block and channels cover different horizons")
    y = np.einsum("...ijt,...jt->...it", channels.h, block.x)
    if noise_power > 0:
        y = y + complex_normal(_as_generator(seed), y.shape, noise_power)
    return ReceivedSignals(y, float(noise_power), block.precoders, block.case)
