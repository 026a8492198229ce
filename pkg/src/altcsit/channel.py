"""Channel realizations, CSIT states and the causality-enforcing CSIT view.

Receivers and transmitters are indexed 1 and 2, slots 1..n, matching the
usual ``h_ij(t)`` notation (gain from transmitter ``j`` to receiver ``i`` in
slot ``t``).  A :class:`ChannelRealization` may carry a leading batch
dimension so that many independent blocks are processed at once; CSIT
permissions never depend on the draw, so a single view serves the batch.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Optional, Union

import numpy as np

from .tolerances import DEFAULT_TOLERANCES

__all__ = [
    "CsitState", "SlotCsit", "CsitPattern", "LambdaDistribution",
    "ChannelRealization", "CsitView", "AccessRecord", "ForbiddenAccess",
    "draw_channels", "read_coefficient", "lambda_of", "complex_normal",
]

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


class ForbiddenAccess(RuntimeError):
    """A transmitter tried to read a coefficient its CSIT does not cover."""


class CsitState(str, Enum):
    P = "P"
    D = "D"
    N = "N"


@dataclass(frozen=True)
class SlotCsit:
    """CSIT state of the channels to receiver 1 (``s1``) and receiver 2."""

    s1: CsitState
    s2: CsitState

    def __post_init__(self):
        object.__setattr__(self, "s1", CsitState(self.s1))
        object.__setattr__(self, "s2", CsitState(self.s2))

    @classmethod
    def parse(cls, token: str) -> "SlotCsit":
        token = token.strip().upper()
        if len(token) != 2 or any(c not in "PDN" for c in token):
            raise ValueError(f"invalid slot token {token!r}; expected two of P/D/N")
        return cls(CsitState(token[0]), CsitState(token[1]))

    def state(self, receiver: int) -> CsitState:
        if receiver == 1:
            return self.s1
        if receiver == 2:
            return self.s2
        raise IndexError(f"receiver index must be 1 or 2, got {receiver}")

    def swapped(self) -> "SlotCsit":
        return SlotCsit(self.s2, self.s1)

    def __str__(self) -> str:
        return self.s1.value + self.s2.value


@dataclass(frozen=True)
class CsitPattern:
    """Sequence of per-slot CSIT states, written ``(DD,ND,PN,NN)``."""

    slots: tuple[SlotCsit, ...]

    def __post_init__(self):
        slots = tuple(s if isinstance(s, SlotCsit) else SlotCsit.parse(s)
                      for s in self.slots)
        if not slots:
            raise ValueError("a CSIT pattern needs at least one slot")
        object.__setattr__(self, "slots", slots)

    @classmethod
    def parse(cls, text: str) -> "CsitPattern":
        """Parse ``"DD,ND,PN,NN"`` (parentheses and spaces are ignored)."""
        body = text.strip().strip("()")
        return cls(tuple(SlotCsit.parse(tok) for tok in body.split(",")))

    @classmethod
    def from_receivers(cls, r1: str, r2: str) -> "CsitPattern":
        """Build a pattern from per-receiver state strings, e.g. ``"DNPN", "DDNN"``."""
        if len(r1) != len(r2):
            raise ValueError("per-receiver sequences must have equal length")
        return cls(tuple(SlotCsit(CsitState(a), CsitState(b)) for a, b in zip(r1, r2)))

    @property
    def n(self) -> int:
        return len(self.slots)

    def state(self, receiver: int, slot: int) -> CsitState:
        if not 1 <= slot <= self.n:
            raise IndexError(f"slot {slot} outside 1..{self.n}")
        return self.slots[slot - 1].state(receiver)

    def receiver_states(self, receiver: int) -> tuple[CsitState, ...]:
        return tuple(s.state(receiver) for s in self.slots)

    def __str__(self) -> str:
        return ",".join(str(s) for s in self.slots)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class LambdaDistribution:
    """Fractions of time spent in the P, D and N states (exact rationals)."""

    lambda_p: Fraction
    lambda_d: Fraction
    lambda_n: Fraction

    def __post_init__(self):
        vals = [Fraction(v) for v in (self.lambda_p, self.lambda_d, self.lambda_n)]
        if any(v < 0 or v > 1 for v in vals):
            raise ValueError(f"time fractions must lie in [0, 1], got {vals}")
        if sum(vals) != 1:
            raise ValueError(f"time fractions must sum to 1, got {sum(vals)}")
        for name, v in zip(("lambda_p", "lambda_d", "lambda_n"), vals):
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.lambda_p, self.lambda_d, self.lambda_n)

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.as_tuple()) + ")"


def lambda_of(pattern: CsitPattern) -> LambdaDistribution:
    """Fraction of (slot, receiver) pairs in each CSIT state."""
    counts = Counter(s for slot in pattern.slots for s in (slot.s1, slot.s2))
    total = 2 * pattern.n
    return LambdaDistribution(Fraction(counts[CsitState.P], total),
                              Fraction(counts[CsitState.D], total),
                              Fraction(counts[CsitState.N], total))


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class ChannelRealization:
    """Channel gains ``h[..., i-1, j-1, t-1]`` for one block (or a batch).

    The array is made read-only on construction.
    """

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.complex128)
        if h.ndim < 3 or h.shape[-3:-1] != (2, 2):
            raise ValueError(f"expected shape (..., 2, 2, n), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel coefficients must be finite")
        if np.any(h == 0):
            raise ValueError("channel coefficients must be nonzero")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.h.shape[-1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.h.shape[:-3]

    def coefficient(self, i: int, j: int, t: int) -> Union[complex, np.ndarray]:
        """``h_ij(t)``, 1-indexed; an array over the batch when batched."""
        if i not in (1, 2) or j not in (1, 2) or not 1 <= t <= self.n:
            raise IndexError(f"h_{i}{j}({t}) outside the realization")
        return self.h[..., i - 1, j - 1, t - 1]

    def __getitem__(self, index) -> "ChannelRealization":
        if not self.batch_shape:
            raise TypeError("unbatched realization cannot be indexed")
        return ChannelRealization(self.h[index])

    def swap_receivers(self) -> "ChannelRealization":
        """Realization with the roles of receivers 1 and 2 exchanged."""
        return ChannelRealization(self.h[..., ::-1, :, :])


def _as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_channels(seed: SeedLike, n: int = 4, trials: Optional[int] = None,
                  floor: float = DEFAULT_TOLERANCES.channel_floor) -> ChannelRealization:
    """Draw i.i.d. CN(0, 1) channel gains for one block or ``trials`` blocks.

    Gains whose magnitude falls below ``floor`` are redrawn from the same
    stream, so the result is a deterministic function of ``seed``.
    """
    if n < 1:
        raise ValueError("slot count must be at least 1")
    rng = _as_generator(seed)
    shape = (2, 2, n) if trials is None else (trials, 2, 2, n)
    h = complex_normal(rng, shape)
    bad = np.abs(h) < floor
    while bad.any():
        h[bad] = complex_normal(rng, int(bad.sum()))
        bad = np.abs(h) < floor
    return ChannelRealization(h)


class AccessRecord(NamedTuple):
    slot: int
    transmitter: int
    receiver: int
    link: int
    tau: int
    allowed: bool


@dataclass
class CsitView:
    """What transmitter ``transmitter`` knows about the channels at ``slot``.

    A coefficient ``h_i*(tau)`` is readable when the channels to receiver
    ``i`` are in state P with ``tau <= slot``, or in state D with
    ``tau < slot``.  Knowledge is per receiver: whenever the state permits,
    both ``h_i1(tau)`` and ``h_i2(tau)`` are readable.  Every attempt,
    allowed or not, lands in ``log``.
    """

    channels: ChannelRealization
    pattern: CsitPattern
    slot: int
    transmitter: int
    log: list[AccessRecord] = field(default_factory=list)

    def __post_init__(self):
        if self.channels.n != self.pattern.n:
            raise ValueError("pattern and channels cover different horizons")
        if not 1 <= self.slot <= self.pattern.n:
            raise ValueError(f"slot {self.slot} outside 1..{self.pattern.n}")
        if self.transmitter not in (1, 2):
            raise ValueError("transmitter index must be 1 or 2")

    def permitted(self, receiver: int, tau: int) -> bool:
        state = self.pattern.state(receiver, tau)
        if state is CsitState.P:
            return tau <= self.slot
        if state is CsitState.D:
            return tau < self.slot
        return False

    def read(self, receiver: int, tau: int, link: Optional[int] = None):
        """Return ``h_{receiver,link}(tau)``; ``link`` defaults to this transmitter."""
        link = self.transmitter if link is None else link
        if not 1 <= tau <= self.pattern.n:
            raise IndexError(f"slot {tau} outside 1..{self.pattern.n}")
        ok = self.permitted(receiver, tau)
        self.log.append(AccessRecord(self.slot, self.transmitter, receiver, link, tau, ok))
        if not ok:
            state = self.pattern.state(receiver, tau).value
            raise ForbiddenAccess(
                f"T{self.transmitter} at slot {self.slot} read h_{receiver}{link}({tau}) "
                f"with CSIT state {state}")
        return self.channels.coefficient(receiver, link, tau)


def read_coefficient(view: CsitView, i: int, tau: int, link: Optional[int] = None):
    """Functional alias of :meth:`CsitView.read`."""
    return view.read(i, tau, link)
