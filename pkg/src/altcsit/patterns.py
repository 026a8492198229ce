"""Enumeration and rule-based classification of four-slot CSIT patterns.

The three synergy conditions are checked in order:

1. no delayed CSIT in the last slot (it would arrive too late to be used);
2. delayed CSIT on some receiver is followed by perfect CSIT on that same
   receiver, which is what a distributed resurrection needs;
3. no blind creation: the slot-role map must place every creation on a
   delayed-CSIT slot and leave no ``NN`` slot outside the one-transmitter
   resurrection slot.

Condition 3 is evaluated through :func:`altcsit.scheme.derive_roles`, the
same derivation the transmit engine runs on, so the rules and the engine
cannot drift apart.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .channel import CsitPattern, CsitState, lambda_of
from .scheme import SchemeCase, derive_roles

__all__ = [
    "PerReceiverState", "ClassificationResult", "TARGET_LAMBDA",
    "minimum_states_r1", "minimum_states_r2", "enumerate_candidates",
    "classify", "table1", "dissociative",
]

PerReceiverState = tuple[CsitState, ...]

TARGET_LAMBDA = (Fraction(1, 8), Fraction(3, 8), Fraction(1, 2))

P, D, N = CsitState.P, CsitState.D, CsitState.N


def minimum_states_r1(n: int = 4) -> list[PerReceiverState]:
    """Sequences with one D strictly before one P and no D in the last slot.

    Ordered by descending P slot, then descending D slot.
    """
    out = []
    for p_slot in range(n, 0, -1):
        for d_slot in range(min(p_slot - 1, n - 1), 0, -1):
            seq = [N] * n
            seq[d_slot - 1], seq[p_slot - 1] = D, P
            out.append(tuple(seq))
    return out


def minimum_states_r2(n: int = 4) -> list[PerReceiverState]:
    """Sequences with two D, no P, and no D in the last slot."""
    out = []
    for d1, d2 in itertools.combinations(range(1, n), 2):
        seq = [N] * n
        seq[d1 - 1] = seq[d2 - 1] = D
        out.append(tuple(seq))
    return out


def enumerate_candidates() -> list[CsitPattern]:
    """All pairings of the minimum per-receiver states (18 patterns)."""
    return [CsitPattern.from_receivers("".join(s.value for s in r1), "".join(s.value for s in r2))
            for r1 in minimum_states_r1() for r2 in minimum_states_r2()]


@dataclass(frozen=True)
class ClassificationResult:
    """Verdict for one pattern.

    ``failed_condition`` is 1, 2 or 3 for a dissociative pattern, and None
    both for synergistic ones and for patterns that meet every condition
    but lie outside Lambda(1/8, 3/8, 1/2), where synergy is not certified.
    """

    pattern: CsitPattern
    synergistic: bool
    case: Optional[SchemeCase] = None
    failed_condition: Optional[int] = None
    detail: str = ""

    @property
    def verdict(self) -> str:
        return "synergistic" if self.synergistic else "dissociative"


def _delayed_then_perfect(states: PerReceiverState) -> bool:
    seen_d = False
    for s in states:
        if s is D:
            seen_d = True
        elif s is P and seen_d:
            return True
    return False


def classify(pattern: CsitPattern) -> ClassificationResult:
    """Apply the three synergy conditions to a four-slot pattern."""
    if pattern.n != 4:
        raise ValueError(f"classification covers four-slot patterns, got {pattern.n}")
    last = pattern.slots[-1]
    if D in (last.s1, last.s2):
        return ClassificationResult(pattern, False, failed_condition=1,
                                    detail="delayed CSIT in the last slot")
    has_d = any(D in (s.s1, s.s2) for s in pattern.slots)
    if has_d and not any(_delayed_then_perfect(pattern.receiver_states(i)) for i in (1, 2)):
        return ClassificationResult(pattern, False, failed_condition=2,
                                    detail="no receiver has delayed CSIT followed by perfect CSIT")
    roles = derive_roles(pattern, 1) + derive_roles(pattern, 2)
    if not roles:
        nn = [t for t, s in enumerate(pattern.slots, 1) if s.s1 is N and s.s2 is N]
        detail = "creation phase cannot avoid blind slots"
        if nn:
            detail += "; NN at slot(s) " + ",".join(map(str, nn))
        return ClassificationResult(pattern, False, failed_condition=3, detail=detail)
    if lambda_of(pattern).as_tuple() != TARGET_LAMBDA:
        return ClassificationResult(pattern, False, detail="outside Lambda(1/8,3/8,1/2); "
                                    "synergy not certified")
    if len(roles) != 1:
        raise RuntimeError(f"ambiguous slot-role map for ({pattern}): {roles}")
    r = roles[0]
    return ClassificationResult(pattern, True, SchemeCase(r.case, r.mirrored, r))


def table1() -> list[tuple[CsitPattern, SchemeCase]]:
    """Synergistic candidates with their case labels, in enumeration order."""
    out = []
    for p in enumerate_candidates():
        res = classify(p)
        if res.synergistic:
            out.append((p, res.case))
    return out


def dissociative() -> list[ClassificationResult]:
    """Candidates rejected by the synergy conditions."""
    return [r for r in map(classify, enumerate_candidates()) if not r.synergistic]
