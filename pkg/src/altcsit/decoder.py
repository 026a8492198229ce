"""Receiver-side interference cancellation and symbol recovery.

The primary receiver forms three interference-free equations in
``(u1_1, u1_2, u2)``; the other receiver forms two in ``(v1, v2)``.  Each
combined equation is a weight vector over the receiver's four raw
observations, so the effective matrix, right-hand side and noise covariance
all follow from one weight matrix ``W``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelRealization, CsitPattern
from .scheme import (Case, ReceivedSignals, SchemeCase, TransmitBlock, U_SYMBOLS,
                     V_SYMBOLS, classify_case)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "SingularSystem", "EffectiveSystem", "DecodeReport", "combining_weights",
    "observation_matrix", "combine", "solve", "oracle_identifiability",
]


class SingularSystem(ArithmeticError):
    """An effective system's condition number exceeds the limit."""

    def __init__(self, message: str, trials: Sequence[int] = ()):
        super().__init__(message)
        self.trials = list(trials)


def observation_matrix(h: np.ndarray, precoders: np.ndarray) -> np.ndarray:
    """``M[..., i-1, t-1, s]``: how symbol ``s`` reaches receiver ``i`` in slot ``t``."""
    return np.einsum("...ijt,...tjs->...its", h, precoders)


def combining_weights(case: SchemeCase, channels: ChannelRealization):
    """Weights ``(W_u, W_v)`` over the raw observations of each receiver.

    ``W_u`` (3 x 4) acts on the primary receiver, ``W_v`` (2 x 4) on the
    other one.  Rows are ordered by the slot carrying their desired content.
    """
    roles = case.roles
    q = roles.other
    hc = channels.coefficient
    batch = channels.batch_shape
    n = roles.n
    a, rv = roles.v_create, roles.v_resurrect
    b1, b2 = roles.u_create
    ru = roles.u_resurrect
    overlapped = a if len(roles.components(a)) > 1 else rv
    pure = rv if overlapped == a else a

    u_slots = sorted({b1, b2, ru})
    W_u = np.zeros(batch + (3, n), dtype=np.complex128)
    for row, t in enumerate(u_slots):
        W_u[..., row, t - 1] = 1.0
        if t == overlapped:
            W_u[..., row, pure - 1] = -1.0

    sign = -1.0 if case.case is Case.CASE3 else 1.0
    cancel = np.zeros(batch + (n,), dtype=np.complex128)
    cancel[..., b1 - 1] = sign * hc(q, 2, b2)
    cancel[..., b2 - 1] = -sign * hc(q, 2, b1)
    cancel[..., ru - 1] = -1.0 / hc(q, 1, ru)
    if case.case is Case.CASE2:
        # anchored on the resurrection slot: y(ru) - h_q1(ru) * (...)
        cancel = cancel * (-hc(q, 1, ru))[..., None]
    single = np.zeros(batch + (n,), dtype=np.complex128)
    single[..., pure - 1] = 1.0
    rows = [cancel, single] if overlapped < pure else [single, cancel]
    W_v = np.stack(rows, axis=-2)
    return W_u, W_v


@dataclass
class EffectiveSystem:
    """Interference-free systems of both receivers.

    ``a_u @ (u1_1, u1_2, u2) = b_u`` holds at the primary receiver and
    ``a_v @ (v1, v2) = b_v`` at the other, each up to combined noise with
    covariance ``k_u`` / ``k_v``.  ``leak_u`` and ``leak_v`` hold the
    residual coefficients on unintended symbols, zero up to rounding.
    """

    primary: int
    a_u: np.ndarray
    b_u: np.ndarray
    k_u: np.ndarray
    leak_u: np.ndarray
    w_u: np.ndarray
    a_v: np.ndarray
    b_v: np.ndarray
    k_v: np.ndarray
    leak_v: np.ndarray
    w_v: np.ndarray
    noise_power: float

    def leakage_ratio(self) -> np.ndarray:
        """Largest |unintended coefficient| / |largest coefficient| over all equations."""
        ratios = []
        for a, leak in ((self.a_u, self.leak_u), (self.a_v, self.leak_v)):
            full = np.concatenate([np.abs(a), np.abs(leak)], axis=-1)
            ratios.append(np.abs(leak).max(axis=-1) / full.max(axis=-1))
        return np.maximum(ratios[0].max(axis=-1), ratios[1].max(axis=-1))

    def scaled(self, factor) -> "EffectiveSystem":
        """Same system with every symbol coefficient multiplied by ``factor``."""
        f = np.asarray(factor)[..., None, None]
        return EffectiveSystem(self.primary, self.a_u * f, self.b_u, self.k_u, self.leak_u * f,
                               self.w_u, self.a_v * f, self.b_v, self.k_v, self.leak_v * f,
                               self.w_v, self.noise_power)


def combine(case: SchemeCase, channels: ChannelRealization,
            received: ReceivedSignals) -> EffectiveSystem:
    """Cancel interference at both receivers and package the linear systems."""
    if case.roles is None:
        raise ValueError("case carries no slot-role map; obtain it from classify_case")
    p, q = case.roles.primary, case.roles.other
    W_u, W_v = combining_weights(case, channels)
    M = observation_matrix(channels.h, received.precoders)
    C_u = W_u @ M[..., p - 1, :, :]
    C_v = W_v @ M[..., q - 1, :, :]
    y = received.y
    sigma2 = received.noise_power

    def cov(W):
        return sigma2 * (W @ np.conj(np.swapaxes(W, -1, -2)))

    return EffectiveSystem(
        primary=p,
        a_u=C_u[..., list(U_SYMBOLS)], b_u=np.einsum("...et,...t->...e", W_u, y[..., p - 1, :]),
        k_u=cov(W_u), leak_u=C_u[..., list(V_SYMBOLS)], w_u=W_u,
        a_v=C_v[..., list(V_SYMBOLS)], b_v=np.einsum("...et,...t->...e", W_v, y[..., q - 1, :]),
        k_v=cov(W_v), leak_v=C_v[..., list(U_SYMBOLS)], w_v=W_v,
        noise_power=sigma2,
    )


@dataclass
class DecodeReport:
    """Outcome of solving both receivers' systems (arrays carry the batch)."""

    estimates: np.ndarray
    residual_u: np.ndarray
    residual_v: np.ndarray
    cond_u: np.ndarray
    cond_v: np.ndarray
    singular: np.ndarray
    error_u: Optional[np.ndarray] = None
    error_v: Optional[np.ndarray] = None
    audit: dict = field(default_factory=dict)
    resample_count: int = 0

    def attach_truth(self, symbols: np.ndarray) -> "DecodeReport":
        """Record relative symbol errors against the transmitted symbols."""
        self.error_u = _relative_error(self.estimates[..., list(U_SYMBOLS)],
                                       symbols[..., list(U_SYMBOLS)])
        self.error_v = _relative_error(self.estimates[..., list(V_SYMBOLS)],
                                       symbols[..., list(V_SYMBOLS)])
        return self

    def receiver_ok(self, tol: Tolerances = DEFAULT_TOLERANCES):
        """Per-receiver success flags ``(u_ok, v_ok)``."""
        ok_u = ~self.singular & (self.residual_u < tol.decode)
        ok_v = ~self.singular & (self.residual_v < tol.decode)
        if self.error_u is not None:
            ok_u &= self.error_u < tol.decode
            ok_v &= self.error_v < tol.decode
        return ok_u, ok_v


def _relative_error(est, true):
    num = np.linalg.norm(est - true, axis=-1)
    den = np.linalg.norm(true, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), num)


def _solve_one(A, b, cond_limit):
    # Row equilibration: equation scaling is arbitrary, so the reported
    # condition number is that of the row-normalized matrix.
    scale = np.abs(A).max(axis=-1, keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    As, bs = A / scale, b / scale[..., 0]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        cond = np.linalg.cond(As)
    cond = np.where(np.isfinite(cond), cond, np.inf)
    singular = cond > cond_limit
    eye = np.broadcast_to(np.eye(A.shape[-1]), As.shape)
    safe = np.where(singular[..., None, None], eye, As)
    est = np.linalg.solve(safe, bs[..., None])[..., 0]
    est = np.where(singular[..., None], np.nan + 0j, est)
    res = _relative_error(np.einsum("...ij,...j->...i", A, est), b)
    res = np.where(singular, np.inf, res)
    return est, res, cond, singular


def solve(system: EffectiveSystem, tolerances: Tolerances = DEFAULT_TOLERANCES,
          strict: bool = True) -> DecodeReport:
    """Solve the 3x3 and 2x2 systems by LU with partial pivoting.

    Raises :class:`SingularSystem` when any condition number exceeds
    ``tolerances.cond_limit`` and ``strict`` is set; otherwise singular
    trials are flagged in the report with NaN estimates.
    """
    est_u, res_u, cond_u, sing_u = _solve_one(system.a_u, system.b_u, tolerances.cond_limit)
    est_v, res_v, cond_v, sing_v = _solve_one(system.a_v, system.b_v, tolerances.cond_limit)
    singular = sing_u | sing_v
    if strict and np.any(singular):
        idx = np.flatnonzero(np.atleast_1d(singular))
        raise SingularSystem(f"condition number above {tolerances.cond_limit:g} "
                             f"in {idx.size} block(s)", idx.tolist())
    estimates = np.concatenate([est_u, est_v], axis=-1)
    return DecodeReport(estimates, res_u, res_v, cond_u, cond_v, singular)


def _rank(X: np.ndarray, rtol: float) -> np.ndarray:
    if X.shape[-1] == 0 or X.shape[-2] == 0:
        return np.zeros(X.shape[:-2], dtype=int)
    s = np.linalg.svd(X, compute_uv=False)
    top = s[..., :1]
    return np.sum((s > rtol * top) & (top > 0), axis=-1)


def oracle_identifiability(pattern: CsitPattern, channels: ChannelRealization,
                           block: TransmitBlock, slots: Optional[Sequence[int]] = None,
                           rtol: float = DEFAULT_TOLERANCES.rank_rtol):
    """Brute-force count of desired dimensions each receiver can isolate.

    For receiver ``i`` the raw observations are ``M_i @ symbols`` with
    ``M_i`` of size (slots x 5).  The number of desired-symbol dimensions
    that survive after projecting out the interference columns is
    ``rank(M_i) - rank(M_i[:, interference])``.  ``slots`` restricts the
    observations (e.g. ``(1, 2, 3)`` drops slot 4).

    Returns ``(rank1, rank2)`` for receivers 1 and 2 (arrays when batched).
    """
    case = block.case if block.case.roles is not None else classify_case(pattern)
    primary = case.roles.primary
    M = observation_matrix(channels.h, block.precoders)
    if slots is not None:
        M = M[..., :, [t - 1 for t in slots], :]
    norms = np.linalg.norm(M, axis=-1, keepdims=True)
    M = M / np.where(norms > 0, norms, 1.0)
    ranks = []
    for i in (1, 2):
        Mi = M[..., i - 1, :, :]
        interf = list(V_SYMBOLS) if i == primary else list(U_SYMBOLS)
        ranks.append(_rank(Mi, rtol) - _rank(Mi[..., interf], rtol))
    if ranks[0].ndim == 0:
        return int(ranks[0]), int(ranks[1])
    return ranks[0], ranks[1]
