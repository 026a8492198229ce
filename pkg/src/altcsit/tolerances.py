"""Numerical tolerances shared by the decoder, the metrics and the CLI."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Single record of every numerical threshold used by the library.

    Attributes
    ----------
    decode : float
        Maximum relative residual (and relative symbol error) for a receiver
        to count as having decoded its symbols.
    cancel : float
        Maximum magnitude of an unintended-symbol coefficient in a combined
        equation, relative to the largest coefficient of that equation.
    cond_limit : float
        Condition number above which an effective system is singular.
    precoder_clip : float
        Largest precoder magnitude accepted in the rate-sweep path.
    channel_floor : float
        Channel draws with smaller magnitude are resampled.
    noise_reg : float
        Diagonal loading added to a singular noise covariance.
    rank_rtol : float
        Singular values below this fraction of the largest one count as
        zero in the identifiability oracle.
    """

    decode: float = 1e-8
    cancel: float = 1e-10
    cond_limit: float = 1e12
    precoder_clip: float = 1e6
    channel_floor: float = 1e-12
    noise_reg: float = 1e-12
    rank_rtol: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()
