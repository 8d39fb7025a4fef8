"""Operational encoder and iterated-function-system decoder.

Each transmitter keeps an unsigned state ``x_n`` and updates it from its own
fed-back channel output:

    x_{n+1} = (x_n - b_n s_n y_n) / beta_n

with ``s_n = sgn(rho_n)`` at transmitter 1 and ``s_n = sgn(a)`` at
transmitter 2. The emitted symbol is ``s_{n+1} x_{n+1}``. Every update is an
invertible affine map, so the receiver, which sees the same ``y_n``, can pull
any interval for ``x_{n+1}`` back to an interval for ``x_1`` by composing the
inverse maps ``w_n(x) = beta_n x + b_n s_n y_n``.

All functions work elementwise on numpy arrays, so a batch of independent
trials can share one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bootstrap import Schedule, sgn
from .exceptions import DomainError, ScheduleError
from .gauss_math import log2_normal_mass, message_to_signal, std_normal_cdf

__all__ = [
    "EncoderState",
    "DecoderState",
    "ThetaInterval",
    "encoder_init",
    "encoder_step",
    "emitted_symbol",
    "channel_step",
    "decoder_init",
    "decoder_update",
    "decoder_map",
    "decode_interval",
    "geometric_half_width",
]

_TX = ("tx1", "tx2")
_RX = ("rx1", "rx2")


@dataclass(frozen=True)
class EncoderState:
    role: str
    x: float | np.ndarray
    n: int = 1


@dataclass(frozen=True)
class DecoderState:
    """Composite map ``T_n(s) = slope * s + offset`` after ``n`` observations."""

    role: str
    slope: float = 1.0
    offset: float | np.ndarray = 0.0
    n: int = 0


@dataclass(frozen=True)
class ThetaInterval:
    """Decoded message interval.

    ``lo`` and ``hi`` are the endpoints in (0, 1). Once the interval is
    narrower than the double spacing near the message they coincide, so
    ``log2_width`` (computed directly from the x-domain interval) is the
    authoritative size.
    """

    lo: float | np.ndarray
    hi: float | np.ndarray
    log2_width: float | np.ndarray
    x_center: float | np.ndarray
    x_half_width: float

    def contains(self, theta) -> bool | np.ndarray:
        return (self.lo < theta) & (theta < self.hi)


def _line_sign(role: str, n: int, sched: Schedule) -> float:
    if role in ("tx1", "rx1"):
        return sched.sign_rho(n)
    return sgn(sched.ch.a)


def emitted_symbol(st: EncoderState, sched: Schedule):
    """Channel input for the current step: the state times its sign factor."""
    return st.x * _line_sign(st.role, st.n, sched)


def encoder_init(theta, sched: Schedule, role: str) -> EncoderState:
    """Map the message point to ``x_1 = F^{-1}(theta)`` with ``X ~ N(0, P1)``."""
    if role not in _TX:
        raise DomainError(f"encoder role must be one of {_TX}, got {role!r}")
    return EncoderState(role, message_to_signal(theta, sched.P1), 1)


def encoder_step(st: EncoderState, y, sched: Schedule):
    """Advance one step using this transmitter's own fed-back output ``y``.

    Returns
    -------
    (EncoderState, tx)
        The state at step ``n + 1`` and the symbol it emits.
    """
    beta = sched.beta_at(st.n)
    if beta == 0:
        raise ScheduleError(f"beta_{st.n} = 0")
    c = sched.b_at(st.n) * _line_sign(st.role, st.n, sched) * y
    new = EncoderState(st.role, (st.x - c) / beta, st.n + 1)
    return new, emitted_symbol(new, sched)


def channel_step(tx1, tx2, a: float, z1, z2):
    """Two-user interference channel acting on the emitted symbols."""
    return tx1 + a * tx2 + z1, tx2 + a * tx1 + z2


def decoder_init(role: str) -> DecoderState:
    if role not in _RX:
        raise DomainError(f"decoder role must be one of {_RX}, got {role!r}")
    return DecoderState(role)


def decoder_update(st: DecoderState, y, sched: Schedule) -> DecoderState:
    """Compose ``T_{n+1} = T_n o w_{n+1}`` for the new observation ``y``.

    Only the composite slope and offset are kept; affine composition is
    associative, so this equals the full left-to-right composition.
    """
    n = st.n + 1
    c = sched.b_at(n) * _line_sign(st.role, n, sched) * y
    return replace(st, slope=st.slope * sched.beta_at(n), offset=st.slope * c + st.offset, n=n)


def decoder_map(st: DecoderState, s):
    """Evaluate ``T_n(s)``."""
    return st.slope * s + st.offset


def decode_interval(st: DecoderState, half_width: float, sched: Schedule) -> ThetaInterval:
    """Pull ``(-h, h)`` back through ``T_n`` and map it into message space.

    The x-interval ``(T_n(-h), T_n(h))`` is transformed by the CDF of
    ``N(0, P1)``; ``T_n`` is increasing because every ``beta_k > 0``.
    """
    if not half_width > 0:
        raise DomainError("half_width must be positive")
    sigma = math.sqrt(sched.P1)
    hw = st.slope * half_width
    center = np.asarray(st.offset, dtype=float)
    lo = std_normal_cdf((center - hw) / sigma)
    hi = std_normal_cdf((center + hw) / sigma)
    if hw > 0:
        log2w = log2_normal_mass(center / sigma, hw / sigma)
    else:
        log2w = np.full(center.shape, -np.inf) if center.ndim else -math.inf
    if center.ndim == 0:
        center = float(center)
    return ThetaInterval(lo, hi, log2w, center, hw)


def geometric_half_width(n: int, P: float, rate_sym: float, target_rate: float) -> float:
    """Decoding half-width ``sqrt(P) * 2^(n (R_sym - R) / 2)`` for step ``n``.

    Grows without bound (so the miss probability vanishes) but slower than
    ``2^(n (R_sym - R))`` (so the decoded rate stays above ``R``).
    """
    return math.sqrt(P) * 2.0 ** (n * (rate_sym - target_rate) / 2.0)
