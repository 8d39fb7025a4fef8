"""First-step initialisation and the per-step coefficient schedule.

Step 1 sends independent Gaussian symbols (correlation 0) at power ``P1``.
The bootstrap coefficients ``(P1, b1, beta1)`` are chosen so that after one
update the transmitters sit exactly on the steady state ``P_2 = P``,
``rho_2 = rho``; from then on a constant ``(b, beta)`` keeps
``P_n = P`` and flips the sign of the correlation every step.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, InfeasibleError, ScheduleError
from .rate_theory import ChannelParams, FixedPointSolution, best_fixed_point, rho_max

__all__ = [
    "BootstrapParams",
    "Schedule",
    "bootstrap_params",
    "bootstrap_residuals",
    "advance_moments",
    "build_schedule",
    "sgn",
]

_DRIFT_TOL = 1e-6


def sgn(x):
    """Sign with ``sgn(0) = +1``."""
    if np.ndim(x) == 0:
        return 1.0 if x >= 0 else -1.0
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


@dataclass(frozen=True)
class BootstrapParams:
    P1: float
    b1: float
    beta1: float


def bootstrap_residuals(bp: BootstrapParams, rho: float, ch: ChannelParams):
    """Residuals of the two first-step moment conditions.

    Returns ``(P2 * rho2 - P * rho, P2 - P)`` where ``P2, rho2`` are the
    moments produced by one update from ``(P1, rho_1 = 0)``.
    """
    a, P = ch.abs_a, ch.P
    P1, b1, beta2 = bp.P1, bp.b1, bp.beta1 ** 2
    r_corr = P1 / beta2 * 2.0 * a * (b1 * b1 - b1) - P * rho
    r_pow = (P1 - 2.0 * b1 * P1 + b1 * b1 * (1.0 + P1 + a * a * P1)) / beta2 - P
    return r_corr, r_pow


def bootstrap_params(rho: float, ch: ChannelParams) -> BootstrapParams:
    """Choose ``(P1, b1, beta1)`` that land the second step on ``(P, rho)``.

    Cases:

    * ``rho = 0``: ``(P, 0, 1)``, i.e. step 1 is already the steady state.
    * ``rho != |a|``: ``P1 = rho^2 / (a^2 (1 - rho^2))`` makes the quadratic
      in ``b1`` a double root, ``b1 = rho / (rho - |a|)``.
    * ``rho = |a| < 1``: ``P1 = 2 / (1 - a^2)``; the quadratic has roots
      ``+-sqrt(P1)`` and the negative one is taken.

    ``beta1`` then follows from the correlation condition.

    Raises
    ------
    InfeasibleError
        ``rho`` outside ``[0, rho_max]`` or ``rho = |a| >= 1``.
    DomainError
        ``rho != 0`` on the degraded channel ``a = 0``, or ``rho`` so small
        that ``P1`` underflows.
    ScheduleError
        ``beta1^2 <= 0``; cannot happen for valid input.
    """
    a, P = ch.abs_a, ch.P
    if rho == 0:
        return BootstrapParams(P, 0.0, 1.0)
    if a == 0:
        raise DomainError("a = 0 admits only rho = 0")
    if not 0 < rho <= rho_max(ch):
        raise InfeasibleError(f"rho={rho} outside [0, rho_max={rho_max(ch)}]")

    if rho == a:
        if a >= 1:
            raise InfeasibleError("rho = |a| needs |a| < 1")
        P1 = 2.0 / (1.0 - a * a)
        quad = (1.0 + P1 + a * a * P1) * rho - 2.0 * a * P1
        b1 = -math.sqrt(-P1 * rho / quad)
        beta1_sq = 2.0 * a * P1 * (b1 * b1 - b1) / (P * rho)
    else:
        P1 = rho * rho / (a * a * (1.0 - rho) * (1.0 + rho))
        if P1 < sys.float_info.min:
            raise DomainError(f"rho={rho} is too small: bootstrap power P1 underflows")
        # (rho-|a|) P1 / ((1+P1+a^2 P1) rho - 2|a| P1), simplified; the
        # unsimplified denominator cancels badly near rho = |a|
        b1 = rho / (rho - a)
        beta1_sq = 2.0 * rho * rho / ((1.0 - rho) * (1.0 + rho) * (rho - a) ** 2 * P)

    if not beta1_sq > 0:
        raise ScheduleError(f"bootstrap produced beta1^2 = {beta1_sq} <= 0")
    return BootstrapParams(P1, b1, math.sqrt(beta1_sq))


def advance_moments(P_n, rho_n, b_n, beta_n, a):
    """One step of the exact moment recursions.

    Maps ``(P_n, rho_n)`` (signed correlation) to ``(P_{n+1}, rho_{n+1})``
    for the update ``x <- (x - b sgn(.) y) / beta``.
    """
    a = abs(a)
    r, s = abs(rho_n), sgn(rho_n)
    beta2 = beta_n * beta_n
    P_next = (P_n - 2.0 * P_n * b_n * (1.0 + a * r)
              + b_n * b_n * (1.0 + P_n + a * a * P_n + 2.0 * a * r * P_n)) / beta2
    cross = P_n * s * (r - 2.0 * b_n * (r + a)
                       + b_n * b_n * (r * (1.0 + a * a) + 2.0 * a)) / beta2
    return P_next, cross / P_next


@dataclass(frozen=True)
class Schedule:
    """Per-step coefficients for steps ``n = 1 .. n_max``.

    Arrays are 0-based (entry ``n - 1`` belongs to step ``n``); use the
    ``*_at`` accessors for 1-based step indices.
    """

    ch: ChannelParams
    rho: float
    bootstrap: BootstrapParams
    steady: FixedPointSolution
    n_max: int
    power: np.ndarray = field(repr=False)
    rho_n: np.ndarray = field(repr=False)
    b_n: np.ndarray = field(repr=False)
    beta_n: np.ndarray = field(repr=False)

    @property
    def P1(self) -> float:
        return self.bootstrap.P1

    @property
    def b1(self) -> float:
        return self.bootstrap.b1

    @property
    def beta1(self) -> float:
        return self.bootstrap.beta1

    @property
    def b(self) -> float:
        return self.steady.b

    @property
    def beta(self) -> float:
        return self.steady.beta

    @property
    def rate_bits_per_use(self) -> float:
        return self.steady.rate_bits_per_use

    def _idx(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise ScheduleError(f"step {n} outside schedule horizon 1..{self.n_max}")
        return n - 1

    def b_at(self, n: int) -> float:
        return float(self.b_n[self._idx(n)])

    def beta_at(self, n: int) -> float:
        return float(self.beta_n[self._idx(n)])

    def rho_at(self, n: int) -> float:
        return float(self.rho_n[self._idx(n)])

    def power_at(self, n: int) -> float:
        return float(self.power[self._idx(n)])

    def sign_rho(self, n: int) -> float:
        return sgn(self.rho_at(n))

    def average_power(self, N: int | None = None) -> float:
        """``(1/N) sum_{n<=N} P_n``; equals ``(P1 + (N-1) P) / N``."""
        N = self.n_max if N is None else N
        return float(np.mean(self.power[: self._idx(N) + 1]))

    def log2_slope(self) -> np.ndarray:
        """``log2(beta_1 ... beta_n)`` for every ``n``."""
        return np.cumsum(np.log2(self.beta_n))


def build_schedule(rho: float, ch: ChannelParams, n_max: int) -> Schedule:
    """Bootstrap step followed by the best steady-state fixed point at ``rho``.

    The nominal moments ``P_n = P``, ``rho_n = (-1)^n rho`` (``n >= 2``) are
    checked against one application of :func:`advance_moments` at every
    step, including the step past ``n_max``.

    Raises
    ------
    ScheduleError
        If ``n_max < 2`` or a recursion step misses the nominal moments by
        more than 1e-6 (relative for power).
    """
    if n_max < 2:
        raise ScheduleError("n_max must be at least 2")
    bp = bootstrap_params(rho, ch)
    steady = best_fixed_point(rho, ch)

    n = np.arange(1, n_max + 1)
    power = np.full(n_max, ch.P)
    power[0] = bp.P1
    rho_n = np.where(n % 2 == 0, rho, -rho).astype(float)
    rho_n[0] = 0.0
    b_n = np.full(n_max, steady.b)
    b_n[0] = bp.b1
    beta_n = np.full(n_max, steady.beta)
    beta_n[0] = bp.beta1

    scale = max(1.0, ch.P)
    for k in range(n_max):
        P_next, rho_next = advance_moments(power[k], rho_n[k], b_n[k], beta_n[k], ch.a)
        rho_target = rho if (k + 2) % 2 == 0 else -rho
        if abs(P_next - ch.P) > _DRIFT_TOL * scale or abs(rho_next - rho_target) > _DRIFT_TOL:
            raise ScheduleError(
                f"moment recursion drifted at step {k + 2}: "
                f"P={P_next} (want {ch.P}), rho={rho_next} (want {rho_target})"
            )

    for arr in (power, rho_n, b_n, beta_n):
        arr.setflags(write=False)
    return Schedule(ch, float(rho), bp, steady, int(n_max), power, rho_n, b_n, beta_n)
