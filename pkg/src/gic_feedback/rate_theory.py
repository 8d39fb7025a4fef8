"""Achievable symmetric rate of the time-varying feedback code.

The steady state of the code is a triple ``(rho, b, beta)`` that solves the
two moment fixed-point equations

    P    = [P - 2bP(1+|a|rho) + b^2 (1+P+a^2 P+2|a|rho P)] / beta^2      (power)
    -rho = [rho - 2b(rho+|a|) + b^2 (rho(1+a^2)+2|a|)] / beta^2          (correlation)

and the rate is ``-log2(beta)`` bits per channel use. For each ``rho`` in
``[0, rho_max]`` eliminating ``beta`` leaves a quadratic in ``b`` with two
positive roots; the rate is maximised over that one-parameter family.

Also provided: the Kramer linear-feedback baseline (a single point of the
same family), the interference-free capacity, and the high-SNR generalised
degrees-of-freedom helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import DegenerateChannelError, DomainError, InfeasibleError, SolverError

__all__ = [
    "ChannelParams",
    "FixedPointSolution",
    "RateResult",
    "DEFAULT_GRID_STEP",
    "MIN_GRID_POINTS",
    "discriminant_f",
    "rho_max",
    "fixed_point_residuals",
    "fixed_point_candidates",
    "best_fixed_point",
    "rho_grid",
    "symmetric_rate",
    "kramer_quartic",
    "kramer_quartic_exact",
    "kramer_solution",
    "degraded_rate",
    "channel_for_alpha",
    "rho_star",
    "gdof_ratio",
    "KRAMER_SCAN_STEP",
]

DEFAULT_GRID_STEP = 1e-5
# Floor on the number of rho samples; rho_max -> 0 as a -> 0 and a fixed
# step would then skip the whole feasible interval.
MIN_GRID_POINTS = 1000
KRAMER_SCAN_STEP = 1e-3


@dataclass(frozen=True)
class ChannelParams:
    """Symmetric two-user Gaussian interference channel, unit noise.

    ``SNR = P`` and ``INR = a**2 * P`` (both linear).
    """

    a: float
    P: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "P", float(self.P))
        if not math.isfinite(self.a):
            raise DomainError(f"interference gain must be finite, got {self.a}")
        if not (math.isfinite(self.P) and self.P > 0):
            raise DomainError(f"power must be positive and finite, got {self.P}")

    @property
    def abs_a(self) -> float:
        return abs(self.a)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.P)

    @property
    def inr_db(self) -> float:
        return 10.0 * math.log10(self.a * self.a * self.P) if self.a else -math.inf


@dataclass(frozen=True)
class FixedPointSolution:
    rho: float
    b: float
    beta: float
    residual_power: float
    residual_corr: float

    @property
    def rate_bits_per_use(self) -> float:
        return max(0.0, -math.log2(self.beta))


@dataclass(frozen=True)
class RateResult:
    """Symmetric rate in both unit conventions plus the maximising triple.

    ``rate_bits_per_s_hz`` is twice the per-channel-use rate; the high-SNR
    degrees-of-freedom statements are made in that unit.
    """

    rate_bits_per_use: float
    rate_bits_per_s_hz: float
    solution: FixedPointSolution
    rho_grid_step: float


def _rate_result(sol: FixedPointSolution, step: float) -> RateResult:
    r = sol.rate_bits_per_use
    return RateResult(r, 2.0 * r, sol, step)


def discriminant_f(rho, ch: ChannelParams):
    """Reduced discriminant of the quadratic in ``b``.

    Equal to ``P^2 a^2 rho^4 - 2 rho^2 (a^2 P^2 + P) + a^2 P^2``, evaluated
    in the factored form ``a^2 P^2 (1 - rho^2)^2 - 2 P rho^2``.
    """
    rho = np.asarray(rho, dtype=float)
    one_m = (1.0 - rho) * (1.0 + rho)
    out = ch.a * ch.a * ch.P * ch.P * one_m * one_m - 2.0 * ch.P * rho * rho
    return float(out) if out.ndim == 0 else out


def rho_max(ch: ChannelParams) -> float:
    """Largest feasible correlation, the root of :func:`discriminant_f` in (0, 1).

    Computed as ``sqrt(2u) / (1 + sqrt(1 + 2u))`` with ``u = a^2 P``, then
    stepped down by ulps until the discriminant evaluates non-negative.
    """
    if ch.a == 0:
        raise DegenerateChannelError("rho_max is undefined for a = 0; use degraded_rate")
    u = ch.a * ch.a * ch.P
    r0 = math.sqrt(2.0 * u) / (1.0 + math.sqrt(1.0 + 2.0 * u))
    for _ in range(64):
        if discriminant_f(r0, ch) >= 0.0:
            break
        r0 = math.nextafter(r0, 0.0)
    return r0


def fixed_point_residuals(rho, b, beta, ch: ChannelParams):
    """Residuals (power, correlation) of the fixed-point equations.

    Returns ``(rhs_power - P, rhs_corr + rho)``; both vanish at a solution.
    """
    a, P = ch.abs_a, ch.P
    beta2 = beta * beta
    r_pow = (P - 2 * b * P * (1 + a * rho)
             + b * b * (1 + P + a * a * P + 2 * a * rho * P)) / beta2 - P
    r_cor = (rho - 2 * b * (rho + a)
             + b * b * (rho * (1 + a * a) + 2 * a)) / beta2 + rho
    return r_pow, r_cor


def _beta2(rho, b, a, P):
    # Power equation solved for beta^2, written as a sum of two non-negative
    # terms (square completed around the Kramer coefficient) so small
    # contraction factors keep full relative accuracy.
    d = 1.0 + P + a * a * P + 2.0 * a * rho * P
    b_k = P * (1.0 + a * rho) / d
    floor = (1.0 + a * a * P * (1.0 - rho) * (1.0 + rho)) / d
    return d / P * (b - b_k) ** 2 + floor


def _roots(rho, ch: ChannelParams):
    """Both roots ``b*_1 >= b*_2`` of the quadratic in ``b`` (vectorised over rho)."""
    a, P = ch.abs_a, ch.P
    rho = np.asarray(rho, dtype=float)
    quad = 2 * a * P + 2 * P * rho + 2 * a * a * P * rho + rho + 2 * a * P * rho * rho
    half_lin = P * (2 * rho + a + a * rho * rho)
    f = discriminant_f(rho, ch)
    # floating-point dust on either side of a double root
    f = np.where(np.abs(f) <= 1e-12 * max(1.0, a * a * P * P), 0.0, f)
    if np.any(f < 0):
        raise InfeasibleError("rho exceeds rho_max: the quadratic in b has no real root")
    s = half_lin + np.sqrt(f)
    b1 = s / quad
    b2 = 2.0 * P * rho / s  # Vieta: avoids cancellation in (half_lin - sqrt f)
    return b1, b2, f


def _degraded_solution(ch: ChannelParams) -> FixedPointSolution:
    P = ch.P
    b = P / (1.0 + P)
    beta = 1.0 / math.sqrt(1.0 + P)
    r_pow, r_cor = fixed_point_residuals(0.0, b, beta, ch)
    return FixedPointSolution(0.0, b, beta, r_pow, r_cor)


def fixed_point_candidates(rho: float, ch: ChannelParams) -> list[FixedPointSolution]:
    """Solutions ``(rho, b, beta)`` for a fixed correlation magnitude.

    Returns ``b*_1`` first, then ``b*_2``; a double root (``rho == rho_max``)
    is returned once. For ``a == 0`` only ``rho == 0`` is admissible and the
    single optimal coefficient ``b = P / (1 + P)`` is returned.

    Raises
    ------
    InfeasibleError, DomainError
        If ``rho`` is outside ``[0, rho_max]``.
    """
    if ch.a == 0:
        if rho != 0:
            raise DomainError("for a = 0 the correlation fixed point forces rho = 0")
        return [_degraded_solution(ch)]
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"rho must lie in [0, 1), got {rho}")
    b1, b2, f = _roots(rho, ch)
    bs = [float(b1)] if f == 0.0 else [float(b1), float(b2)]
    out = []
    for b in bs:
        beta2 = _beta2(rho, b, ch.abs_a, ch.P)
        if beta2 <= 0:
            continue
        beta = math.sqrt(beta2)
        r_pow, r_cor = fixed_point_residuals(rho, b, beta, ch)
        out.append(FixedPointSolution(float(rho), b, beta, float(r_pow), float(r_cor)))
    return out


def best_fixed_point(rho: float, ch: ChannelParams) -> FixedPointSolution:
    """Candidate with the smallest contraction factor (ties go to ``b*_1``)."""
    cands = fixed_point_candidates(rho, ch)
    return min(cands, key=lambda s: s.beta)


def rho_grid(ch: ChannelParams, grid_step: float = DEFAULT_GRID_STEP):
    """Search grid ``0, h, 2h, ..., rho_max`` plus the Kramer correlation.

    ``h`` is ``grid_step`` unless that would leave fewer than
    :data:`MIN_GRID_POINTS` samples on ``[0, rho_max]``. ``rho_max`` is
    always included, and so is the Kramer root, which keeps the grid optimum
    at or above the Kramer rate.

    Returns
    -------
    grid : ndarray
        Sorted correlation magnitudes.
    step : float
        The lattice spacing actually used.
    """
    r0 = rho_max(ch)
    step = min(grid_step, r0 / MIN_GRID_POINTS)
    n = int(math.floor(r0 / step)) + 1
    grid = np.arange(n, dtype=float) * step
    grid = grid[grid < r0]
    rk = min(_kramer_rho(ch), r0)
    return np.unique(np.concatenate([grid, [rk, r0]])), step


def symmetric_rate(ch: ChannelParams, grid_step: float = DEFAULT_GRID_STEP) -> RateResult:
    """Maximise the rate over the ``rho`` grid and both roots ``b*_1, b*_2``.

    Parameters
    ----------
    ch : ChannelParams
    grid_step : float
        Spacing of the correlation grid, in ``(0, 1e-3]``.

    Returns
    -------
    RateResult
        ``rate = max(0, -log2 beta)`` at the maximising triple. With
        ``a == 0`` this is the interference-free capacity ``log2(1+P)/2``.
    """
    if not 0 < grid_step <= 1e-3:
        raise DomainError(f"grid_step must be in (0, 1e-3], got {grid_step}")
    if ch.a == 0:
        r = degraded_rate(ch.P)
        return RateResult(r, 2.0 * r, _degraded_solution(ch), grid_step)

    grid, step = rho_grid(ch, grid_step)
    b1, b2, _ = _roots(grid, ch)
    a, P = ch.abs_a, ch.P
    beta2_1 = _beta2(grid, b1, a, P)
    beta2_2 = _beta2(grid, b2, a, P)
    # infeasible (non-positive beta^2) candidates are dropped, not clamped
    beta2_1 = np.where(beta2_1 > 0, beta2_1, np.inf)
    beta2_2 = np.where(beta2_2 > 0, beta2_2, np.inf)
    use_first = beta2_1 <= beta2_2
    beta2 = np.where(use_first, beta2_1, beta2_2)
    k = int(np.argmin(beta2))
    if not np.isfinite(beta2[k]):
        raise SolverError("no feasible fixed point on the rho grid")

    rho = float(grid[k])
    b = float(b1[k] if use_first[k] else b2[k])
    beta = math.sqrt(float(beta2[k]))
    r_pow, r_cor = fixed_point_residuals(rho, b, beta, ch)
    return _rate_result(FixedPointSolution(rho, b, beta, float(r_pow), float(r_cor)), step)


def _kramer_coeffs(ch: ChannelParams):
    a, P = ch.abs_a, ch.P
    return (
        2 * a**3 * P * P,
        a * a * P,
        -4 * a * P * (a * a * P + 1),
        -(2 * a * a * P + P + 2),
        2 * a * P * (a * a * P + 1),
    )


def kramer_quartic(rho, ch: ChannelParams, normalized: bool = True):
    """Quartic whose root in (0, 1) fixes the Kramer-code correlation.

    With ``normalized`` the polynomial is divided by its largest absolute
    coefficient, so residuals are comparable across channel parameters.
    """
    c = _kramer_coeffs(ch)
    val = np.polyval(c, rho)
    if normalized:
        val = val / max(abs(x) for x in c)
    return val


def _kramer_exact(rho: float, ch: ChannelParams) -> Fraction:
    a, P, r = Fraction(ch.abs_a), Fraction(ch.P), Fraction(rho)
    c = (2 * a**3 * P * P, a * a * P, -4 * a * P * (a * a * P + 1),
         -(2 * a * a * P + P + 2), 2 * a * P * (a * a * P + 1))
    val = Fraction(0)
    for coef in c:
        val = val * r + coef
    return val


def kramer_quartic_exact(rho: float, ch: ChannelParams) -> float:
    """Unnormalised quartic evaluated in exact rational arithmetic, then rounded.

    Double-precision evaluation carries an error of roughly ``eps`` times the
    largest coefficient, which swamps the residual near the root once
    ``|a|^3 P^2`` is large.
    """
    return float(_kramer_exact(float(rho), ch))


def _kramer_rho(ch: ChannelParams) -> float:
    n = int(round(1.0 / KRAMER_SCAN_STEP))
    lattice = np.arange(n + 1) / n
    vals = kramer_quartic(lattice, ch)
    pos = vals > 0
    change = np.flatnonzero(pos[:-1] != pos[1:])
    if not change.size:
        raise SolverError("Kramer quartic has no sign change in (0, 1)")
    i = int(change[0])
    lo, hi = float(lattice[i]), float(lattice[i + 1])
    q_lo, q_hi = _kramer_exact(lo, ch), _kramer_exact(hi, ch)
    if q_lo == 0:
        return lo
    if q_hi == 0:
        return hi
    # signs evaluated exactly, so the bracket is never lost to rounding and
    # the loop ends on two adjacent doubles
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        q_mid = _kramer_exact(mid, ch)
        if q_mid == 0:
            return mid
        if (q_mid > 0) == (q_lo > 0):
            lo, q_lo = mid, q_mid
        else:
            hi, q_hi = mid, q_mid
    return lo if abs(q_lo) <= abs(q_hi) else hi


def kramer_solution(ch: ChannelParams) -> RateResult:
    """Kramer linear-feedback baseline as a fixed point of the same equations.

    The quartic is scanned on a ``1e-3`` lattice over (0, 1) for the first
    sign change and then bisected, with exact signs, down to two adjacent
    doubles; the one with the smaller exact residual is returned.

    Raises
    ------
    DegenerateChannelError
        For ``a == 0``.
    SolverError
        If no sign change is found in (0, 1).
    """
    if ch.a == 0:
        raise DegenerateChannelError("the Kramer variant needs a != 0")
    a, P = ch.abs_a, ch.P
    rho = _kramer_rho(ch)

    den = P * (1 + a * a + 2 * a * rho) + 1
    b = P * (1 + a * rho) / den
    beta = math.sqrt((a * a * P * (1 - rho * rho) + 1) / den)
    r_pow, r_cor = fixed_point_residuals(rho, b, beta, ch)
    return _rate_result(FixedPointSolution(rho, b, beta, r_pow, r_cor), KRAMER_SCAN_STEP)


def degraded_rate(P: float) -> float:
    """Capacity without interference, ``log2(1 + P) / 2`` bits per channel use."""
    if not P > 0:
        raise DomainError(f"power must be positive, got {P}")
    return 0.5 * math.log2(1.0 + P)


def channel_for_alpha(alpha: float, P: float) -> ChannelParams:
    """Channel with ``SNR = P`` and ``INR = P**alpha``."""
    return ChannelParams(P ** ((alpha - 1.0) / 2.0), P)


def rho_star(alpha: float, P: float, gamma: float) -> float:
    """Explicit feasible correlation for the high-SNR degrees-of-freedom bound.

    ``sqrt(1 - P^-gamma + P^-(alpha-1)) - P^-(alpha-1)/2``, which satisfies
    ``1 - rho^2 - 2 rho P^((1-alpha)/2) = P^-gamma``.
    """
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    if not 0 < gamma < alpha / 2:
        raise DomainError(f"gamma must lie in (0, alpha/2), got {gamma}")
    if not P > 1:
        raise DomainError(f"P must exceed 1, got {P}")
    return math.sqrt(1.0 - P**-gamma + P ** -(alpha - 1.0)) - P ** (-(alpha - 1.0) / 2.0)


def gdof_ratio(alpha: float, P: float, grid_step: float = DEFAULT_GRID_STEP) -> float:
    """``rate [bits/s/Hz] / log2(SNR)`` at ``INR = SNR**alpha``."""
    if not alpha > 1:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    if not P > 1:
        raise DomainError(f"P must exceed 1, got {P}")
    res = symmetric_rate(channel_for_alpha(alpha, P), grid_step)
    return res.rate_bits_per_s_hz / math.log2(P)
