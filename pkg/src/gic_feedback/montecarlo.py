"""Monte Carlo link simulation of the feedback code.

Trials are simulated together as numpy arrays, but every trial draws its
message points and noise from its own ``RngStream(seed, trial_index)``, so a
trial's outcome does not depend on batch size or order and
:func:`run_trial` reproduces any row of :func:`run_batch` exactly.

Decoding is evaluated after every step ``n``: the receiver maps a
fixed-length interval ``(-h_n, h_n)`` for ``x_{n+1}`` back to message space.
Because the composite map inverts the encoder exactly, the true message lies
in the decoded interval iff ``|x_{n+1}| < h_n``; that test is used for the
error flag since the interval endpoints themselves lose all resolution once
the interval is narrower than double spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bootstrap import Schedule, build_schedule
from .codec import (
    channel_step,
    decode_interval,
    decoder_init,
    decoder_update,
    emitted_symbol,
    encoder_init,
    encoder_step,
    geometric_half_width,
)
from .exceptions import DomainError
from .gauss_math import RngStream
from .rate_theory import ChannelParams

__all__ = [
    "FixedHalfWidth",
    "GeometricHalfWidth",
    "SimConfig",
    "TrialResult",
    "SimStats",
    "run_trial",
    "run_batch",
    "power_check",
    "moment_check",
    "INVALID_THRESHOLD",
]

INVALID_THRESHOLD = 1e9


@dataclass(frozen=True)
class FixedHalfWidth:
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise DomainError("half-width must be positive")

    def __call__(self, n: int, sched: Schedule) -> float:
        return self.h


@dataclass(frozen=True)
class GeometricHalfWidth:
    """``h_n = sqrt(P) 2^(n (R_sym - R) / 2)``.

    ``target_rate`` defaults to ``fraction`` times the schedule's rate.
    """

    target_rate: float | None = None
    fraction: float = 0.8

    def resolve(self, sched: Schedule) -> float:
        return self.target_rate if self.target_rate is not None \
            else self.fraction * sched.rate_bits_per_use

    def __call__(self, n: int, sched: Schedule) -> float:
        return geometric_half_width(n, sched.ch.P, sched.rate_bits_per_use, self.resolve(sched))


@dataclass(frozen=True)
class SimConfig:
    ch: ChannelParams
    rho: float
    n_steps: int = 100
    trials: int = 10_000
    seed: int = 0
    half_width_rule: FixedHalfWidth | GeometricHalfWidth = field(default_factory=GeometricHalfWidth)
    zero_noise: bool = False

    def target_rate(self, sched: Schedule) -> float | None:
        rule = self.half_width_rule
        return rule.resolve(sched) if isinstance(rule, GeometricHalfWidth) else None


@dataclass(frozen=True)
class TrialResult:
    theta: np.ndarray       # (2,)
    x: np.ndarray           # (2, n_steps + 1): x_1 .. x_{n+1}, unsigned states
    contained: np.ndarray   # (2, n_steps): message inside decoded interval after step n
    log2_width: np.ndarray  # (2, n_steps)
    valid: bool


@dataclass(frozen=True)
class SimStats:
    """Aggregates over valid trials; trajectory index ``k`` is step ``k + 1``."""

    trials: int
    n_valid: int
    err_rate: np.ndarray          # (2,) at n_steps
    empirical_rate: np.ndarray    # (2,) at n_steps, bits/channel use
    avg_power: np.ndarray         # (2,)
    corr_trajectory: np.ndarray   # (n_steps,)
    corr_se: np.ndarray
    power_trajectory: np.ndarray  # (2, n_steps)
    power_se: np.ndarray
    err_trajectory: np.ndarray    # (2, n_steps)
    rate_trajectory: np.ndarray   # (2, n_steps)

    @property
    def n_invalid(self) -> int:
        return self.trials - self.n_valid


def _check(cfg: SimConfig, sched: Schedule):
    if cfg.n_steps < 1 or cfg.trials < 1:
        raise DomainError("n_steps and trials must be positive")
    if sched.n_max < cfg.n_steps + 1:
        raise DomainError("schedule horizon must cover n_steps + 1")
    target = cfg.target_rate(sched)
    if target is not None and not 0 < target < sched.rate_bits_per_use:
        raise DomainError(
            f"target rate {target} must lie in (0, {sched.rate_bits_per_use}) at rho={sched.rho}"
        )


def _draw(cfg: SimConfig, trial_index: int):
    rs = RngStream(cfg.seed, trial_index)
    theta = rs.uniform_open(2)
    z = rs.normal((2, cfg.n_steps))
    if cfg.zero_noise:
        z = np.zeros_like(z)
    return theta, z


def _simulate(theta, z, sched: Schedule, cfg: SimConfig):
    """Vectorised link run. ``theta``: (2, T); ``z``: (2, T, n)."""
    n_steps = cfg.n_steps
    T = theta.shape[1]
    a = sched.ch.a
    xs = np.empty((2, T, n_steps + 1))
    contained = np.empty((2, T, n_steps), dtype=bool)
    log2w = np.empty((2, T, n_steps))

    enc = [encoder_init(theta[0], sched, "tx1"), encoder_init(theta[1], sched, "tx2")]
    dec = [decoder_init("rx1"), decoder_init("rx2")]
    tx = [emitted_symbol(e, sched) for e in enc]
    xs[0, :, 0], xs[1, :, 0] = enc[0].x, enc[1].x

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            n = k + 1
            y = channel_step(tx[0], tx[1], a, z[0, :, k], z[1, :, k])
            h = cfg.half_width_rule(n, sched)
            for m in range(2):
                dec[m] = decoder_update(dec[m], y[m], sched)
                enc[m], tx[m] = encoder_step(enc[m], y[m], sched)
                xs[m, :, n] = enc[m].x
                off = np.where(np.isfinite(dec[m].offset), dec[m].offset, 0.0)
                iv = decode_interval(replace(dec[m], offset=off), h, sched)
                log2w[m, :, k] = iv.log2_width
                # T_n(x_{n+1}) = x_1 and T_n is increasing
                contained[m, :, k] = np.abs(enc[m].x) < h

    valid = np.all(np.isfinite(xs) & (np.abs(xs) <= INVALID_THRESHOLD), axis=(0, 2))
    return xs, contained, log2w, valid


def run_trial(cfg: SimConfig, sched: Schedule, trial_index: int) -> TrialResult:
    """Simulate one trial on stream ``(cfg.seed, trial_index)``."""
    _check(cfg, sched)
    theta, z = _draw(cfg, trial_index)
    xs, contained, log2w, valid = _simulate(theta[:, None], z[:, None, :], sched, cfg)
    return TrialResult(theta, xs[:, 0], contained[:, 0], log2w[:, 0], bool(valid[0]))


def run_batch(cfg: SimConfig, sched: Schedule | None = None) -> SimStats:
    """Run ``cfg.trials`` independent trials and aggregate.

    Parameters
    ----------
    cfg : SimConfig
    sched : Schedule, optional
        Built from ``(cfg.rho, cfg.ch)`` with horizon ``n_steps + 1`` if not
        given.
    """
    if sched is None:
        sched = build_schedule(cfg.rho, cfg.ch, cfg.n_steps + 1)
    _check(cfg, sched)

    theta = np.empty((2, cfg.trials))
    z = np.empty((2, cfg.trials, cfg.n_steps))
    for t in range(cfg.trials):
        theta[:, t], z[:, t, :] = _draw(cfg, t)
    xs, contained, log2w, valid = _simulate(theta, z, sched, cfg)

    n_valid = int(valid.sum())
    if n_valid == 0:
        raise DomainError("every trial overflowed; the schedule is not contracting")
    x = xs[:, valid, : cfg.n_steps]
    sq = x * x
    power = sq.mean(axis=1)
    power_se = sq.std(axis=1, ddof=1) / math.sqrt(n_valid)
    corr = (x[0] * x[1]).mean(axis=0) / np.sqrt(power[0] * power[1])
    corr_se = (1.0 - corr * corr) / math.sqrt(n_valid)

    err = 1.0 - contained[:, valid].mean(axis=1)
    steps = np.arange(1, cfg.n_steps + 1)
    rate = (-log2w[:, valid] / steps).mean(axis=1)
    return SimStats(
        trials=cfg.trials,
        n_valid=n_valid,
        err_rate=err[:, -1],
        empirical_rate=rate[:, -1],
        avg_power=power.mean(axis=1),
        corr_trajectory=corr,
        corr_se=corr_se,
        power_trajectory=power,
        power_se=power_se,
        err_trajectory=err,
        rate_trajectory=rate,
    )


def power_check(stats: SimStats, ch: ChannelParams) -> float:
    """Largest per-user time-averaged empirical power; compare against ``P``."""
    return float(np.max(stats.avg_power))


def moment_check(stats: SimStats, sched: Schedule, n_se: float = 3.0, first: int = 1,
                 last: int | None = None) -> list[str]:
    """Steps where empirical moments miss the schedule by more than ``n_se`` SE.

    Returns an empty list when every ``P_hat`` (both users) and ``rho_hat``
    for steps ``first .. last`` (default: all simulated steps) is within
    tolerance.
    """
    failures = []
    n_steps = stats.power_trajectory.shape[1]
    last = n_steps if last is None else min(last, n_steps)
    for n in range(first, last + 1):
        k = n - 1
        for m in range(2):
            dev = stats.power_trajectory[m, k] - sched.power_at(n)
            if abs(dev) > n_se * stats.power_se[m, k]:
                failures.append(f"power user {m + 1} step {n}: dev {dev:+.4g} "
                                f"> {n_se} x SE {stats.power_se[m, k]:.3g}")
        dev = stats.corr_trajectory[k] - sched.rho_at(n)
        if abs(dev) > n_se * stats.corr_se[k]:
            failures.append(f"corr step {n}: dev {dev:+.4g} > {n_se} x SE {stats.corr_se[k]:.3g}")
    return failures
