"""Command-line front end.

Subcommands::

    gic-feedback rate      --a A (--snr-db S | --P P) [--grid-step H]
    gic-feedback sweep     --snr-db S [--alpha-min --alpha-max --alpha-step] [--out FILE]
    gic-feedback gdof      --alpha ALPHA [--powers P ...]
    gic-feedback simulate  [--a A] [--snr-db S | --P P] [--rho R] [--steps N] [--trials T]
                           [--seed K] [--target-rate R | --half-width H] [--zero-noise] [--out FILE]

Exit codes: 0 success, 2 usage, 3 domain error, 4 simulation invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

from .bootstrap import build_schedule
from .exceptions import DomainError
from .gauss_math import std_normal_inv_cdf
from .montecarlo import (
    FixedHalfWidth,
    GeometricHalfWidth,
    SimConfig,
    moment_check,
    power_check,
    run_batch,
)
from .rate_theory import (
    DEFAULT_GRID_STEP,
    ChannelParams,
    channel_for_alpha,
    fixed_point_residuals,
    gdof_ratio,
    kramer_solution,
    rho_max,
    symmetric_rate,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_INVARIANT = 0, 2, 3, 4

SWEEP_COLUMNS = ("alpha", "snr_db", "inr_db", "rate_proposed_bpu", "rate_kramer_bpu",
                 "rho_opt", "b_opt", "beta_opt")
SWEEP_SCHEMA = "gic-feedback-sweep/1"
# Family-wise false-alarm probability for the simulate moment check.
MOMENT_FAMILY_ALPHA = 1e-3
POWER_TOLERANCE = 0.01


def _fmt(v: float) -> str:
    return f"{v:.15e}"


def _power(args) -> float:
    if args.P is not None:
        return args.P
    return 10.0 ** (args.snr_db / 10.0)


def _add_power(p, default_snr_db=None):
    g = p.add_mutually_exclusive_group(required=default_snr_db is None)
    g.add_argument("--snr-db", type=float, default=default_snr_db,
                   help="SNR in dB, P = 10^(snr/10)")
    g.add_argument("--P", type=float, help="linear power (SNR)")


def cmd_rate(a: float, P: float, grid_step: float = DEFAULT_GRID_STEP, out=None):
    out = out or sys.stdout
    ch = ChannelParams(a, P)
    res = symmetric_rate(ch, grid_step)
    sol = res.solution
    w = out.write
    w(f"channel: a={ch.a:.12g} P={ch.P:.12g} (SNR {ch.snr_db:.6f} dB, INR {ch.inr_db:.6f} dB)\n")
    w(f"symmetric rate: {res.rate_bits_per_use:.12f} bits/channel use "
      f"({res.rate_bits_per_s_hz:.12f} bits/s/Hz)\n")
    w(f"optimum: rho={sol.rho:.12g} b={sol.b:.12g} beta={sol.beta:.12g}\n")
    w(f"fixed-point residuals: power={sol.residual_power:.3e} correlation={sol.residual_corr:.3e}\n")
    w(f"rho grid step: {res.rho_grid_step:.3e}\n")
    kr = None
    if ch.a != 0:
        w(f"rho_max: {rho_max(ch):.12g}\n")
        kr = kramer_solution(ch)
        ks = kr.solution
        w(f"kramer rate: {kr.rate_bits_per_use:.12f} bits/channel use "
          f"({kr.rate_bits_per_s_hz:.12f} bits/s/Hz) at rho={ks.rho:.12g}\n")
        w(f"gain over kramer: {res.rate_bits_per_use - kr.rate_bits_per_use:.3e} bits/channel use\n")
    return res, kr


def sweep_rows(snr_db: float, alpha_min: float, alpha_max: float, alpha_step: float,
               grid_step: float = DEFAULT_GRID_STEP, a_sign: float = 1.0):
    if not alpha_min < alpha_max:
        raise DomainError("alpha_min must be below alpha_max")
    if not alpha_step > 0:
        raise DomainError("alpha_step must be positive")
    P = 10.0 ** (snr_db / 10.0)
    count = int(math.floor((alpha_max - alpha_min) / alpha_step + 1e-9)) + 1
    rows = []
    for i in range(count):
        alpha = round(alpha_min + i * alpha_step, 12)
        base = channel_for_alpha(alpha, P)
        ch = ChannelParams(a_sign * base.a, P)
        res = symmetric_rate(ch, grid_step)
        kr = kramer_solution(ch)
        sol = res.solution
        rows.append((alpha, snr_db, alpha * snr_db, res.rate_bits_per_use,
                     kr.rate_bits_per_use, sol.rho, sol.b, sol.beta))
    return rows


def cmd_sweep(snr_db, alpha_min, alpha_max, alpha_step, out_path, grid_step=DEFAULT_GRID_STEP,
              a_sign=1.0):
    rows = sweep_rows(snr_db, alpha_min, alpha_max, alpha_step, grid_step, a_sign)
    header = (f"# {SWEEP_SCHEMA} snr_db={snr_db!r} alpha_step={alpha_step!r} "
              f"grid_step={grid_step!r} a_sign={a_sign:+.0f} "
              "units: rates in bits/channel use, dB = 10 log10(linear)\n")

    def emit(fh):
        fh.write(header)
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])

    if out_path in (None, "-"):
        emit(sys.stdout)
    else:
        with open(out_path, "w", newline="", encoding="ascii") as fh:
            emit(fh)
    return rows


def cmd_gdof(alpha: float, powers, grid_step=DEFAULT_GRID_STEP, out=None):
    if not alpha > 1:
        raise DomainError(f"the degrees-of-freedom table covers alpha > 1 only, got {alpha}")
    out = out or sys.stdout
    kramer_ref = (1.0 + alpha) / 4.0
    out.write(f"alpha={alpha:g}; ratio = rate [bits/s/Hz] / log2(SNR); limit alpha/2 = {alpha / 2:g}\n")
    out.write(f"{'P':>12} {'SNR_dB':>8} {'ratio':>14} {'kramer_ref':>11}\n")
    table = []
    for P in powers:
        r = gdof_ratio(alpha, P, grid_step)
        table.append((P, r, kramer_ref))
        out.write(f"{P:12.4g} {10 * math.log10(P):8.2f} {r:14.10f} {kramer_ref:11.4f}\n")
    return table


def cmd_simulate(cfg: SimConfig, grid_step=DEFAULT_GRID_STEP, out_path=None, out=None) -> int:
    out = out or sys.stdout
    ch = cfg.ch
    if ch.a != 0 and cfg.rho > rho_max(ch):
        raise DomainError(f"rho={cfg.rho} exceeds rho_max={rho_max(ch):.12g}; "
                          "feasible correlations satisfy rho <= rho_max")
    sched = build_schedule(cfg.rho, ch, cfg.n_steps + 1)
    stats = run_batch(cfg, sched)
    m = 3 * cfg.n_steps
    n_se = -std_normal_inv_cdf(MOMENT_FAMILY_ALPHA / (2 * m))
    failures = moment_check(stats, sched, n_se=n_se)
    pw = power_check(stats, ch)
    if pw > ch.P * (1 + POWER_TOLERANCE):
        failures.append(f"average power {pw:.6g} exceeds P(1+{POWER_TOLERANCE}) = "
                        f"{ch.P * (1 + POWER_TOLERANCE):.6g}")

    w = out.write
    target = cfg.target_rate(sched)
    w(f"channel: a={ch.a:.12g} P={ch.P:.12g}; rho={cfg.rho:.12g}; steps={cfg.n_steps} "
      f"trials={cfg.trials} seed={cfg.seed} zero_noise={cfg.zero_noise}\n")
    w(f"schedule: P1={sched.P1:.10g} b1={sched.b1:.10g} beta1={sched.beta1:.10g} "
      f"b={sched.b:.10g} beta={sched.beta:.10g}\n")
    w(f"scheme rate: {sched.rate_bits_per_use:.10f} bits/channel use\n")
    if target is not None:
        w(f"target rate: {target:.10f} bits/channel use (geometric half-width)\n")
        w(f"analytic decoded-rate limit: {(sched.rate_bits_per_use + target) / 2:.10f} bits/channel use\n")
    else:
        w(f"fixed half-width: {cfg.half_width_rule.h:.6g}\n")
    for u in range(2):
        w(f"user {u + 1}: error rate {stats.err_rate[u]:.6f} at n={cfg.n_steps}; "
          f"empirical rate {stats.empirical_rate[u]:.10f} bits/channel use; "
          f"average power {stats.avg_power[u]:.6f}\n")
    w(f"invalid trials: {stats.n_invalid}\n")
    w(f"moment check ({n_se:.3f} SE per comparison, {m} comparisons): "
      f"{'pass' if not failures else 'FAIL'}\n")
    for f in failures:
        w(f"  {f}\n")

    if out_path:
        with open(out_path, "w", newline="", encoding="ascii") as fh:
            fh.write("# gic-feedback-trajectory/1 rates in bits/channel use\n")
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(("n", "P_model", "P_hat_1", "P_hat_2", "rho_model", "rho_hat",
                         "err_1", "err_2", "rate_1", "rate_2"))
            for k in range(cfg.n_steps):
                n = k + 1
                wr.writerow([n] + [_fmt(v) for v in (
                    sched.power_at(n), stats.power_trajectory[0, k], stats.power_trajectory[1, k],
                    sched.rho_at(n), stats.corr_trajectory[k],
                    stats.err_trajectory[0, k], stats.err_trajectory[1, k],
                    stats.rate_trajectory[0, k], stats.rate_trajectory[1, k])])
    return EXIT_INVARIANT if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gic-feedback",
        description="Time-varying feedback coding for the symmetric Gaussian interference channel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="symmetric rate at one channel")
    p.add_argument("--a", type=float, required=True, help="interference gain")
    _add_power(p)
    p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)

    p = sub.add_parser("sweep", help="rate versus alpha = log INR / log SNR, as CSV")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--alpha-min", type=float, default=0.5)
    p.add_argument("--alpha-max", type=float, default=2.5)
    p.add_argument("--alpha-step", type=float, default=0.1)
    p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    p.add_argument("--a-sign", type=int, choices=(1, -1), default=1,
                   help="sign of the interference gain")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    p = sub.add_parser("gdof", help="rate / log2(SNR) at INR = SNR^alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--powers", type=float, nargs="+", default=[1e2, 1e4, 1e6])
    p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)

    p = sub.add_parser("simulate", help="Monte Carlo link simulation")
    p.add_argument("--a", type=float, default=0.5)
    _add_power(p, default_snr_db=10.0)
    p.add_argument("--rho", type=float, default=None,
                   help="steady correlation (default: rate-optimal)")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    hw = p.add_mutually_exclusive_group()
    hw.add_argument("--target-rate", type=float, default=None,
                    help="bits/channel use for the geometric half-width (default 0.8 x scheme rate)")
    hw.add_argument("--half-width", type=float, default=None, help="fixed decoding half-width")
    p.add_argument("--zero-noise", action="store_true")
    p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP)
    p.add_argument("--out", default=None, help="optional trajectory CSV")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rate":
            cmd_rate(args.a, _power(args), args.grid_step)
        elif args.command == "sweep":
            cmd_sweep(args.snr_db, args.alpha_min, args.alpha_max, args.alpha_step, args.out,
                      args.grid_step, float(args.a_sign))
        elif args.command == "gdof":
            cmd_gdof(args.alpha, args.powers, args.grid_step)
        elif args.command == "simulate":
            ch = ChannelParams(args.a, _power(args))
            rho = args.rho
            if rho is None:
                rho = symmetric_rate(ch, args.grid_step).solution.rho
            if args.half_width is not None:
                rule = FixedHalfWidth(args.half_width)
            else:
                rule = GeometricHalfWidth(args.target_rate)
            cfg = SimConfig(ch, rho, args.steps, args.trials, args.seed, rule, args.zero_noise)
            return cmd_simulate(cfg, args.grid_step, args.out)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
