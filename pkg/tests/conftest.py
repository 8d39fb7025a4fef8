import pytest

from gic_feedback.bootstrap import build_schedule
from gic_feedback.montecarlo import GeometricHalfWidth, SimConfig, run_batch
from gic_feedback.rate_theory import ChannelParams, symmetric_rate

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference_run():
    """a = 0.5, P = 10 at the rate-optimal rho; 10^4 trials, 100 steps, seed 0.

    Geometric half-width at 0.8 x the scheme rate. Shared by the Monte Carlo
    unit tests and the acceptance criteria so it is simulated once.
    """
    ch = ChannelParams(0.5, 10.0)
    rate = symmetric_rate(ch)
    cfg = SimConfig(ch, rate.solution.rho, n_steps=100, trials=10_000, seed=0,
                    half_width_rule=GeometricHalfWidth(fraction=0.8))
    sched = build_schedule(cfg.rho, ch, cfg.n_steps + 1)
    import time
    t0 = time.perf_counter()
    stats = run_batch(cfg, sched)
    elapsed = time.perf_counter() - t0
    return {"ch": ch, "rate": rate, "cfg": cfg, "sched": sched, "stats": stats,
            "elapsed": elapsed}
