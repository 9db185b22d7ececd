"""Shared fixtures: the default forward runs are expensive, so they are built once."""
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from nlsscat.analysis import analyze_forward
from nlsscat.config import RunConfig
from nlsscat.solver import evolve

_RUNS = {}
# wall-clock seconds spent building each cached result
ELAPSED = {}


def forward(epsilon=0.1):
    """Default-config forward run and its packet analysis, cached per epsilon."""
    if epsilon not in _RUNS:
        start = time.perf_counter()
        base = RunConfig()
        cfg = replace(base, simulation=replace(base.simulation, epsilon=epsilon))
        traj = evolve(cfg.initial_field(), cfg.sim_config())
        times, _ = cfg.schedule()
        an = analyze_forward(traj, times, cfg.simulation.lam, v=cfg.v_window(),
                             fd_rel=cfg.analysis.fd_rel)
        _RUNS[epsilon] = (cfg, traj, an)
        ELAPSED[("forward", epsilon)] = time.perf_counter() - start
    return _RUNS[epsilon]


@pytest.fixture(scope="session")
def default_run():
    return forward(0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_smooth(grid, rng, n_bumps=4, spread=3.0, width=(0.6, 1.5), kmax=1.0, time=0.0):
    """Sum of random modulated Gaussians; decays far inside any box with L >= 40."""
    from nlsscat.grid import ComplexField

    x = grid.x
    vals = np.zeros(x.size, dtype=np.complex128)
    for _ in range(n_bumps):
        c = rng.normal() + 1j * rng.normal()
        x0 = rng.uniform(-spread, spread)
        s = rng.uniform(*width)
        k = rng.uniform(-kmax, kmax)
        vals += c * np.exp(-0.5 * ((x - x0) / s) ** 2 + 1j * k * x)
    return ComplexField(grid, time, vals)


_ROUNDTRIPS = {}


def completeness(T_max):
    """Default completeness config at the given T_max: backward solve plus round trip."""
    if T_max not in _ROUNDTRIPS:
        from nlsscat.completeness import roundtrip

        start = time.perf_counter()
        cfg = RunConfig().completeness_config(T_max)
        _ROUNDTRIPS[T_max] = roundtrip(cfg)
        ELAPSED[("completeness", T_max)] = time.perf_counter() - start
    return _ROUNDTRIPS[T_max]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
