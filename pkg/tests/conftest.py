from __future__ import annotations

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polypin.geometry import AxisPoints, Domain, PlanarConfig, sample_poisson_in_domain

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def scenery(seed: int, n: float = 10.0, intensity: float = 0.8, max_points: int | None = None):
    """Poisson scenery in Triangle(n), optionally truncated to its first points."""
    d = Domain.triangle(n)
    cfg = sample_poisson_in_domain(d, intensity, np.random.default_rng(seed))
    if max_points is not None and len(cfg) > max_points:
        cfg = PlanarConfig(cfg.points[:max_points])
    return d, cfg


def axis_points(rng: np.random.Generator, n: float, k: int) -> AxisPoints:
    times = np.unique(rng.uniform(0.0, n, k))
    return AxisPoints(times)


@pytest.fixture
def golden_dir():
    return GOLDEN


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
