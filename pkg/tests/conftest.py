import numpy as np
import pytest

from acquest.choice import Market
from acquest.datasets import desk_scale_partworths, desk_scale_space


@pytest.fixture(scope="session")
def desk_space():
    return desk_scale_space()


@pytest.fixture(scope="session")
def desk_truth():
    return desk_scale_partworths()


@pytest.fixture(scope="session")
def desk_market(desk_space):
    return desk_space.with_competitor(5).market()


@pytest.fixture()
def two_design_market():
    """Two designs with equal margins; the segment boundary is w1 = w2."""
    return Market(vectors=np.array([[1.0, 0.0], [0.0, 1.0]]),
                  prices=np.array([10.0, 10.0]),
                  costs=np.array([4.0, 4.0]),
                  competitor=np.array([0.0, 0.0]))


def batch_means_sem(series, n_batches: int = 40) -> float:
    """Autocorrelation-aware standard error of an MCMC trace mean."""
    series = np.asarray(series, dtype=float)
    usable = len(series) - len(series) % n_batches
    batches = series[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(batches.std(ddof=1) / np.sqrt(n_batches))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "nodeid", "").startswith("tests/test_acceptance.py::"):
                lines.append((report.nodeid.split("::")[-1], status.upper()))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status:>6}  {name}")
