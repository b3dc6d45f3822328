import numpy as np
import pytest

from levyou import PowerLaw, stable_model
from levyou.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(12345)


@pytest.fixture
def example_model():
    # alpha = 1, sigma_n = n^-0.75, gamma_n = n^2, z_n = n^-1
    return stable_model(1.0, PowerLaw(1, -0.75), PowerLaw(1, 2), PowerLaw(1, -1))


def zscore(mean, target, se):
    return abs(mean - target) / se


@pytest.fixture
def close_in_se():
    def check(samples, target, k=3.0):
        x = np.asarray(samples, dtype=float)
        se = x.std(ddof=1) / np.sqrt(x.size)
        assert abs(x.mean() - target) <= k * se, (x.mean(), target, se)
    return check


def pytest_configure(config):
    config.acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.acceptance_lines

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" ({detail})" if detail else "")
        lines[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
