import math

import numpy as np
import pytest

from ordmatch.core import Instance


def trial_weights(inst, draw, trials):
    """Weights of ``trials`` matchings returned by ``draw(t)``."""
    return np.array([sum(inst.weights[x, y] for x, y in draw(t).pairs) for t in range(trials)])


def within_sigma(samples, target, k=4.0):
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1)) / math.sqrt(len(samples))
    return abs(mean - target) <= k * se + 1e-12, mean, se


@pytest.fixture
def diag2():
    return Instance([[2.0, 1.0], [1.0, 2.0]])


@pytest.fixture
def ones2():
    return Instance([[1.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def criterion(request):
    """Record one acceptance line; returns a callable (ok, detail)."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
