import numpy as np
import pytest

from olmse.data import GaussianMixtureSpec, sample_gaussian_mixture, unit_circle_means

FD_STEP = 1e-5


def central_diff(f, x, h=FD_STEP):
    """Numerical gradient of scalar f at x by central differences, one coordinate at a time."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in np.ndindex(x.shape):
        orig = x[i]
        x[i] = orig + h
        up = f(x)
        x[i] = orig - h
        down = f(x)
        x[i] = orig
        grad[i] = (up - down) / (2 * h)
    return grad


def max_rel_err(analytic, numeric, floor=1e-8):
    """max |a - n| / max(|a|, |n|, floor); the floor only guards exact zeros."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom))


def trend_splits(seed, val_per_class=5):
    """The 3-class, 2-D mixture used for the trend experiment."""
    spec = GaussianMixtureSpec(3, 2, unit_circle_means(3), 0.6, seed=seed)
    train = sample_gaussian_mixture(spec, [1000, 100, 20], stream=0)
    val = sample_gaussian_mixture(spec, [val_per_class] * 3, stream=1)
    test = sample_gaussian_mixture(spec, [500] * 3, stream=2)
    return train, val, test


@pytest.fixture
def blobs():
    """Two well separated classes, 100 points each."""
    spec = GaussianMixtureSpec(2, 2, [[-3.0, 0.0], [3.0, 0.0]], 0.5, seed=7)
    return sample_gaussian_mixture(spec, [100, 100])


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line per acceptance criterion; they are echoed in the summary."""
    def _record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} ({detail})"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
