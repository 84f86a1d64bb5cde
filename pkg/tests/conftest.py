"""Independent reference implementations used as test oracles.

These are deliberately naive: brute-force minima, forward path search,
pure-Python histograms. They share no code with the package.
"""

import itertools
import math
import statistics
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")


def brute_edt(source, spacing):
    source = np.asarray(source, bool)
    pts = np.argwhere(source).astype(float)
    out = np.full(source.shape, np.inf)
    if len(pts) == 0:
        return out
    sp = np.asarray(spacing, float)
    coords = np.indices(source.shape).reshape(source.ndim, -1).T.astype(float)
    best = np.full(len(coords), np.inf)
    for chunk in np.array_split(pts, max(1, len(pts) // 256)):
        diff = (coords[:, None, :] - chunk[None, :, :]) * sp
        best = np.minimum(best, (diff ** 2).sum(-1).min(1))
    return np.sqrt(best).reshape(source.shape)


def brute_surrounded(a, b, offsets):
    """x is kept iff x in A and no forward path avoiding B reaches a point outside A."""
    a = np.asarray(a, bool)
    b = np.asarray(b, bool)
    shape = a.shape
    result = np.zeros(shape, bool)
    for x in itertools.product(*map(range, shape)):
        if not a[x]:
            continue
        if b[x]:
            result[x] = True
            continue
        seen = {x}
        stack = [x]
        escaped = False
        while stack and not escaped:
            u = stack.pop()
            for o in offsets:
                v = tuple(c + d for c, d in zip(u, o))
                if not all(0 <= c < n for c, n in zip(v, shape)) or v in seen:
                    continue
                if b[v]:
                    continue
                if not a[v]:
                    escaped = True
                    break
                seen.add(v)
                stack.append(v)
        result[x] = not escaped
    return result


def py_bin(v, nbins, vmin, vmax):
    width = (vmax - vmin) / nbins
    k = 0
    while k < nbins - 1 and v >= vmin + (k + 1) * width:
        k += 1
    return k


def py_correlation(counts_a, counts_b):
    ta, tb = sum(counts_a), sum(counts_b)
    fa = [c / ta for c in counts_a]
    fb = [c / tb for c in counts_b]
    if len(set(counts_a)) == 1 or len(set(counts_b)) == 1:
        return 1.0 if all(math.isclose(p, q) for p, q in zip(fa, fb)) else 0.0
    return statistics.correlation(fa, fb)


def brute_similarity(values, ref_counts, radius, nbins, vmin, vmax):
    values = np.asarray(values)
    out = np.zeros(values.shape)
    for x in itertools.product(*map(range, values.shape)):
        counts = [0] * nbins
        ranges = [range(max(c - radius, 0), min(c + radius + 1, n)) for c, n in zip(x, values.shape)]
        for y in itertools.product(*ranges):
            counts[py_bin(float(values[y]), nbins, vmin, vmax)] += 1
        out[x] = py_correlation(counts, ref_counts)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
