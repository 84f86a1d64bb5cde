"""Exit criteria. Each test prints one PASS/FAIL line (also shown in the pytest summary).

Compiled kernels are warmed up on a tiny input before anything is timed, so
timings measure the algorithms rather than one-off JIT compilation.
"""

import time

import numpy as np
import pytest

from conftest import brute_edt, brute_surrounded, record
from spatial_mc import cli
from spatial_mc.checker import Checker, surrounded
from spatial_mc.distance import closed_form_dt, edt, graph_dt, percentage_error
from spatial_mc.formula import And, Atom, Near, Not, Or, Surrounded, parse_formula
from spatial_mc.grid import NeighborhoodSpec, VoxelGrid, dilate, make_model
from spatial_mc.phantom import dice, gbm_phantom, reference_script
from spatial_mc.texture import Histogram, cross_correlation, scmp_mask

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module", autouse=True)
def warm_up():
    s = np.zeros((5, 5), bool)
    s[2, 2] = True
    edt(s)
    graph_dt(s, NeighborhoodSpec.moore(2))
    closed_form_dt(s, "chessboard")
    surrounded(s, s, NeighborhoodSpec.moore(2))
    edt(np.zeros((3, 3, 3), bool))


def test_1_edt_oracle_equivalence():
    rng = np.random.default_rng(1)
    worst = 0.0
    elapsed = 0.0
    for i in range(50):
        if i % 2 == 0:
            shape = tuple(rng.integers(1, 65, 2))
        else:
            shape = tuple(rng.integers(1, 25, 3))
        density = rng.choice([0.001, 0.01, 0.1, 0.5])
        source = rng.random(shape) < density
        spacing = rng.uniform(0.5, 3.0, len(shape))
        t0 = time.perf_counter()
        got = edt(source, spacing)
        elapsed += time.perf_counter() - t0
        want = brute_edt(source, spacing)
        assert np.array_equal(np.isinf(got), np.isinf(want))
        fin = np.isfinite(want) & (want > 0)
        assert np.array_equal(got == 0, want == 0)
        if fin.any():
            worst = max(worst, float(np.max(np.abs(got[fin] - want[fin]) / want[fin])))
    ok = worst <= 1e-9 and elapsed < 10.0
    record("1 EDT oracle equivalence", ok,
           f"max rel err {worst:.2e} (<= 1e-9), edt time {elapsed:.3f} s (< 10 s)")
    assert ok


def _central_error(nb):
    n = 201
    s = np.zeros((n, n), bool)
    s[n // 2, n // 2] = True
    t0 = time.perf_counter()
    d = graph_dt(s, nb)
    d_e = edt(s)
    elapsed = time.perf_counter() - t0
    return float(percentage_error(d, d_e).max()), elapsed


def test_2a_chamfer_error_moore():
    err, elapsed = _central_error(NeighborhoodSpec.moore(2))
    ok = err <= 0.10 and elapsed < 5.0
    record("2a Chamfer error MOORE", ok, f"max delta {err:.4f} (<= 0.10), {elapsed:.3f} s (< 5 s)")
    assert ok


def test_2b_chamfer_error_extended2():
    err, elapsed = _central_error(NeighborhoodSpec.extended(2, 2))
    ok = err <= 0.02 and elapsed < 5.0
    record("2b Chamfer error EXTENDED(2)", ok, f"max delta {err:.4f} (<= 0.02), {elapsed:.3f} s (< 5 s)")
    assert ok


def test_3_metric_identities():
    rng = np.random.default_rng(3)
    moore = NeighborhoodSpec.moore(2).with_unit_weights()
    vn = NeighborhoodSpec.von_neumann(2).with_unit_weights()
    bad = 0
    for _ in range(20):
        shape = tuple(rng.integers(1, 33, 2))
        s = rng.random(shape) < rng.choice([0.005, 0.05, 0.3])
        s.flat[rng.integers(s.size)] = True
        bad += not np.array_equal(graph_dt(s, moore), closed_form_dt(s, "chessboard"))
        bad += not np.array_equal(graph_dt(s, vn), closed_form_dt(s, "cityblock"))
    record("3 metric identities", bad == 0, f"{40 - bad}/40 exact matches")
    assert bad == 0


def _random_symmetric_offsets(rng, ndim):
    pool = [o for o in np.ndindex(*(5,) * ndim)]
    pool = [tuple(c - 2 for c in o) for o in pool]
    pool = [o for o in pool if any(o) and o > tuple(-c for c in o)]
    k = rng.integers(1, len(pool) + 1)
    chosen = [pool[i] for i in rng.choice(len(pool), k, replace=False)]
    return NeighborhoodSpec(chosen + [tuple(-c for c in o) for o in chosen])


def test_4_surrounded_oracle():
    rng = np.random.default_rng(4)
    mismatches = 0
    for i in range(200):
        ndim = 1 + i % 3
        if ndim == 1:
            shape = (int(rng.integers(1, 101)),)
        elif ndim == 2:
            shape = tuple(rng.integers(1, 11, 2))
        else:
            shape = tuple(rng.integers(1, 5, 3))
        if i % 4 == 0:
            nb = NeighborhoodSpec.moore(ndim) if i % 8 == 0 else NeighborhoodSpec.von_neumann(ndim)
        else:
            nb = _random_symmetric_offsets(rng, ndim)
        assert nb.symmetric
        a = rng.random(shape) < rng.uniform(0.2, 0.9)
        b = rng.random(shape) < rng.uniform(0.0, 0.5)
        mismatches += not np.array_equal(surrounded(a, b, nb), brute_surrounded(a, b, nb.offsets))
    record("4 surrounded oracle", mismatches == 0, f"{200 - mismatches}/200 exact matches")
    assert mismatches == 0


def _random_formula(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return Atom(str(rng.choice(["a", "b"])), str(rng.choice(["<", "=", ">"])), float(rng.integers(0, 3)))
    kind = rng.integers(0, 5)
    if kind == 0:
        return Not(_random_formula(rng, depth - 1))
    if kind == 1:
        return Near(_random_formula(rng, depth - 1))
    cls = (And, Or, Surrounded)[kind - 2]
    return cls(_random_formula(rng, depth - 1), _random_formula(rng, depth - 1))


def test_5_logic_invariants():
    rng = np.random.default_rng(5)
    n = 120
    failures = {k: 0 for k in ("closure", "sandwich", "de_morgan", "scmp_monotone", "xcorr")}
    presets = [NeighborhoodSpec.moore(2), NeighborhoodSpec.von_neumann(2), NeighborhoodSpec.extended(2, 2)]
    for _ in range(n):
        shape = tuple(rng.integers(1, 12, 2))
        nb = presets[rng.integers(3)]
        a = rng.random(shape) < 0.3
        b = rng.random(shape) < 0.3
        ok = (not dilate(np.zeros(shape, bool), nb).any()
              and np.all(a <= dilate(a, nb))
              and np.array_equal(dilate(a | b, nb), dilate(a, nb) | dilate(b, nb)))
        failures["closure"] += not ok

        attrs = {k: rng.integers(0, 3, shape).astype(float) for k in "ab"}
        ck = Checker(make_model(VoxelGrid(shape, attributes=attrs), nb))
        f1, f2 = _random_formula(rng, 3), _random_formula(rng, 3)
        s = ck.check(Surrounded(f1, f2))
        failures["sandwich"] += not (np.all(ck.check(And(f1, f2)) <= s) and np.all(s <= ck.check(f1)))
        failures["de_morgan"] += not np.array_equal(ck.check(Not(And(Not(f1), Not(f2)))),
                                                    ck.check(f1) | ck.check(f2))

        values = rng.integers(0, 8, (12, 12)).astype(float)
        g = VoxelGrid(values.shape, attributes={"v": values})
        ref = rng.random(values.shape) < 0.2
        ref[0, 0] = True
        t1, t2 = np.sort(rng.uniform(-1, 1, 2))
        lo = scmp_mask(g, "v", ref, t1, 1, 8, 0, 8)
        hi = scmp_mask(g, "v", ref, t2, 1, 8, 0, 8)
        failures["scmp_monotone"] += not np.all(hi <= lo)

        ca = rng.integers(0, 10, 6)
        cb = rng.integers(0, 10, 6)
        ca[0] += 1
        cb[0] += 1
        ha, hb = Histogram(6, 0, 1, tuple(map(int, ca))), Histogram(6, 0, 1, tuple(map(int, cb)))
        r = cross_correlation(ha, hb)
        failures["xcorr"] += not (-1 <= r <= 1 and r == cross_correlation(hb, ha))
    ok = not any(failures.values())
    record("5 logic invariants", ok,
           f"{n} cases each; failures {failures}")
    assert ok


def test_6_phantom_segmentation(tmp_path):
    ph = gbm_phantom(seed=0)
    ph.save(tmp_path / "phantom.png")
    script = tmp_path / "gbm.txt"
    script.write_text(reference_script())
    t0 = time.perf_counter()
    code = cli.main(["run", str(script)])
    elapsed = time.perf_counter() - t0
    assert code == 0
    from spatial_mc.imgio import load_image2d
    tumor = load_image2d(tmp_path / "tumor.png")["intensity"] >= 128
    oedema = load_image2d(tmp_path / "oedema.png")["intensity"] >= 128
    d_t, d_o = dice(tumor, ph.tumor), dice(oedema, ph.oedema)
    ok = d_t >= 0.9 and d_o >= 0.9 and elapsed < 30.0
    record("6 phantom segmentation", ok,
           f"Dice tumor {d_t:.4f}, oedema {d_o:.4f} (>= 0.9), {elapsed:.2f} s (< 30 s)")
    assert ok


def _time_check(size, rng, repeats=3):
    model = make_model(rng.integers(0, 256, (size, size)).astype(float))
    f = parse_formula("D[z <= 20](intensity > 128)")
    best = np.inf
    for _ in range(repeats):
        ck = Checker(model)
        t0 = time.perf_counter()
        ck.check(f)
        best = min(best, time.perf_counter() - t0)
    return best


def test_7_scaling():
    rng = np.random.default_rng(7)
    small = _time_check(256, rng)
    large = _time_check(512, rng)
    ratio = large / small
    ok = ratio <= 6.0
    record("7 linear scaling", ok, f"256^2 {small:.4f} s, 512^2 {large:.4f} s, ratio {ratio:.2f} (<= 6)")
    assert ok


def test_8_determinism(tmp_path):
    ph = gbm_phantom(seed=8)
    outputs = {}
    for run, threads in (("a", "1"), ("b", "1"), ("c", "8")):
        d = tmp_path / run
        d.mkdir()
        ph.save(d / "phantom.png")
        (d / "gbm.txt").write_text(reference_script())
        assert cli.main(["run", str(d / "gbm.txt"), "--threads", threads]) == 0
        outputs[run] = {p.name: p.read_bytes() for p in sorted(d.glob("*.png")) if p.name != "phantom.png"}
    same = outputs["a"] == outputs["b"] == outputs["c"] and len(outputs["a"]) == 3
    record("8 determinism", same, f"{len(outputs['a'])} output files identical across 3 runs (threads 1,1,8)")
    assert same
