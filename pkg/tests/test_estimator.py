import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import inhomkde.estimator as est_mod
from inhomkde.estimator import (
    EvaluationGrid,
    Sample,
    convolve_density,
    estimate_many,
    fixed_estimate,
    load_sample,
    naive_estimate,
    variable_estimate,
    write_sample,
)
from inhomkde.kernel import EPANECHNIKOV, GAUSSIAN, ORDER4, RECTANGULAR, Kernel
from inhomkde.models import make_model
from inhomkde.oracle import oracle_bandwidth


def brute(values, kernel, h, x):
    values = np.asarray(values, dtype=float)
    return float(np.sum(kernel.evaluate((values - x) / h))) / (values.size * h)


def test_single_point_examples():
    assert fixed_estimate(Sample([0.0]), RECTANGULAR, 1.0, 0.0) == pytest.approx(0.5)
    assert fixed_estimate(Sample([0.0]), ORDER4, 0.1, 5.0) == 0.0
    assert fixed_estimate(Sample([-0.5, 0.5]), RECTANGULAR, 1.0, 0.0) == pytest.approx(0.5)


def test_sample_is_sorted_and_readonly():
    s = Sample([3.0, -1.0, 2.0])
    assert list(s.values) == [-1.0, 2.0, 3.0]
    with pytest.raises(ValueError):
        s.values[0] = 5.0


@pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")]])
def test_sample_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        Sample(bad)


@pytest.mark.parametrize("kernel", [RECTANGULAR, EPANECHNIKOV, ORDER4, GAUSSIAN])
def test_windowed_matches_full_sum(kernel):
    rng = np.random.default_rng(1)
    n = 5000
    smp = Sample(rng.standard_normal(n))
    xs = rng.uniform(-4, 4, 1000)
    hs = rng.uniform(1e-3, 1.0, 1000)
    fast = estimate_many(smp, kernel, hs, xs)
    slow = np.array([brute(smp.values, kernel, h, x) for h, x in zip(hs, xs)])
    # tolerance scales with n, compared on the unnormalised sums
    assert np.max(np.abs(fast - slow) * n * hs) <= 1e-12 * n


def test_naive_estimate_agrees():
    smp = Sample(np.linspace(-1, 1, 101))
    assert naive_estimate(smp, ORDER4, 0.3, 0.1) == pytest.approx(fixed_estimate(smp, ORDER4, 0.3, 0.1), abs=1e-14)


def test_generic_kernel_path_matches_compiled():
    generic = Kernel("order4-generic", order=4, func=ORDER4.func)
    rng = np.random.default_rng(2)
    smp = Sample(rng.standard_normal(2000))
    xs = np.linspace(-3, 3, 301)
    np.testing.assert_allclose(estimate_many(smp, generic, 0.2, xs), estimate_many(smp, ORDER4, 0.2, xs),
                               rtol=0, atol=1e-13)


def test_compensated_path(monkeypatch):
    rng = np.random.default_rng(3)
    smp = Sample(rng.uniform(-1, 1, 4000))
    xs = np.linspace(-1, 1, 51)
    plain = estimate_many(smp, ORDER4, 0.5, xs)
    monkeypatch.setattr(est_mod, "COMPENSATED_THRESHOLD", 10)
    comp = estimate_many(smp, ORDER4, 0.5, xs)
    np.testing.assert_allclose(comp, plain, rtol=0, atol=1e-13)


@pytest.mark.parametrize("kernel", [RECTANGULAR, EPANECHNIKOV, ORDER4])
def test_estimate_integrates_to_one(kernel):
    smp = Sample(np.random.default_rng(4).standard_normal(3000))
    h = 0.3
    xs = np.linspace(smp.values[0] - 1.1 * h, smp.values[-1] + 1.1 * h, 40001)
    assert np.trapezoid(estimate_many(smp, kernel, h, xs), xs) == pytest.approx(1.0, abs=1e-3)


def test_bandwidth_outside_unit_interval_names_point():
    smp = Sample([0.0, 1.0])
    with pytest.raises(ValueError, match="x=0.5"):
        estimate_many(smp, ORDER4, [0.1, 2.0], [0.0, 0.5])
    with pytest.raises(ValueError):
        estimate_many(smp, ORDER4, 0.0, [0.0])
    assert estimate_many(smp, GAUSSIAN, 2.0, [0.0], allow_above_one=True)[0] > 0


def test_variable_constant_equals_fixed():
    smp = Sample(np.random.default_rng(5).standard_normal(1000))
    grid = EvaluationGrid.uniform(-2, 2, 81)
    got = variable_estimate(smp, ORDER4, lambda x: 0.25, grid)
    np.testing.assert_array_equal(got, estimate_many(smp, ORDER4, 0.25, grid.points))


def test_variable_oracle_profile_matches_double_loop():
    model = make_model("uniform")
    smp = Sample(model.draw(np.random.default_rng(6), 2000))
    hfun = oracle_bandwidth(model.smoothness, smp.n, ORDER4)
    grid = EvaluationGrid.uniform(-1.5, 1.5, 121, extra=model.irregularities)
    got = variable_estimate(smp, ORDER4, hfun, grid)
    want = np.empty(len(grid))
    for i, x in enumerate(grid.points):
        h = hfun(x)
        acc = 0.0
        for xi in smp.values:
            u = (xi - x) / h
            acc += (9 / 8 - 15 / 8 * u * u) if abs(u) <= 1 else 0.0
        want[i] = acc / (smp.n * h)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


def test_variable_scalar_hfun_and_empty_window():
    smp = Sample([0.0, 0.1])
    grid = EvaluationGrid.uniform(0.0, 10.0, 3)
    got = variable_estimate(smp, RECTANGULAR, lambda x: 0.5 if x < 1 else 0.25, grid)
    assert got[0] > 0
    assert got[1] == 0.0 and got[2] == 0.0


def test_evaluation_grid_validation():
    with pytest.raises(ValueError):
        EvaluationGrid(np.array([0.0]), (0, 1))
    with pytest.raises(ValueError):
        EvaluationGrid(np.array([0.0, 0.0]), (0, 1))
    with pytest.raises(ValueError):
        EvaluationGrid(np.array([0.0, 2.0]), (0, 1))
    g = EvaluationGrid.uniform(-1, 1, 5, extra=[0.3, 7.0])
    assert 0.3 in g.points and 7.0 not in g.points and len(g) == 6


def test_convolve_constant_region():
    pdf = lambda x: np.where(np.abs(x) < 10, 0.05, 0.0)  # noqa: E731
    assert convolve_density(pdf, ORDER4, 0.5, 1.0) == pytest.approx(0.05, abs=1e-12)


def test_convolve_uniform_at_boundary():
    # overlap of [x - h, x + h] = [0.5, 1.5] with [-1, 1] has length 0.5
    pdf = lambda x: np.where(np.abs(x) <= 1, 0.5, 0.0)  # noqa: E731
    overlap = min(1.0, 1.5) - max(-1.0, 0.5)
    want = 0.5 * 0.5 * overlap / 0.5
    assert want == 0.25
    got = convolve_density(pdf, RECTANGULAR, 0.5, 1.0, points=[-1.0, 1.0])
    assert got == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.7, -1.3])
def test_convolve_normal_small_bandwidth(x):
    # second-order kernel: bias ~ mu2 h^2 f''(x) / 2
    h = 0.01
    got = convolve_density(stats.norm.pdf, EPANECHNIKOV, h, x)
    assert abs(got - stats.norm.pdf(x)) <= 0.2 * h * h


def test_convolve_order4_bias_is_fourth_order():
    e1 = abs(convolve_density(stats.norm.pdf, ORDER4, 0.2, 0.3) - stats.norm.pdf(0.3))
    e2 = abs(convolve_density(stats.norm.pdf, ORDER4, 0.1, 0.3) - stats.norm.pdf(0.3))
    assert e1 / e2 == pytest.approx(16, rel=0.05)


def test_convolve_rejects_bad_bandwidth():
    with pytest.raises(ValueError):
        convolve_density(stats.norm.pdf, ORDER4, 0.0, 0.0)


def test_sample_file_roundtrip(tmp_path):
    p = tmp_path / "s.txt"
    vals = [0.1, -3.5, 1e-300, 2.0 / 3.0]
    write_sample(vals, p)
    assert list(load_sample(p).values) == sorted(vals)
    p.write_text("# header\n1.5\n\n  -2\n", encoding="utf-8")
    assert list(load_sample(p).values) == [-2.0, 1.5]


@pytest.mark.parametrize("text,line", [("1\nabc\n", 2), ("1\n2\nnan\n", 3)])
def test_load_sample_reports_line(tmp_path, text, line):
    p = tmp_path / "bad.txt"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(ValueError, match=f":{line}:"):
        load_sample(p)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=50), st.floats(0.01, 1.0), st.floats(-6, 6))
def test_estimate_matches_brute_force_property(values, h, x):
    smp = Sample(values)
    assert fixed_estimate(smp, ORDER4, h, x) == pytest.approx(brute(smp.values, ORDER4, h, x),
                                                              abs=1e-12 / h)
    assert math.isfinite(fixed_estimate(smp, ORDER4, h, x))
