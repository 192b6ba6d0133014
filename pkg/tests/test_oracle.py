import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inhomkde.kernel import ORDER4, RECTANGULAR
from inhomkde.models import make_model
from inhomkde.oracle import (
    PIECEWISE_DIFFERENTIABLE,
    PIECEWISE_HOLDER,
    UNBOUNDED_DENSITY,
    SmoothnessSpec,
    check_bias_dominated,
    h0_piecewise_holder,
    h0_pw_diff,
    h0_unbounded,
    kappa,
    oracle_bandwidth,
)

from helpers import bias_probe_grid


def holder(**kw):
    base = dict(kind=PIECEWISE_HOLDER, alpha=2, beta=0, irregularities=(0.0,))
    base.update(kw)
    return SmoothnessSpec(**base)


def pwdiff(**kw):
    base = dict(kind=PIECEWISE_DIFFERENTIABLE, alpha=2, beta=0, gamma=1.0, irregularities=(0.0,))
    base.update(kw)
    return SmoothnessSpec(**base)


def test_kappa_examples():
    assert kappa(holder(L=1, M=1), RECTANGULAR.norms) == pytest.approx(2.0)
    assert kappa(holder(L=2, M=1), RECTANGULAR.norms) == pytest.approx(8.0)
    assert kappa(pwdiff(L=1, M=1), RECTANGULAR.norms) == pytest.approx(8.0)


def test_kappa_uses_absolute_l1():
    k = kappa(holder(L=1, M=1), ORDER4.norms)
    assert k == pytest.approx((3 * math.sqrt(0.6) - 1) ** 2 / (9 / 8), rel=1e-10)


def test_holder_examples():
    spec = holder()
    # kappa n = 1024 by construction
    assert h0_piecewise_holder(0.0005, spec, 1024, 1.0) == pytest.approx(1 / 1024)
    assert h0_piecewise_holder(0.1, spec, 1024, 1.0) == pytest.approx(0.1)
    assert h0_piecewise_holder(0.5, spec, 1024, 1.0) == pytest.approx(0.25)


def test_holder_vectorised_and_symmetric():
    spec = holder()
    xs = np.linspace(-1, 1, 201)
    h = h0_piecewise_holder(xs, spec, 1024, 1.0)
    np.testing.assert_allclose(h, h[::-1])
    assert h.min() == pytest.approx(1 / 1024) and h.max() == pytest.approx(0.25)


@given(st.floats(0, 2), st.floats(0, 2))
def test_holder_monotone_in_distance(a, b):
    spec = holder()
    lo, hi = sorted((a, b))
    assert h0_piecewise_holder(lo, spec, 1024, 1.0) <= h0_piecewise_holder(hi, spec, 1024, 1.0)


def test_holder_without_irregularities_is_constant():
    spec = SmoothnessSpec(PIECEWISE_HOLDER, alpha=2)
    np.testing.assert_allclose(h0_piecewise_holder(np.array([-3.0, 0.0, 5.0]), spec, 1024, 1.0), 0.25,
                               rtol=1e-15)


def test_pw_diff_examples():
    spec = pwdiff()
    kn = 2.0**15
    assert h0_pw_diff(0.01, spec, kn, 1.0) == pytest.approx(0.005)
    want = 0.5 * kn ** (-1 / 5) * 0.5 ** 0.4
    assert want == pytest.approx(0.04737, abs=5e-6)
    assert h0_pw_diff(0.5, spec, kn, 1.0) == pytest.approx(want, rel=1e-12)
    assert h0_pw_diff(2.0, spec, kn, 1.0) == pytest.approx(1 / 16)


def test_pw_diff_inner_branch():
    spec = pwdiff()
    kn = 2.0**15
    assert h0_pw_diff(1e-6, spec, kn, 1.0) == pytest.approx(0.5 / kn)


def test_pw_diff_large_gamma_regime():
    # gamma > l - beta: three branches
    spec = pwdiff(alpha=2, beta=0.5, gamma=3.0)
    kn = 1e6
    t_zero = kn ** (-(1.5 / 3.0) / 2.0)
    t_beta = kn ** (-1 / 2.0)
    assert h0_pw_diff(0.5 * t_zero, spec, kn, 1.0) == pytest.approx(0.5 * t_beta)
    x = 2 * t_zero
    assert h0_pw_diff(x, spec, kn, 1.0) == pytest.approx(0.5 * kn ** (-0.2) * x ** (6 / 5))
    assert h0_pw_diff(5.0, spec, kn, 1.0) == pytest.approx(0.5 * kn ** (-0.2))


def test_unbounded_examples():
    spec = SmoothnessSpec(UNBOUNDED_DENSITY, alpha=1, eta=0.25)
    assert h0_unbounded(2.0, spec, 1000) == pytest.approx(0.1)
    want = (0.5 ** 2.25 / 1000) ** (1 / 3)
    assert want == pytest.approx(0.0595, abs=5e-5)
    assert h0_unbounded(0.5, spec, 1000) == pytest.approx(want, rel=1e-12)
    # the second and third branches meet at x = 1
    assert h0_unbounded(1.0, spec, 1000) == pytest.approx(h0_unbounded(1.0 + 1e-13, spec, 1000), rel=1e-11)
    b1 = 2000.0 ** (-1 / 0.75)
    assert h0_unbounded(b1 / 2, spec, 1000) == pytest.approx((b1 / 2) ** 0.5 / 1000)
    with pytest.raises(ValueError):
        h0_unbounded(0.0, spec, 1000)


def test_oracle_bandwidth_rejects_small_kappa_n():
    with pytest.raises(ValueError, match="kappa"):
        oracle_bandwidth(holder(L=0.01), 10, ORDER4)


@pytest.mark.parametrize("kw", [
    dict(beta=2.0),
    dict(beta=3.0),
    dict(irregularities=(0.0, 1e-14)),
    dict(alpha=-1.0),
    dict(L=0.0),
])
def test_invalid_holder_specs(kw):
    with pytest.raises(ValueError):
        holder(**kw)


def test_invalid_other_specs():
    with pytest.raises(ValueError):
        pwdiff(alpha=2.5)
    with pytest.raises(ValueError):
        pwdiff(gamma=None)
    with pytest.raises(ValueError):
        SmoothnessSpec(UNBOUNDED_DENSITY, alpha=1, eta=0.7)
    with pytest.raises(ValueError):
        SmoothnessSpec("Smooth", alpha=1)


def test_c0_and_distance():
    spec = holder(irregularities=(1.0, -1.0, 0.5))
    assert spec.irregularities == (-1.0, 0.5, 1.0)
    assert spec.c0 == pytest.approx(0.25)
    assert spec.distance(0.6).item() == pytest.approx(0.1)
    assert holder(irregularities=()).c0 == 1.0


def test_kv_roundtrip():
    spec = pwdiff(irregularities=(0.0, 1.0), gamma=3.9, L=1.1)
    assert SmoothnessSpec.from_kv({k: str(v) for k, v in spec.to_kv().items()}) == spec
    with pytest.raises(ValueError):
        SmoothnessSpec.from_kv({"kind": PIECEWISE_HOLDER, "alpha": "2", "colour": "red"})


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.5, 6.0), st.floats(10, 1e9), st.floats(-2, 2))
def test_holder_continuous_at_boundaries(beta_frac, alpha, kn, x0):
    beta = beta_frac / 3.0 * alpha * 0.999
    spec = holder(alpha=alpha, beta=beta, irregularities=(x0,))
    for t in (kn ** (-1 / (2 * beta + 1)), kn ** (-1 / (2 * alpha + 1))):
        left = h0_piecewise_holder(x0 + t, spec, kn, 1.0)
        right = h0_piecewise_holder(x0 + t * (1 + 1e-15) + 1e-15, spec, kn, 1.0)
        assert abs(left - right) <= 1e-12


@pytest.mark.parametrize("name", ["uniform", "sym_exponential"])
def test_bias_dominated(name):
    model = make_model(name)
    rep = check_bias_dominated(model, model.smoothness, ORDER4, 10**4, bias_probe_grid(model, 10**4, ORDER4))
    assert rep.passed, (rep.max_ratio, rep.worst_x)
    assert rep.max_ratio > 0.01  # the probes reach the irregularity


def test_bias_check_negative_control():
    # shrinking kappa widens h0 and the bias is no longer dominated
    model = make_model("sym_exponential")
    grid = bias_probe_grid(model, 10**4, ORDER4)
    rep = check_bias_dominated(model, model.smoothness, ORDER4, 10**4, grid, kappa_scale=1e-4)
    assert not rep.passed
    assert rep.max_ratio > 1
