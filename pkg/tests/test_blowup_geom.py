import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phblowup.blowup_geom import (
    BlowTangent, PolarPoint, WarpedMetricFamily, blow_down, blow_up, flat_norm, metric_norm, pushforward,
    rho_profile, rho_second_derivative, warped_norm,
)
from phblowup.errors import ExceptionalPointError, RangeError, TangencyError

from conftest import tangent_rows, unit_rows


def test_rho_examples():
    assert rho_profile(0.1, 0.03) == (pytest.approx(0.1), pytest.approx(0.0))
    assert rho_profile(0.1, 0.2) == (pytest.approx(0.2), pytest.approx(1.0))
    v, _ = rho_profile(0.1, 0.075)
    assert 0.075 <= v <= 0.1


def test_rho_range_error():
    with pytest.raises(RangeError):
        rho_profile(0.3, 0.1)
    with pytest.raises(RangeError):
        WarpedMetricFamily(0.0)


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05, 0.025])
def test_rho_is_c2_and_sandwiched(eps):
    t = np.linspace(eps / 2, eps, 2001)
    v, d = rho_profile(eps, t)
    assert np.all(v >= t - 1e-15) and np.all(v <= eps + 1e-15)
    for edge in (eps / 2, eps):
        h = 1e-9 * eps
        v0, d0 = rho_profile(eps, [edge - h, edge + h])
        assert abs(v0[1] - v0[0]) < 1e-8 * eps
        assert abs(d0[1] - d0[0]) < 1e-6
        dd = rho_second_derivative(eps, np.array([edge - h, edge + h]))
        assert abs(dd[1] - dd[0]) < 1e-4 / eps
    # derivative against central differences
    h = 1e-7
    fd = (rho_profile(eps, t + h)[0] - rho_profile(eps, t - h)[0]) / (2 * h)
    assert np.allclose(fd, d, atol=1e-6)


def test_metric_norm_examples():
    fam = WarpedMetricFamily(0.1)
    e = np.array([0.0, 1.0])
    assert metric_norm(fam, BlowTangent(PolarPoint([1.0, 0.0], 0.3), 0.0, e)) == pytest.approx(0.3)
    assert metric_norm(fam, BlowTangent(PolarPoint([1.0, 0.0], 0.02), 0.0, e)) == pytest.approx(0.1)
    for t in (0.0, 0.07, 0.5):
        assert metric_norm(fam, BlowTangent(PolarPoint([1.0, 0.0], t), -2.0, [0.0, 0.0])) == pytest.approx(2.0)


def test_blow_down_examples():
    assert np.allclose(blow_down(PolarPoint([1.0, 0.0], 0.5)), [0.5, 0.0])
    assert np.allclose(blow_down(PolarPoint([0.0, 1.0], 0.0)), [0.0, 0.0])
    r = 1 / np.sqrt(2)
    assert np.allclose(blow_down(PolarPoint([r, r], 0.2)), [0.2 * r, 0.2 * r])


def test_blow_up_examples():
    p = blow_up([0.5, 0.0])
    assert np.allclose(p.s, [1, 0]) and p.t == pytest.approx(0.5)
    p = blow_up([0.0, -0.3])
    assert np.allclose(p.s, [0, -1]) and p.t == pytest.approx(0.3)
    with pytest.raises(ExceptionalPointError):
        blow_up([0.0, 0.0])


def test_tangency_enforced():
    with pytest.raises(TangencyError):
        BlowTangent(PolarPoint([1.0, 0.0], 0.1), 0.0, [1.0, 0.0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-0.99, 0.99), min_size=3, max_size=3))
def test_blow_round_trip(x):
    x = np.array(x)
    if np.linalg.norm(x) < 1e-6:
        return
    assert np.allclose(blow_down(blow_up(x)), x, atol=1e-12)


def test_isometry_and_product_regions(rng):
    eps = 0.05
    n = 10_000
    s = unit_rows(rng, n, 3)
    v_s = tangent_rows(rng, s)
    v_t = rng.standard_normal(n)
    # isometry for t >= eps: compare against finite-difference pushforward
    t = rng.uniform(eps, 0.9, n)
    h = 1e-6
    def curve(u):
        ss = s + u * v_s
        ss /= np.linalg.norm(ss, axis=1, keepdims=True)
        return blow_down((ss, t + u * v_t))
    fd = (curve(h) - curve(-h)) / (2 * h)
    rel = np.abs(np.linalg.norm(fd, axis=1) - warped_norm(eps, t, v_s, v_t)) / warped_norm(eps, t, v_s, v_t)
    assert rel.max() < 1e-6
    assert np.allclose(np.linalg.norm(pushforward(s, t, v_s, v_t), axis=1), warped_norm(eps, t, v_s, v_t), rtol=1e-12)
    # exact product form for t < eps/2
    t = rng.uniform(0, eps / 2, n) * 0.999
    exact = np.sqrt(v_t**2 + eps**2 * np.sum(v_s**2, axis=1))
    assert np.max(np.abs(warped_norm(eps, t, v_s, v_t) - exact)) <= 1e-12


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05, 0.025])
def test_transition_ratio_bounded(eps, rng):
    t = rng.uniform(eps / 2, eps, 5000)
    s = unit_rows(rng, 5000, 2)
    v_s, v_t = tangent_rows(rng, s), rng.standard_normal(5000)
    r = warped_norm(eps, t, v_s, v_t) / flat_norm(t, v_s, v_t)
    assert r.min() >= 1.0 - 1e-15 and r.max() <= 2.0 + 1e-12


def test_antipodal_consistency(rng):
    s = unit_rows(rng, 500, 3)
    v_s = tangent_rows(rng, s)
    t, v_t = rng.uniform(0, 0.9, 500), rng.standard_normal(500)
    assert np.array_equal(warped_norm(0.1, t, v_s, v_t), warped_norm(0.1, t, -v_s, v_t))
