import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phblowup.errors import HyperbolicityError, SlackError
from phblowup.speclin import (
    schur_normal_form,
    check_domination, hyperbolic_matrix, require_chain, spectral_rate_bounds, stable_unstable_bases,
)

from conftest import CAT, CPLX, DIAG12, DIAG2

GOLD_HI = (3 + np.sqrt(5)) / 2
GOLD_LO = (3 - np.sqrt(5)) / 2


def test_rate_bounds_diagonal():
    b = spectral_rate_bounds(DIAG2, 0.1)
    assert b.tau == pytest.approx(0.4) and b.nu == pytest.approx(2.1)
    b = spectral_rate_bounds(DIAG2, 0.0)
    assert (b.tau, b.nu) == (0.5, 2.0)


def test_rate_bounds_cat_map():
    b = spectral_rate_bounds(CAT, 0.01)
    assert b.tau == pytest.approx(GOLD_LO - 0.01, abs=1e-12)
    assert b.nu == pytest.approx(GOLD_HI + 0.01, abs=1e-12)
    assert b.tau == pytest.approx(0.37197, abs=1e-5)


def test_slack_limits():
    with pytest.raises(SlackError):
        spectral_rate_bounds(DIAG2, 0.5)
    with pytest.raises(SlackError):
        spectral_rate_bounds(DIAG2, -0.1)
    b = spectral_rate_bounds(DIAG12)
    assert b.xi == pytest.approx(0.05 * (1 - 1 / 1.2))


def test_domination_examples():
    ok = check_domination(DIAG12, CAT)
    assert ok.passed
    assert ok.base_ratio_up == pytest.approx(1.44) and ok.fiber_min_expand == pytest.approx(GOLD_HI)
    assert ok.base_ratio_down == pytest.approx(1 / 1.44) and ok.fiber_max_contract == pytest.approx(GOLD_LO)
    assert (ok.lambda_prime, ok.mu_prime) == pytest.approx((1 / 1.2, 1.2))
    bad = check_domination(DIAG2, CAT)
    assert not bad.passed and bad.base_ratio_up == pytest.approx(4.0)


def test_unit_modulus_rejected():
    with pytest.raises(HyperbolicityError):
        hyperbolic_matrix(np.diag([1 + 1e-10, 1 - 1e-10]))
    with pytest.raises(HyperbolicityError):
        check_domination(np.eye(2), CAT)


def test_chain_requirement():
    b = spectral_rate_bounds(DIAG12)
    require_chain(b, 0.5, 2.0)
    assert b.delta1(0.5, 2.0) > 0
    with pytest.raises(HyperbolicityError):
        require_chain(spectral_rate_bounds(DIAG2), 0.38, 2.6)


def test_complex_moduli():
    A = hyperbolic_matrix(np.diag([2 * np.exp(0.4j), 0.5j]))
    assert A.is_complex and A.real_form().shape == (4, 4)
    assert (A.spec_min, A.spec_max) == pytest.approx((0.5, 2.0))


def test_stable_unstable_bases_invariant():
    Es, Eu = stable_unstable_bases(CAT)
    for E, lam in ((Es, GOLD_LO), (Eu, GOLD_HI)):
        assert np.allclose(CAT @ E, lam * E, atol=1e-12)


matrices = st.lists(st.floats(-3, 3), min_size=9, max_size=9).map(lambda v: np.array(v).reshape(3, 3))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_spec_min_is_inverse_spec_max(M):
    try:
        A = hyperbolic_matrix(M)
    except HyperbolicityError:
        return
    if np.linalg.cond(M) > 1e8:
        return
    assert A.spec_min == pytest.approx(1.0 / A.inverse().spec_max, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_domination_conjugation_invariant(seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    for A in (DIAG12, DIAG2):
        a = check_domination(A, CAT)
        b = check_domination(Q @ A @ Q.T, CAT)
        assert a.passed == b.passed
        assert a.base_ratio_up == pytest.approx(b.base_ratio_up, rel=1e-10)


@pytest.mark.parametrize("A", [CAT, DIAG2, CPLX, [[1.5, 2.0], [0.1, 0.9]]])
def test_schur_form_is_unitarily_conjugate_stable_first(A):
    T = schur_normal_form(A)
    A = np.asarray(A)
    assert T.is_complex == np.iscomplexobj(A)
    assert np.allclose(np.linalg.svd(T.entries, compute_uv=False), np.linalg.svd(A, compute_uv=False))
    assert abs(T.entries[0, 0]) < 1 and abs(T.entries[-1, -1]) > 1
    assert np.allclose(np.tril(T.entries, -1), 0)
