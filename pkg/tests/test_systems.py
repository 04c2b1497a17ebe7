import numpy as np
import pytest

from phblowup import induced
from phblowup.bump import BumpDiffeo, wrap
from phblowup.errors import AtlasError, GlueError, LogError
from phblowup.systems import ConnectedSum, ModelSystem, Suspension
from phblowup.verifier.gluing import seam_check, swap_commutation

from conftest import CAT, CPLX, CPLX_DOM, DIAG12, DIAG2, unit_rows


def blown_states(rng, sys, n, t_max=0.45):
    k = sys.k
    s = unit_rows(rng, n, k)
    t = rng.uniform(0.0, t_max, n)
    return np.concatenate([s, t[:, None], rng.uniform(0, 1, (n, sys.d))], axis=1)


def random_tangent(rng, sys, state):
    V = rng.standard_normal(state.shape)
    if sys.blown:
        s = state[:, : sys.k]
        V[:, : sys.k] -= np.sum(V[:, : sys.k] * s, axis=1, keepdims=True) * s
    return V


def state_fd(sys, state, V, h=1e-6):
    """Central differences of the step along V, with sphere and torus charts respected."""
    def at(u):
        x = state + u * V
        if sys.blown:
            x[:, : sys.k] /= np.linalg.norm(x[:, : sys.k], axis=1, keepdims=True)
        out, _ = sys.step(x, np.zeros(x.shape + (1,)))
        return out
    d = at(h) - at(-h)
    off = sys.state_dim - sys.d
    d[:, off:] -= np.round(d[:, off:])
    if not sys.blown:
        d[:, :off] -= np.round(d[:, :off])
    return d / (2 * h)


def test_bump_examples(rng):
    f = BumpDiffeo(DIAG12)
    x, J = f.eval(np.zeros(2))
    assert np.allclose(x, 0) and np.allclose(J[0], DIAG12)
    far = unit_rows(rng, 100, 2) * rng.uniform(0.4, 0.5, (100, 1))
    x, J = f.eval(far)
    assert np.allclose(x, far) and np.allclose(J, np.eye(2))
    pts = rng.uniform(-0.5, 0.5, (1000, 2))
    back, _ = f.inverse_eval(f.eval(pts)[0])
    assert np.max(np.abs(wrap(back - pts))) < 1e-8


def test_bump_requires_real_log():
    with pytest.raises(LogError):
        BumpDiffeo(np.diag([-2.0, -0.5]))


def test_bump_jacobian_fd(rng):
    f = BumpDiffeo(DIAG2)
    x = rng.uniform(-0.45, 0.45, (1000, 2))
    v = rng.standard_normal((1000, 2))
    h = 1e-6
    fd = wrap(f.eval(x + h * v)[0] - f.eval(x - h * v)[0]) / (2 * h)
    _, J = f.eval(x)
    an = np.einsum("nij,nj->ni", J, v)
    assert np.all(np.linalg.norm(an - fd, axis=1) <= 1e-5 * np.maximum(1, np.linalg.norm(an, axis=1)))


def test_product_fixed_fiber(rng):
    sys = ModelSystem(DIAG12, CAT)
    y = rng.uniform(0, 1, (10, 2))
    st = np.concatenate([np.zeros((10, 2)), y], axis=1)
    out, V = sys.step(st, np.broadcast_to(np.eye(4), (10, 4, 4)).copy())
    assert np.allclose(out[:, :2], 0) and np.allclose(out[:, 2:], np.mod(y @ CAT.T, 1))
    block = np.zeros((4, 4))
    block[:2, :2], block[2:, 2:] = DIAG12, CAT
    assert np.allclose(V, block)


def test_twisted_agrees_at_fixed_point(rng):
    plain, twisted = ModelSystem(DIAG12, CAT), ModelSystem(DIAG12, CAT, twist=0.1)
    st = np.concatenate([np.zeros((10, 2)), rng.uniform(0, 1, (10, 2))], axis=1)
    V = np.broadcast_to(np.eye(4), (10, 4, 4)).copy()
    a, b = plain.step(st, V), twisted.step(st, V)
    assert np.allclose(a[0], b[0]) and np.allclose(a[1], b[1])


def test_locally_fiberwise_core(rng):
    sys = ModelSystem(DIAG2, CAT, twist=0.2)
    x = unit_rows(rng, 500, 2) * rng.uniform(0, sys.core_radius, (500, 1))
    y = rng.uniform(0, 1, (500, 2))
    st = np.concatenate([x, y], axis=1)
    out, V = sys.step(st, np.broadcast_to(np.eye(4), (500, 4, 4)).copy())
    assert np.allclose(out[:, :2], x @ DIAG2.T, atol=1e-15)
    assert np.allclose(out[:, 2:], np.mod(y @ CAT.T, 1))
    assert np.allclose(V[:, :2, 2:], 0) and np.allclose(V[:, 2:, :2], 0)


@pytest.mark.parametrize("kind", ["product", "twisted", "blown", "blown-twisted", "blown-complex"])
def test_step_differential_fd(kind, rng):
    A = CPLX if kind == "blown-complex" else DIAG12
    sys = ModelSystem(A, CAT, twist=0.1 if "twisted" in kind else 0.0, blown=kind.startswith("blown"), eps=0.05)
    n = 1000
    if sys.blown:
        st = blown_states(rng, sys, n)
        st[:, sys.k] = np.maximum(st[:, sys.k], 1e-3)  # keep FD away from the t = 0 boundary
    else:
        st = np.concatenate([rng.uniform(-0.5, 0.5, (n, sys.k)), rng.uniform(0, 1, (n, sys.d))], axis=1)
    V = random_tangent(rng, sys, st)
    _, W = sys.step(st, V[..., None])
    an = W[..., 0]
    fd = state_fd(sys, st, V)
    err = np.linalg.norm(an - fd, axis=1) / np.maximum(1, np.linalg.norm(an, axis=1))
    assert err.max() <= 1e-5


def test_blown_exceptional_set_invariant(rng):
    sys = ModelSystem(DIAG12, CAT, blown=True, eps=0.05)
    st = blown_states(rng, sys, 50)
    st[:, 2] = 0.0
    out, _ = sys.step(st, np.zeros(st.shape + (1,)))
    assert np.allclose(out[:, :2], induced.proj_map(DIAG12, st[:, :2]))
    assert np.all(out[:, 2] == 0.0)
    assert np.allclose(out[:, 3:], np.mod(st[:, 3:] @ CAT.T, 1))


def test_blown_agrees_with_original_off_exceptional_set(rng):
    sys = ModelSystem(DIAG12, CAT, blown=True, eps=0.05, twist=0.1)
    plain = sys.unblown()
    xy = np.concatenate([rng.uniform(-0.5, 0.5, (500, 2)), rng.uniform(0, 1, (500, 2))], axis=1)
    xy = xy[np.linalg.norm(xy[:, :2], axis=1) > 1e-3]
    a, _ = plain.step(xy, np.zeros(xy.shape + (1,)))
    b, _ = sys.step(sys.lift(xy), np.zeros((len(xy), 5, 1)))
    assert np.max(np.abs(wrap(sys.base_point(b) - a[:, :2]))) < 1e-10
    assert np.max(np.abs(wrap(b[:, 3:] - a[:, 2:]))) < 1e-12


def test_blown_inverse_round_trip(rng):
    sys = ModelSystem(DIAG12, CAT, blown=True, eps=0.05, twist=0.1)
    st = blown_states(rng, sys, 500)
    fwd, _ = sys.step(st, np.zeros(st.shape + (1,)))
    back, _ = sys.step(fwd, np.zeros(st.shape + (1,)), inverse=True)
    assert np.allclose(back[:, :3], st[:, :3], atol=1e-8)
    assert np.max(np.abs(wrap(back[:, 3:] - st[:, 3:]))) < 1e-8


def test_blowup_radius_must_fit_core():
    with pytest.raises(AtlasError):
        ModelSystem(DIAG2, CAT, blown=True, eps=0.2)


def test_fiberwise_anosov_bands(rng):
    lam = (3 - np.sqrt(5)) / 2
    sys = ModelSystem(DIAG12, CAT, twist=0.1)
    st0 = np.concatenate([rng.uniform(-0.5, 0.5, (1000, 2)), rng.uniform(0, 1, (1000, 2))], axis=1)
    Es, Eu = sys.fiber_frames(1000)
    # the stable band is checked through the inverse map, where it expands
    st, Vs = st0, Es.copy()
    for _ in range(50):
        st, Vs = sys.step(st, Vs, inverse=True)
    st, Vu = st0, Eu.copy()
    for _ in range(50):
        st, Vu = sys.step(st, Vu)
    Ks = lam**-50 / np.linalg.norm(Vs[..., 0], axis=1)
    Ku = lam**50 / np.linalg.norm(Vu[..., 0], axis=1)
    assert Ks.max() <= 1 + 1e-6 and Ku.max() <= 1 + 1e-6
    assert np.abs(Vu[:, :2]).max() == 0.0  # fibers stay vertical


def test_default_ph_constants_satisfy_chain():
    from phblowup.speclin import spectral_rate_bounds
    for A in (DIAG12, CPLX_DOM):
        sys = ModelSystem(A, CAT)
        assert 0 < sys.ph.lam < 1 < sys.ph.mu
        assert spectral_rate_bounds(A).chain_holds(sys.ph.lam, sys.ph.mu)
    for A in (DIAG2, CPLX):
        bad = ModelSystem(A, CAT)
        assert not spectral_rate_bounds(A).chain_holds(bad.ph.lam, bad.ph.mu)


# -- connected sum ----------------------------------------------------------------
def test_glue_rejects_mismatch():
    a = ModelSystem(DIAG12, CAT, blown=True)
    with pytest.raises(GlueError):
        ConnectedSum(a, ModelSystem(DIAG12, CAT))
    with pytest.raises(GlueError):
        ConnectedSum(a, ModelSystem(np.diag([1.3, 1 / 1.3]), CAT, blown=True))
    with pytest.raises(GlueError):
        ConnectedSum(a, ModelSystem(DIAG12, [[1, 1], [1, 0]], blown=True))


def test_seam_boundary_point_same_from_both_sides(rng):
    sys = ModelSystem(DIAG12, CAT, blown=True, twist=0.1)
    cs = ConnectedSum(sys, sys)
    s = unit_rows(rng, 100, 2)
    y = rng.uniform(0, 1, (100, 2))
    tau = np.zeros(100)
    st = np.concatenate([s, tau[:, None], y], axis=1)
    for side in (0, 1):
        _, out, _ = cs.step(np.full(100, side), st, np.zeros(st.shape + (1,)))
        assert np.allclose(out[:, :2], induced.proj_map(DIAG12, s))
        assert np.all(out[:, 2] == 0)
        assert np.allclose(out[:, 3:], np.mod(y @ CAT.T, 1))


def test_collar_radial_matches_induced_map(rng):
    sys = ModelSystem(DIAG12, CAT, blown=True)
    cs = ConnectedSum(sys, sys)
    s = unit_rows(rng, 200, 2)
    y = rng.uniform(0, 1, (200, 2))
    tau = rng.uniform(-0.5, 0.5, 200) * cs.collar / np.linalg.norm(DIAG12, 2)
    s2, y2, tau2 = cs.glued_map_collar(s, y, tau)
    cs2, cy2, ctau2 = cs.collar_map(s, y, tau)
    _, t_ind = induced.induced_map_array(DIAG12, s, np.abs(tau))
    assert np.allclose(np.abs(tau2), t_ind, rtol=1e-12)
    assert np.allclose(tau2, ctau2, rtol=1e-12) and np.allclose(s2, cs2) and np.allclose(y2, cy2)
    with pytest.raises(AtlasError):
        cs.to_collar(np.zeros(1, int), np.array([[1.0, 0.0, 0.3, 0.1, 0.1]]))


def test_seam_and_double_symmetry():
    sys = ModelSystem(DIAG12, CAT, blown=True, twist=0.1)
    rep = seam_check(ConnectedSum(sys, sys), samples=200, seed=1)
    assert rep.one_sided_gap <= 1e-9 and rep.analytic_gap <= 1e-8 and rep.swap_gap <= 1e-10
    assert swap_commutation(ConnectedSum(sys, sys), 200, 3) == 0.0
    other = ModelSystem(DIAG12, CAT, blown=True)
    assert seam_check(ConnectedSum(sys, other), samples=100).swap_gap is None


# -- suspension -------------------------------------------------------------------
def test_suspension_time_one_and_half(rng):
    sys = ModelSystem(DIAG12, CAT, twist=0.1)
    susp = Suspension(sys)
    base = np.concatenate([rng.uniform(-0.5, 0.5, (20, 2)), rng.uniform(0, 1, (20, 2))], axis=1)
    st = np.concatenate([base, np.zeros((20, 1))], axis=1)
    V = np.broadcast_to(np.eye(5), (20, 5, 5)).copy()
    one, W1 = susp.flow(1.0, st, V)
    ref, Wref = sys.step(base, V[:, :4, :4].copy())
    assert np.allclose(one[:, :4], ref) and np.allclose(one[:, 4], 0)
    assert np.allclose(W1[:, :4, :4], Wref)
    half, Wh = susp.flow(0.5, st, V)
    assert np.allclose(half[:, :4], base) and np.allclose(half[:, 4], 0.5) and np.allclose(Wh, V)


def test_suspension_additivity_and_roof(rng):
    susp = Suspension(ModelSystem(DIAG12, CAT, twist=0.1))
    base = np.concatenate([rng.uniform(-0.5, 0.5, (100, 2)), rng.uniform(0, 1, (100, 2))], axis=1)
    st = np.concatenate([base, rng.uniform(0, 1, (100, 1))], axis=1)
    V = rng.standard_normal((100, 5, 1))
    for t, u in ((0.7, 1.6), (2.0, 3.0), (0.25, 0.5)):
        a, Va = susp.flow(t + u, st, V)
        b, Vb = susp.flow(u, *susp.flow(t, st, V))
        assert np.max(np.abs(wrap(a[:, :4] - b[:, :4]))) < 1e-9 and np.allclose(a[:, 4], b[:, 4], atol=1e-9)
        assert np.allclose(Va, Vb, rtol=1e-9, atol=1e-9)
    for t in (0.3, 1.0, 4.5):
        end, R = susp.flow(t, st, susp.roof_vector(100))
        assert np.allclose(np.linalg.norm(susp.to_orthonormal(end, R), axis=1), 1.0)
