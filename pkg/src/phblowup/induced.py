"""The map induced by a linear A on the spherical blow-up.

In polar coordinates the induced map is the skew product

    (s, t) -> (A s / |A s|, |A s| t),

with the radial factor a(s) = |A s|. A complex-linear A is handled through
its real form acting on R^2k = C^k; the sphere S^{2k-1} and the polar
coordinates are the same, only the metric changes (see :mod:`cplx_geom`).

Everything is vectorized over leading batch axes of s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blowup_geom import PolarPoint, BlowTangent, project_tangent
from .errors import DomainEscape, TangencyError
from .speclin import HyperbolicMatrix, as_hyperbolic

TANGENT_TOL = 1e-10


def _real(A) -> np.ndarray:
    if isinstance(A, HyperbolicMatrix):
        return A.real_form()
    A = np.asarray(A)
    if np.iscomplexobj(A):
        return as_hyperbolic(A).real_form()
    return A.astype(float)


def _apply(M, v):
    return np.einsum("ij,...j->...i", M, v)


def radial_factor(A, s):
    """a(s) = |A s| and its spherical gradient P_{s-perp}(A^T A s / |A s|)."""
    M = _real(A)
    s = np.asarray(s, dtype=float)
    As = _apply(M, s)
    a = np.linalg.norm(As, axis=-1)
    grad = project_tangent(s, _apply(M.T, As) / a[..., None])
    return a, grad


def proj_map(A, s):
    M = _real(A)
    As = _apply(M, np.asarray(s, dtype=float))
    return As / np.linalg.norm(As, axis=-1, keepdims=True)


def _check_tangent(s, v):
    if np.any(np.abs(np.sum(s * v, axis=-1)) > TANGENT_TOL * np.maximum(1.0, np.linalg.norm(v, axis=-1))):
        raise TangencyError("vector is not tangent to the sphere at s")


def proj_diff(A, s, v, check=True):
    """Differential of the projectivized map: P_{(As)^perp}(A v / |A s|)."""
    M = _real(A)
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    if check:
        _check_tangent(s, v)
    As = _apply(M, s)
    a = np.linalg.norm(As, axis=-1, keepdims=True)
    return project_tangent(As / a, _apply(M, v) / a)


def proj_diff_matrix(A, s):
    """Ambient matrix of the projectivized differential at s, shape (..., k, k)."""
    M = _real(A)
    s = np.asarray(s, dtype=float)
    As = _apply(M, s)
    a = np.linalg.norm(As, axis=-1)
    u = As / a[..., None]
    k = M.shape[0]
    P = np.eye(k) - u[..., :, None] * u[..., None, :]
    return P @ M / a[..., None, None]


@dataclass(frozen=True)
class CocycleEval:
    value: np.ndarray
    gradient: np.ndarray
    steps: int


def cocycle(A, s, n: int) -> CocycleEval:
    """Radial cocycle a(s) a(Âs) ... a(Â^{n-1}s) and its gradient on the sphere.

    The gradient is assembled by the product rule,
        sum_i (value / a(Â^i s)) (DÂ^i_s)^T grad a(Â^i s),
    so it is independent of the closed form |A^n s|.
    """
    if n < 0:
        raise ValueError("n must be >= 0; pass the inverse matrix for backward iterates")
    M = _real(A)
    s = np.asarray(s, dtype=float)
    k = M.shape[0]
    batch = s.shape[:-1]
    value = np.ones(batch)
    grad_terms = []
    D = np.broadcast_to(np.eye(k), batch + (k, k)).copy()  # DÂ^i at s, ambient
    cur = s
    factors = []
    for _ in range(n):
        a, ga = radial_factor(M, cur)
        factors.append(a)
        # contribution (DÂ^i)^T grad a, still to be scaled by value / a
        grad_terms.append(np.einsum("...ji,...j->...i", D, ga))
        value = value * a
        D = proj_diff_matrix(M, cur) @ D
        cur = proj_map(M, cur)
    grad = np.zeros(batch + (k,))
    for a, g in zip(factors, grad_terms):
        grad = grad + (value / a)[..., None] * g
    grad = project_tangent(s, grad)
    return CocycleEval(value=value, gradient=grad, steps=n)


def induced_map_array(A, s, t, radius: float | None = 1.0):
    M = _real(A)
    a, _ = radial_factor(M, s)
    t_new = a * np.asarray(t, dtype=float)
    if radius is not None and np.any(t_new >= radius):
        raise DomainEscape("image leaves the blow-up disk")
    return proj_map(M, s), t_new


def induced_map(A, p: PolarPoint, radius: float | None = 1.0) -> PolarPoint:
    s, t = induced_map_array(A, p.s, p.t, radius)
    return PolarPoint(s, float(t))


def induced_diff_array(A, s, t, v_s, v_t, radius: float | None = 1.0, check=True):
    """One step of the differential, returns (s', t', v_s', v_t')."""
    M = _real(A)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    a, ga = radial_factor(M, s)
    s_new, t_new = induced_map_array(M, s, t, radius)
    w_s = proj_diff(M, s, v_s, check=check)
    w_t = a * np.asarray(v_t) + t * np.sum(ga * v_s, axis=-1)
    return s_new, t_new, w_s, w_t


def induced_diff(A, p: PolarPoint, v: BlowTangent, radius: float | None = 1.0) -> BlowTangent:
    s_new, t_new, w_s, w_t = induced_diff_array(A, p.s, p.t, v.v_s, v.v_t, radius)
    return BlowTangent(PolarPoint(s_new, float(t_new)), float(w_t), w_s)


def step_matrix(A, s, t):
    """(k+1) x (k+1) ambient matrix of one step acting on (v_s, v_t).

    Lower block-triangular: [[DÂ_s, 0], [t grad a(s)^T, a(s)]].
    """
    M = _real(A)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    k = M.shape[0]
    a, ga = radial_factor(M, s)
    J = np.zeros(s.shape[:-1] + (k + 1, k + 1))
    J[..., :k, :k] = proj_diff_matrix(M, s)
    J[..., k, :k] = t[..., None] * ga
    J[..., k, k] = a
    return J


def n_step_matrix(A, s, t, n: int):
    """Closed form of D Ã^n at (s, t) built from the cocycle.

    Returns ((k+1) x (k+1) ambient matrix, image s, image t).
    """
    M = _real(A)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    k = M.shape[0]
    D = np.broadcast_to(np.eye(k), s.shape[:-1] + (k, k)).copy()
    cur = s
    for _ in range(n):
        D = proj_diff_matrix(M, cur) @ D
        cur = proj_map(M, cur)
    c = cocycle(M, s, n)
    J = np.zeros(s.shape[:-1] + (k + 1, k + 1))
    J[..., :k, :k] = D
    J[..., k, :k] = t[..., None] * c.gradient
    J[..., k, k] = c.value
    return J, cur, c.value * t


def iterate(A, s, t, n: int):
    """Orbit (s_j, t_j), j = 0..n, with no disk check. Shapes (n+1, ..., k), (n+1, ...)."""
    M = _real(A)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    ss, ts = [s], [t]
    for _ in range(n):
        a, _ = radial_factor(M, s)
        s = proj_map(M, s)
        t = a * t
        ss.append(s)
        ts.append(t)
    return np.stack(ss), np.stack(ts)
