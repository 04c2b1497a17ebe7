"""Complex blow-up geometry on C^k = R^2k.

Vectors are real arrays of length 2k ordered (Re z, Im z); the complex
structure J is multiplication by i, and the Hermitian pairing enters only
through Re<v, w>, which is the Euclidean dot product of the real forms.

Tangent vectors at z in S^{2k-1} split into the Hopf fiber direction X = Jz
and its orthogonal complement; ds^2 = dphi^2 + h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .blowup_geom import rho_profile, check_eps, sphere_frame, EPS0
from .errors import TangencyError

TANGENT_TOL = 1e-10


def to_real(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def to_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = x.shape[-1] // 2
    return x[..., :k] + 1j * x[..., k:]


def J(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    k = v.shape[-1] // 2
    return np.concatenate([-v[..., k:], v[..., :k]], axis=-1)


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _scale(c, v):
    return np.asarray(c)[..., None] * v


@dataclass(frozen=True)
class SpherePointC:
    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z)
        z = to_real(z) if np.iscomplexobj(z) else z.astype(float)
        if abs(np.linalg.norm(z) - 1.0) > 1e-12:
            raise ValueError("z must be a unit vector")
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class ComplexWarpedMetric:
    eps: float
    eps0: float = EPS0

    def __post_init__(self):
        check_eps(self.eps, self.eps0)

    def mu(self, t):
        """Fiber scaling t / rho_eps(t), in (0, 1] for t > 0."""
        rho, _ = rho_profile(self.eps, t, self.eps0)
        return np.asarray(t) / rho


def hopf_split(z, v, check=True):
    """(vertical coefficient Re<v, iz>, horizontal part v - vertical * iz)."""
    z = np.asarray(z, dtype=float)
    v = np.asarray(v, dtype=float)
    if check and np.any(np.abs(_dot(v, z)) > TANGENT_TOL):
        raise TangencyError("v is not tangent to the sphere at z")
    Jz = J(z)
    vert = _dot(v, Jz)
    return vert, v - _scale(vert, Jz)


def h_norm2(z, v):
    _, hor = hopf_split(z, v, check=False)
    return _dot(hor, hor)


def h_mu_norm2(mu, z, v):
    vert, hor = hopf_split(z, v, check=False)
    return np.asarray(mu) ** 2 * vert**2 + _dot(hor, hor)


def canonical_representative(z):
    """Rotate the phase so the first coordinate of largest modulus is real positive.

    Returns (rotated z, phase) with rotated z = e^{i phase} z.
    """
    zc = to_complex(z)
    idx = np.argmax(np.abs(zc) - 1e-12 * np.arange(zc.shape[-1]), axis=-1)
    lead = np.take_along_axis(zc, np.asarray(idx)[..., None], axis=-1)[..., 0]
    phase = -np.angle(lead)
    return to_real(np.exp(1j * phase)[..., None] * zc), phase


def rotate(phase, v):
    return to_real(np.exp(1j * np.asarray(phase))[..., None] * to_complex(v))


def fs_norm(z, w, check=True):
    """Fubini-Study length of the projection of a horizontal vector w at z."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if check and (np.any(np.abs(_dot(w, z)) > TANGENT_TOL) or np.any(np.abs(_dot(w, J(z))) > TANGENT_TOL)):
        raise TangencyError("w is not horizontal at z")
    return np.sqrt(h_norm2(z, w))


def fs_distance(z, w):
    """Closed-form Fubini-Study distance arccos |<z, w>| between the lines of z and w."""
    inner = np.sum(np.conj(to_complex(z)) * to_complex(w), axis=-1)
    return np.arccos(np.clip(np.abs(inner), 0.0, 1.0))


def horizontal_lift_length(path, n: int = 2001) -> float:
    """Fubini-Study length of a curve of unit vectors sampled at n points of [0, 1].

    ``path(theta)`` returns real 2k vectors. Velocities come from central
    differences and are projected on the horizontal space before measuring.
    """
    th = np.linspace(0.0, 1.0, n)
    pts = np.array([path(x) for x in th])
    pts = pts / np.linalg.norm(pts, axis=-1, keepdims=True)
    vel = np.gradient(pts, th, axis=0, edge_order=2)
    vel = vel - _scale(_dot(vel, pts), pts)
    speed = np.sqrt(h_norm2(pts, vel))
    return float(trapezoid(speed, th))


def complex_metric_norm(eps, z, t, v_s, v_t):
    """sqrt(v_t^2 + rho^2 h(v_s) + t^2 vertical(v_s)^2), the doubly warped g_eps."""
    rho, _ = rho_profile(eps, t)
    vert, hor = hopf_split(z, v_s, check=False)
    return np.sqrt(np.asarray(v_t) ** 2 + rho**2 * _dot(hor, hor) + np.asarray(t) ** 2 * vert**2)


def complex_frame(z) -> np.ndarray:
    """Orthonormal basis of T_z S^{2k-1} with Jz first, shape (..., 2k, 2k-1).

    The remaining columns span the horizontal space; they come from the
    eigenvectors of its orthogonal projector, which stay well conditioned
    for every z.
    """
    z = np.asarray(z, dtype=float)
    Jz = J(z)
    n = z.shape[-1]
    P = np.eye(n) - z[..., :, None] * z[..., None, :] - Jz[..., :, None] * Jz[..., None, :]
    _, vecs = np.linalg.eigh(P)  # ascending: the two zero eigenvalues come first
    return np.concatenate([Jz[..., :, None], vecs[..., :, 2:]], axis=-1)


def chart_point(w):
    """Blow-up chart (w_1, w_2, ..., w_k) -> x = (w_1, w_1 w_2, ..., w_1 w_k) in C^k."""
    w = np.asarray(w, dtype=complex)
    x = w.copy()
    x[..., 1:] = w[..., :1] * w[..., 1:]
    return x


def chart_metric_matrix(eps, w) -> np.ndarray:
    """Matrix of g_eps in the real coordinates of the chart at w (requires w_1 != 0).

    Tangent vectors dw map to dx = dw_1 (1, w_2, ...) + w_1 (0, dw_2, ...),
    which are then expressed in polar coordinates (z, t) of x.
    """
    w = np.asarray(w, dtype=complex)
    k = w.shape[-1]
    x = chart_point(w)
    xr = to_real(x)
    t = np.linalg.norm(xr)
    z = xr / t
    G = np.zeros((2 * k, 2 * k))
    basis = []
    for j in range(2 * k):
        dw = np.zeros(k, dtype=complex)
        dw[j % k] = 1.0 if j < k else 1j
        dx = np.empty(k, dtype=complex)
        dx[0] = dw[0]
        dx[1:] = dw[0] * w[1:] + w[0] * dw[1:]
        basis.append(to_real(dx))
    basis = np.array(basis)
    v_t = basis @ z
    v_s = (basis - v_t[:, None] * z) / t
    rho, _ = rho_profile(eps, t)
    vert = v_s @ J(z)
    hor = v_s - vert[:, None] * J(z)
    G = np.outer(v_t, v_t) + rho**2 * hor @ hor.T + t**2 * np.outer(vert, vert)
    return G
