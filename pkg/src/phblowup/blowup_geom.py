"""Spherical blow-up of the unit disk with the warped metrics g_eps.

Points of the blow-up are polar pairs (s, t) with s on the unit sphere and
t in [0, 1); the projective blow-up is the quotient by (s, 0) ~ (-s, 0),
which never needs to be stored. Tangent vectors are (v_s, v_t) with v_s an
ambient vector orthogonal to s.

Functions accept a single point or a batch (leading axes broadcast).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalPointError, RangeError, TangencyError

EPS0 = 0.25


def smoothstep(u):
    """Quintic smoothstep with its first two derivatives; u is clipped to [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    s = u**3 * (10.0 - 15.0 * u + 6.0 * u**2)
    ds = 30.0 * u**2 * (1.0 - u) ** 2
    d2s = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    return s, ds, d2s


def check_eps(eps: float, eps0: float = EPS0) -> float:
    eps = float(eps)
    if not 0.0 < eps < eps0:
        raise RangeError(f"eps={eps} outside (0, {eps0})")
    return eps


def rho_profile(eps: float, t, eps0: float = EPS0):
    """Warp factor rho_eps(t) and its derivative.

    rho = eps on [0, eps/2], rho = t on [eps, inf), and the convex blend
    eps*(1 - S(u)) + t*S(u) with u = (2t - eps)/eps in between, so that
    t <= rho <= eps there and rho is C^2.
    """
    eps = check_eps(eps, eps0)
    t = np.asarray(t, dtype=float)
    u = (2.0 * t - eps) / eps
    S, dS, _ = smoothstep(u)
    value = eps * (1.0 - S) + t * S
    deriv = S + (t - eps) * dS * (2.0 / eps)
    return value, deriv


def rho_second_derivative(eps: float, t):
    eps = check_eps(eps)
    t = np.asarray(t, dtype=float)
    u = (2.0 * t - eps) / eps
    _, dS, d2S = smoothstep(u)
    inside = (u > 0.0) & (u < 1.0)
    val = 2.0 * dS * (2.0 / eps) + (t - eps) * d2S * (2.0 / eps) ** 2
    return np.where(inside, val, 0.0)


@dataclass(frozen=True)
class WarpedMetricFamily:
    eps: float
    eps0: float = EPS0

    def __post_init__(self):
        check_eps(self.eps, self.eps0)

    def profile(self, t):
        return rho_profile(self.eps, t, self.eps0)

    def rho(self, t):
        return self.profile(t)[0]


@dataclass(frozen=True)
class PolarPoint:
    s: np.ndarray
    t: float

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if abs(np.linalg.norm(s) - 1.0) > 1e-12:
            raise ValueError("s must be a unit vector")
        if not 0.0 <= self.t:
            raise ValueError("t must be non-negative")
        object.__setattr__(self, "s", s)


@dataclass(frozen=True)
class BlowTangent:
    base: PolarPoint
    v_t: float
    v_s: np.ndarray

    def __post_init__(self):
        v_s = np.asarray(self.v_s, dtype=float)
        if abs(v_s @ self.base.s) > 1e-10:
            raise TangencyError("v_s must be orthogonal to s")
        object.__setattr__(self, "v_s", v_s)


def warped_norm(eps, t, v_s, v_t):
    """Array form of the g_eps norm sqrt(v_t^2 + rho(t)^2 |v_s|^2)."""
    rho, _ = rho_profile(eps, t)
    v_s = np.asarray(v_s, dtype=float)
    return np.sqrt(np.asarray(v_t) ** 2 + rho**2 * np.sum(v_s**2, axis=-1))


def flat_norm(t, v_s, v_t):
    """Norm of the pullback of the Euclidean metric: sqrt(v_t^2 + t^2 |v_s|^2)."""
    v_s = np.asarray(v_s, dtype=float)
    return np.sqrt(np.asarray(v_t) ** 2 + np.asarray(t) ** 2 * np.sum(v_s**2, axis=-1))


def metric_norm(fam: WarpedMetricFamily, v: BlowTangent) -> float:
    return float(warped_norm(fam.eps, v.base.t, v.v_s, v.v_t))


def blow_down(p) -> np.ndarray:
    if isinstance(p, PolarPoint):
        return p.t * p.s
    s, t = p
    return np.asarray(t)[..., None] * np.asarray(s)


def blow_up(x) -> PolarPoint:
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x)
    if r == 0.0:
        raise ExceptionalPointError("the origin has no canonical preimage")
    return PolarPoint(x / r, float(r))


def blow_up_array(x):
    """Batched blow-up; returns (s, t)."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise ExceptionalPointError("the origin has no canonical preimage")
    return x / r[..., None], r


def pushforward(s, t, v_s, v_t):
    """Differential of the blow-down: (v_s, v_t) -> v_t s + t v_s."""
    return np.asarray(v_t)[..., None] * s + np.asarray(t)[..., None] * v_s


def pullback(s, t, dx):
    """Inverse of :func:`pushforward` for t > 0."""
    v_t = np.sum(dx * s, axis=-1)
    v_s = (dx - v_t[..., None] * s) / np.asarray(t)[..., None]
    return v_s, v_t


def project_tangent(s, v):
    """Orthogonal projection of ambient vectors v onto the tangent space at s."""
    return v - np.sum(v * s, axis=-1, keepdims=True) * s


def sphere_frame(s) -> np.ndarray:
    """Orthonormal basis of the tangent space at s, as columns of shape (..., k, k-1).

    Built from the Householder reflection that swaps e_1 and +-s.
    """
    s = np.asarray(s, dtype=float)
    k = s.shape[-1]
    e1 = np.zeros(k)
    e1[0] = 1.0
    sign = np.where(s[..., :1] > 0, -1.0, 1.0)
    u = e1 + sign * s  # reflection sending e1 to -sign*s
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    H = np.eye(k) - 2.0 * u[..., :, None] * u[..., None, :]
    return H[..., :, 1:]


def random_sphere(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    x = rng.standard_normal((n, k))
    return x / np.linalg.norm(x, axis=-1, keepdims=True)
