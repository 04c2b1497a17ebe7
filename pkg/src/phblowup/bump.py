"""Base maps on the torus: hyperbolic automorphisms and the bump-linearized diffeomorphism.

The bump diffeomorphism is the time-1 map of V(x) = chi(|x|) L x on the
chart [-1/2, 1/2)^k of T^k, with L = log A and chi a C-infinity cutoff equal
to 1 on [0, r0] and 0 on [r1, inf). It is the identity off the r1-ball and
equals A on a core ball whose whole flow line stays inside the r0-ball.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm

from .errors import LogError
from .speclin import HyperbolicMatrix, as_hyperbolic, stable_unstable_bases


def wrap(x):
    """Representative of x mod Z^k in [-1/2, 1/2)^k."""
    return np.mod(np.asarray(x, dtype=float) + 0.5, 1.0) - 0.5


def _smooth_step_inf(u):
    """C-infinity transition psi(u): 0 for u <= 0, 1 for u >= 1, and psi'(u)."""
    u = np.asarray(u, dtype=float)
    inner = (u > 0.0) & (u < 1.0)
    uu = np.clip(u, 1e-3, 1.0 - 1e-3)
    a = np.exp(-1.0 / uu)
    b = np.exp(-1.0 / (1.0 - uu))
    ab = a + b
    psi = a / ab
    dpsi = a * b * (1.0 / uu**2 + 1.0 / (1.0 - uu) ** 2) / ab**2
    psi = np.where(inner, psi, u >= 1.0)
    dpsi = np.where(inner, dpsi, 0.0)
    return psi, dpsi


def cutoff(r, r0: float, r1: float):
    """chi(r) and chi'(r): 1 on [0, r0], 0 on [r1, inf)."""
    psi, dpsi = _smooth_step_inf((r1 - np.asarray(r)) / (r1 - r0))
    return psi, -dpsi / (r1 - r0)


def annulus_bump(r, r0: float, r1: float):
    """Smooth bump supported in (r0, r1) with peak 1, and its derivative."""
    half = 0.5 * (r1 - r0)
    p1, d1 = _smooth_step_inf((np.asarray(r) - r0) / half)
    p2, d2 = _smooth_step_inf((r1 - np.asarray(r)) / half)
    val = p1 * p2
    der = d1 * p2 / half - p1 * d2 / half
    return val, der


@dataclass(frozen=True)
class TorusAutomorphism:
    matrix: np.ndarray
    stable: np.ndarray = field(repr=False, default=None)
    unstable: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if not np.all(np.round(M) == M):
            raise ValueError("torus automorphism needs integer entries")
        M = np.round(M).astype(float)
        if abs(abs(np.linalg.det(M)) - 1.0) > 1e-9:
            raise ValueError("torus automorphism needs |det| = 1")
        Es, Eu = stable_unstable_bases(M)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "stable", Es)
        object.__setattr__(self, "unstable", Eu)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def hyperbolic(self) -> HyperbolicMatrix:
        return as_hyperbolic(self.matrix)

    @property
    def contraction(self) -> float:
        """Largest modulus of the contracting eigenvalues."""
        m = self.hyperbolic.moduli
        return float(m[m < 1].max())

    @property
    def expansion(self) -> float:
        m = self.hyperbolic.moduli
        return float(m[m > 1].min())

    def __call__(self, y):
        return np.mod(np.einsum("ij,...j->...i", self.matrix, y), 1.0)


CAT_MAP = ((2, 1), (1, 1))


def real_log(A: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(A)
    if np.any((np.abs(ev.imag) < 1e-12) & (ev.real <= 0)):
        raise LogError(f"matrix has eigenvalues on the non-positive real axis: {ev}")
    L = logm(A)
    if np.iscomplexobj(L):
        if np.max(np.abs(L.imag)) > 1e-9:
            raise LogError("no real logarithm")
        L = L.real
    return L


class BumpDiffeo:
    """Time-1 map of chi(|x|) L x on T^k, integrated by fixed-step RK4."""

    def __init__(self, A, r0: float = 0.2, r1: float = 0.4, step: float = 1e-2):
        H = as_hyperbolic(A)
        M = H.real_form()
        if not 0.0 < r0 < r1 < 0.5:
            raise ValueError("need 0 < r0 < r1 < 1/2")
        self.A = M
        self.A_inv = np.linalg.inv(M)
        self.L = real_log(M)
        self.k = M.shape[0]
        self.r0, self.r1, self.step = float(r0), float(r1), float(step)
        self.nsteps = max(1, int(round(1.0 / step)))
        grid = np.linspace(0.0, 1.0, 201)
        fwd = max(np.linalg.norm(expm(s * self.L), 2) for s in grid)
        bwd = max(np.linalg.norm(expm(-s * self.L), 2) for s in grid)
        # a point of the core never leaves the r0-ball along its flow line
        self.core_radius = 0.999 * r0 / fwd
        self.core_radius_inv = 0.999 * r0 / bwd

    def field(self, x):
        r = np.sqrt(np.einsum("...i,...i->...", x, x))
        chi, dchi = cutoff(r, self.r0, self.r1)
        Lx = x @ self.L.T
        V = chi[..., None] * Lx
        # dchi vanishes near r = 0, so the guard only avoids 0/0
        w = dchi / np.maximum(r, 1e-300)
        DV = chi[..., None, None] * self.L + w[..., None, None] * Lx[..., :, None] * x[..., None, :]
        return V, DV

    def _flow(self, x, sign):
        h = sign / self.nsteps
        Y = np.broadcast_to(np.eye(self.k), x.shape + (self.k,)).copy()

        def rhs(x, Y):
            V, DV = self.field(x)
            return V, DV @ Y

        for _ in range(self.nsteps):
            k1x, k1Y = rhs(x, Y)
            k2x, k2Y = rhs(x + 0.5 * h * k1x, Y + 0.5 * h * k1Y)
            k3x, k3Y = rhs(x + 0.5 * h * k2x, Y + 0.5 * h * k2Y)
            k4x, k4Y = rhs(x + h * k3x, Y + h * k3Y)
            x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
            Y = Y + (h / 6.0) * (k1Y + 2 * k2Y + 2 * k3Y + k4Y)
        return x, Y

    def _eval(self, x, inverse):
        x = wrap(np.atleast_2d(np.asarray(x, dtype=float)))
        r = np.linalg.norm(x, axis=-1)
        lin = self.A_inv if inverse else self.A
        core = self.core_radius_inv if inverse else self.core_radius
        out = x.copy()
        jac = np.broadcast_to(np.eye(self.k), x.shape + (self.k,)).copy()
        in_core = r <= core
        out[in_core] = x[in_core] @ lin.T
        jac[in_core] = lin
        moving = (~in_core) & (r < self.r1)
        if np.any(moving):
            xm, Ym = self._flow(x[moving], -1.0 if inverse else 1.0)
            out[moving] = xm
            jac[moving] = Ym
        return out, jac

    def eval(self, x):
        """Image and Jacobian at x (batched over leading axis)."""
        return self._eval(x, inverse=False)

    def inverse_eval(self, x):
        return self._eval(x, inverse=True)


class Twist:
    """Fiber cocycle phi: T^k -> T^d supported in the annulus r0 < |x| < r1.

    phi_j(x) = amp * beta(|x|) * sin(2 pi x_{j mod k} + 0.7 j).
    """

    def __init__(self, amp: float, k: int, d: int, r0: float, r1: float):
        self.amp, self.k, self.d = float(amp), k, d
        self.r0, self.r1 = r0, r1
        self.modes = np.zeros((d, k))
        for j in range(d):
            self.modes[j, j % k] = 1.0
        self.phases = 0.7 * np.arange(d)

    def eval(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=-1)
        beta, dbeta = annulus_bump(r, self.r0, self.r1)
        arg = 2 * np.pi * x @ self.modes.T + self.phases
        val = self.amp * beta[:, None] * np.sin(arg)
        safe_r = np.where(r > 0, r, 1.0)
        grad_r = x / safe_r[:, None]
        D = self.amp * (
            (dbeta[:, None] * np.sin(arg))[:, :, None] * grad_r[:, None, :]
            + (beta[:, None] * np.cos(arg))[:, :, None] * (2 * np.pi * self.modes)[None]
        )
        return val, D
