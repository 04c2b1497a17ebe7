"""Locally fiberwise model systems on T^k x T^d and their surgeries.

A system is F(x, y) = (f(x), B y + phi(x)) with f a bump diffeomorphism equal
to A near the fixed point 0, B a hyperbolic torus automorphism and phi an
optional twist supported away from the locally fiberwise core.

State layouts (one row per point):

* unblown:  (x, y),      tangent (v_x, v_y)
* blown-up: (s, t, y),   tangent (v_s, v_t, v_y) with v_s . s = 0

The blown-up variant uses polar coordinates around the fixed point on the
whole torus chart. Inside the core ball the step is the induced skew product;
outside it the step goes through the torus chart. Both formulas agree on the
overlap, and the metric dt^2 + rho_eps(t)^2 ds^2 + dy^2 is Euclidean for
t >= eps, so no separate atlas bookkeeping is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import induced
from .blowup_geom import rho_profile, sphere_frame, pushforward, pullback, check_eps
from .bump import BumpDiffeo, TorusAutomorphism, Twist, wrap
from .cplx_geom import complex_frame
from .errors import AtlasError, GlueError
from .speclin import HyperbolicMatrix, as_hyperbolic, check_domination, spectral_rate_bounds

VARIANTS = ("product", "twisted", "blownup", "connected_sum", "suspension_time_t")


@dataclass(frozen=True)
class PHConstants:
    lam: float
    mu: float
    delta: float = 0.02
    K: float = 1.0


@dataclass
class ModelSystem:
    A: HyperbolicMatrix
    B: TorusAutomorphism
    r0: float = 0.2
    r1: float = 0.4
    rk_step: float = 1e-2
    twist: float = 0.0
    blown: bool = False
    eps: float = 0.05
    ph: PHConstants | None = None
    bump: BumpDiffeo = field(init=False, repr=False)
    phi: Twist | None = field(init=False, repr=False)

    def __post_init__(self):
        self.A = as_hyperbolic(self.A)
        if not isinstance(self.B, TorusAutomorphism):
            self.B = TorusAutomorphism(self.B)
        self.bump = BumpDiffeo(self.A, self.r0, self.r1, self.rk_step)
        self.phi = Twist(self.twist, self.k, self.d, self.r0, self.r1) if self.twist else None
        if self.blown:
            check_eps(self.eps)
            if self.eps >= self.bump.core_radius:
                raise AtlasError(
                    f"eps={self.eps} must be below the core radius {self.bump.core_radius:.4g}"
                )
        if self.ph is None:
            self.ph = default_ph_constants(self.A, self.B)

    # -- shapes -------------------------------------------------------------
    @property
    def complex_blowup(self) -> bool:
        return self.A.is_complex

    @property
    def k(self) -> int:
        """Real dimension of the base."""
        return self.bump.k

    @property
    def d(self) -> int:
        return self.B.d

    @property
    def dim(self) -> int:
        return self.k + self.d

    @property
    def state_dim(self) -> int:
        return self.k + self.d + (1 if self.blown else 0)

    @property
    def tangent_dim(self) -> int:
        return self.state_dim

    @property
    def variant(self) -> str:
        if self.blown:
            return "blownup"
        return "twisted" if self.phi is not None else "product"

    @property
    def core_radius(self) -> float:
        return self.bump.core_radius

    def split_state(self, state):
        k = self.k
        if self.blown:
            return state[..., :k], state[..., k], state[..., k + 1 :]
        return state[..., :k], state[..., k:]

    # -- dynamics -----------------------------------------------------------
    def _fiber(self, x, y, V_x, V_y, inverse):
        """Fiber update and its differential; V_x are base tangent vectors (N, k, m)."""
        B = self.B.matrix
        if not inverse:
            y_new = y @ B.T
            W_y = np.einsum("ij,njm->nim", B, V_y)
            if self.phi is not None:
                val, D = self.phi.eval(x)
                y_new = y_new + val
                W_y = W_y + np.einsum("nij,njm->nim", D, V_x)
            return np.mod(y_new, 1.0), W_y
        # inverse: y = B^{-1}(y' - phi(f^{-1} x')); here x is already the preimage
        Binv = np.linalg.inv(B)
        shifted = y
        W_y = V_y
        if self.phi is not None:
            val, D = self.phi.eval(x)
            shifted = y - val
            W_y = W_y - np.einsum("nij,njm->nim", D, V_x)
        return np.mod(shifted @ Binv.T, 1.0), np.einsum("ij,njm->nim", Binv, W_y)

    def step(self, state, V, inverse: bool = False):
        """One step of F (or F^{-1}) on states (N, n) and tangent frames (N, n, m)."""
        state = np.atleast_2d(np.asarray(state, dtype=float))
        V = np.asarray(V, dtype=float)
        if V.ndim == 2:
            V = V[..., None]
        if self.blown:
            return self._step_blown(state, V, inverse)
        k = self.k
        x, y = state[:, :k], state[:, k:]
        if not inverse:
            x_new, Df = self.bump.eval(x)
            W_x = Df @ V[:, :k]
            y_new, W_y = self._fiber(wrap(x), y, V[:, :k], V[:, k:], inverse=False)
        else:
            x_new, Df = self.bump.inverse_eval(x)
            W_x = Df @ V[:, :k]
            y_new, W_y = self._fiber(x_new, y, W_x, V[:, k:], inverse=True)
        return np.concatenate([x_new, y_new], axis=1), np.concatenate([W_x, W_y], axis=1)

    def _step_blown(self, state, V, inverse):
        k = self.k
        s, t, y = state[:, :k], state[:, k], state[:, k + 1 :]
        V_s, V_t, V_y = V[:, :k], V[:, k], V[:, k + 1 :]
        lin = self.bump.A_inv if inverse else self.bump.A
        core = self.bump.core_radius_inv if inverse else self.bump.core_radius
        n, m = state.shape[0], V.shape[2]
        s_new = np.empty_like(s)
        t_new = np.empty_like(t)
        W_s = np.empty_like(V_s)
        W_t = np.empty_like(V_t)
        base_x = np.zeros((n, k))  # base point in the torus chart, for the twist
        pre_x = np.zeros((n, k))
        W_x_flat = np.zeros((n, k, m))
        V_x_flat = np.zeros((n, k, m))

        inner = t <= core
        if np.any(inner):
            si, ti = s[inner], t[inner]
            J = induced.step_matrix(lin, si, ti)
            a, _ = induced.radial_factor(lin, si)
            s_new[inner] = induced.proj_map(lin, si)
            t_new[inner] = a * ti
            amb = np.concatenate([V_s[inner], V_t[inner][:, None, :]], axis=1)
            out = J @ amb
            W_s[inner] = out[:, :k]
            W_t[inner] = out[:, k]
        outer = ~inner
        if np.any(outer):
            so, to = s[outer], t[outer]
            x = to[:, None] * so
            dx = pushforward(so[:, None, :], to[:, None], V_s[outer].swapaxes(1, 2), V_t[outer])
            dx = dx.swapaxes(1, 2)  # (N, k, m)
            if inverse:
                xn, Df = self.bump.inverse_eval(x)
            else:
                xn, Df = self.bump.eval(x)
            dxn = Df @ dx
            rn = np.linalg.norm(xn, axis=1)
            if np.any(rn == 0.0):
                raise AtlasError("image hit the exceptional set through the outer chart")
            sn = xn / rn[:, None]
            vs, vt = pullback(sn[:, None, :], rn[:, None], dxn.swapaxes(1, 2))
            s_new[outer], t_new[outer] = sn, rn
            W_s[outer] = vs.swapaxes(1, 2)
            W_t[outer] = vt
            pre_x[outer] = xn if inverse else wrap(x)
            base_x[outer] = x
            V_x_flat[outer] = dx
            W_x_flat[outer] = dxn
        if self.phi is None:
            y_new, W_y = self._fiber(None, y, None, V_y, inverse)
        elif inverse:
            # the twist vanishes on the inner region, so zero base vectors are harmless there
            y_new, W_y = self._fiber(pre_x, y, W_x_flat, V_y, inverse=True)
        else:
            y_new, W_y = self._fiber(pre_x, y, V_x_flat, V_y, inverse=False)
        state_new = np.concatenate([s_new, t_new[:, None], y_new], axis=1)
        V_new = np.concatenate([W_s, W_t[:, None, :], W_y], axis=1)
        return state_new, V_new

    def eval_diff(self, state, v):
        """system_eval_diff: image point and image vector(s)."""
        single = np.asarray(state).ndim == 1
        st, W = self.step(state, np.asarray(v)[None] if single else v)
        if single:
            return st[0], W[0, :, 0] if np.asarray(v).ndim == 1 else W[0]
        return st, W

    def orbit(self, state, n: int, inverse: bool = False):
        """States along n steps, shape (n+1, N, state_dim)."""
        state = np.atleast_2d(np.asarray(state, dtype=float))
        dummy = np.zeros(state.shape + (1,))
        out = [state]
        for _ in range(n):
            state, _ = self.step(state, dummy, inverse)
            out.append(state)
        return np.stack(out)

    # -- geometry -----------------------------------------------------------
    def to_orthonormal(self, state, V):
        """Coordinates of tangent vectors in a g_eps-orthonormal frame, shape (N, dim, m)."""
        state = np.atleast_2d(state)
        if not self.blown:
            return V
        k = self.k
        s, t = state[:, :k], state[:, k]
        rho, _ = rho_profile(self.eps, t)
        if self.complex_blowup:
            F = complex_frame(s)
            c = np.einsum("nki,nkm->nim", F, V[:, :k])
            scale = np.concatenate([t[:, None], np.repeat(rho[:, None], k - 2, axis=1)], axis=1)
        else:
            F = sphere_frame(s)
            c = np.einsum("nki,nkm->nim", F, V[:, :k])
            scale = np.repeat(rho[:, None], k - 1, axis=1)
        c = c * scale[:, :, None]
        return np.concatenate([c, V[:, k : k + 1], V[:, k + 1 :]], axis=1)

    def norm(self, state, V):
        return np.linalg.norm(self.to_orthonormal(state, V), axis=1)

    def horizontal_frame(self, state):
        """Tangent vectors spanning the base directions, shape (N, n, k)."""
        state = np.atleast_2d(state)
        n = state.shape[0]
        k, d = self.k, self.d
        H = np.zeros((n, self.tangent_dim, k))
        if not self.blown:
            H[:, :k, :k] = np.eye(k)
            return H
        s = state[:, :k]
        F = complex_frame(s) if self.complex_blowup else sphere_frame(s)
        H[:, :k, : k - 1] = F
        H[:, k, k - 1] = 1.0
        return H

    def fiber_frames(self, n: int):
        """Stable and unstable frames of B embedded in the tangent space."""
        off = self.tangent_dim - self.d
        Es = np.zeros((n, self.tangent_dim, self.B.stable.shape[1]))
        Eu = np.zeros((n, self.tangent_dim, self.B.unstable.shape[1]))
        Es[:, off:] = self.B.stable
        Eu[:, off:] = self.B.unstable
        return Es, Eu

    def base_point(self, state):
        """Base point in the torus chart (blow-down for blown-up systems)."""
        state = np.atleast_2d(state)
        if self.blown:
            return state[:, self.k][:, None] * state[:, : self.k]
        return state[:, : self.k]

    def radius(self, state):
        state = np.atleast_2d(state)
        if self.blown:
            return state[:, self.k]
        return np.linalg.norm(state[:, : self.k], axis=1)

    def lift(self, xy):
        """Unblown state (x, y) with x != 0 to the blown-up layout."""
        xy = np.atleast_2d(xy)
        x, y = wrap(xy[:, : self.k]), xy[:, self.k :]
        r = np.linalg.norm(x, axis=1)
        return np.concatenate([x / r[:, None], r[:, None], y], axis=1)

    def unblown(self) -> "ModelSystem":
        return ModelSystem(self.A, self.B, self.r0, self.r1, self.rk_step, self.twist, False, self.eps, self.ph)

    def with_blowup(self, eps: float | None = None) -> "ModelSystem":
        return ModelSystem(self.A, self.B, self.r0, self.r1, self.rk_step, self.twist, True,
                           self.eps if eps is None else eps, self.ph)


def default_ph_constants(A, B: TorusAutomorphism) -> PHConstants:
    """Geometric midpoints between the fiber rates and the local rate bounds tau/nu, nu/tau."""
    bounds = spectral_rate_bounds(A)
    lam = np.sqrt(B.contraction / bounds.ratio)
    mu = np.sqrt(B.expansion * bounds.ratio)
    return PHConstants(lam=float(lam), mu=float(mu))


def system_eval_diff(sys: ModelSystem, point, vector):
    return sys.eval_diff(point, vector)


# -- connected sum ------------------------------------------------------------
class ConnectedSum:
    """Two spherically blown-up systems glued along their S^{k-1} x T^d boundaries.

    A point is (side, state) with side in {0, 1}; in the collar the signed
    radial coordinate tau = t on side 0 and tau = -t on side 1, and the glued
    map reads (s, y, tau) -> (Âs, B y, a(s) tau) on both sides.
    """

    def __init__(self, sys1: ModelSystem, sys2: ModelSystem, collar: float | None = None):
        for sys in (sys1, sys2):
            if not sys.blown:
                raise GlueError("both systems must be blown up")
        if sys1.A.real_form().shape != sys2.A.real_form().shape or not np.allclose(
            sys1.A.real_form(), sys2.A.real_form(), atol=1e-12
        ):
            raise GlueError("local base maps differ")
        if sys1.B.matrix.shape != sys2.B.matrix.shape or not np.array_equal(sys1.B.matrix, sys2.B.matrix):
            raise GlueError("fiber automorphisms differ")
        self.sides = (sys1, sys2)
        self.k, self.d = sys1.k, sys1.d
        self.collar = collar if collar is not None else min(sys1.core_radius, sys2.core_radius)
        self.lin = sys1.bump.A

    @property
    def is_double(self) -> bool:
        return self.sides[0] is self.sides[1]

    def step(self, side, state, V, inverse=False):
        side = np.atleast_1d(np.asarray(side, dtype=int))
        state = np.atleast_2d(np.asarray(state, dtype=float))
        V = np.asarray(V, dtype=float)
        if V.ndim == 2:
            V = V[..., None]
        st_new = np.empty_like(state)
        V_new = np.empty_like(V)
        for i, sys in enumerate(self.sides):
            mask = side == i
            if np.any(mask):
                st_new[mask], V_new[mask] = sys.step(state[mask], V[mask], inverse)
        return side.copy(), st_new, V_new

    def eval_diff(self, side, state, V):
        return self.step(side, state, V)

    def swap(self, side):
        """The side-swapping involution of the double."""
        return 1 - np.asarray(side)

    def to_collar(self, side, state):
        """Collar chart (s, y, tau) for points with t < collar."""
        k = self.k
        t = state[:, k]
        if np.any(t >= self.collar):
            raise AtlasError("point outside the collar")
        tau = np.where(np.asarray(side) == 0, t, -t)
        return state[:, :k], state[:, k + 1 :], tau

    def from_collar(self, s, y, tau):
        side = np.where(tau >= 0, 0, 1)
        return side, np.concatenate([s, np.abs(tau)[:, None], y], axis=1)

    def collar_map(self, s, y, tau):
        """Boundary local form (s, y, tau) -> (Âs, By, a(s) tau)."""
        a, _ = induced.radial_factor(self.lin, s)
        return induced.proj_map(self.lin, s), self.sides[0].B(y), a * tau

    def glued_map_collar(self, s, y, tau):
        """The glued map written in the collar chart, evaluated through the side systems."""
        side, state = self.from_collar(s, y, tau)
        side2, st, _ = self.step(side, state, np.zeros(state.shape + (1,)))
        s2, y2, tau2 = st[:, : self.k], st[:, self.k + 1 :], st[:, self.k]
        return s2, y2, np.where(side2 == 0, tau2, -tau2)


def connected_sum_eval_diff(cs: ConnectedSum, side, point, vector):
    return cs.eval_diff(side, point, vector)


# -- suspension -----------------------------------------------------------------
class Suspension:
    """Suspension flow of a discrete system on its mapping torus.

    States are (base state, theta) with theta in [0, 1); the roof coordinate
    moves at unit speed and the discrete step is applied at each roof crossing.
    """

    def __init__(self, sys: ModelSystem):
        self.sys = sys

    @property
    def state_dim(self) -> int:
        return self.sys.state_dim + 1

    @property
    def dim(self) -> int:
        return self.sys.dim + 1

    def flow(self, t: float, state, V):
        if t < 0:
            raise ValueError("t must be non-negative")
        state = np.atleast_2d(np.asarray(state, dtype=float))
        V = np.asarray(V, dtype=float)
        if V.ndim == 2:
            V = V[..., None]
        base, theta = state[:, :-1].copy(), state[:, -1] + t
        Vb, Vth = V[:, :-1].copy(), V[:, -1:].copy()
        crossings = np.floor(theta + 1e-12).astype(int)
        for j in range(int(crossings.max(initial=0))):
            mask = crossings > j
            base[mask], Vb[mask] = self.sys.step(base[mask], Vb[mask])
        theta = np.clip(theta - crossings, 0.0, None)
        return np.concatenate([base, theta[:, None]], axis=1), np.concatenate([Vb, Vth], axis=1)

    def to_orthonormal(self, state, V):
        state = np.atleast_2d(state)
        W = self.sys.to_orthonormal(state[:, :-1], V[:, :-1])
        return np.concatenate([W, V[:, -1:]], axis=1)

    def roof_vector(self, n: int):
        R = np.zeros((n, self.state_dim, 1))
        R[:, -1, 0] = 1.0
        return R


def suspension_time_t(susp: Suspension, t: float, point, vector):
    return susp.flow(t, point, vector)


def domination_of(sys: ModelSystem):
    return check_domination(sys.A, sys.B.matrix)
