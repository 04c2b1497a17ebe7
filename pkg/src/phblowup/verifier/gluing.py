"""Seam continuity of connected sums and the doubling symmetry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blowup_geom import sphere_frame
from .sampling import sobol, sphere_points


@dataclass(frozen=True)
class SeamReport:
    points: int
    one_sided_gap: float  # max |J_side0 - J_side1| over seam points
    analytic_gap: float  # max |J_fd - J_analytic| on either side
    swap_gap: float | None  # max |swap(G p) - G(swap p)| for the double

    def passed(self, tol: float = 1e-9, swap_tol: float = 1e-10) -> bool:
        ok = self.one_sided_gap <= tol
        if self.swap_gap is not None:
            ok = ok and self.swap_gap <= swap_tol
        return ok


def _wrap(d):
    return d - np.round(d)


def _image(cs, side, s, y, tau):
    """Glued map in collar coordinates, evaluated through the given side."""
    state = np.concatenate([s, np.abs(tau)[:, None], y], axis=1)
    side = np.full(len(s), side)
    _, st, _ = cs.step(side, state, np.zeros(state.shape + (1,)))
    k = cs.k
    sign = np.where(side == 0, 1.0, -1.0)
    return st[:, :k], st[:, k + 1 :], sign * st[:, k]


def _diff(a, b):
    return np.concatenate([a[0] - b[0], _wrap(a[1] - b[1]), (a[2] - b[2])[:, None]], axis=1)


def _fd_jacobian(cs, side, s, y, h):
    """Columns: sphere directions and fiber directions (central), tau (one-sided, into the side)."""
    N = len(s)
    zero = np.zeros(N)
    frame = sphere_frame(s)  # (N, k, k-1)
    cols = []
    for j in range(frame.shape[-1]):
        e = frame[..., j]
        plus = _image(cs, side, s * np.cos(h) + e * np.sin(h), y, zero)
        minus = _image(cs, side, s * np.cos(h) - e * np.sin(h), y, zero)
        cols.append(_diff(plus, minus) / (2 * h))
    for j in range(cs.d):
        e = np.zeros_like(y)
        e[:, j] = h
        cols.append(_diff(_image(cs, side, s, y + e, zero), _image(cs, side, s, y - e, zero)) / (2 * h))
    base = _image(cs, side, s, y, zero)
    if side == 0:
        cols.append(_diff(_image(cs, 0, s, y, zero + h), base) / h)
    else:
        cols.append(_diff(base, _image(cs, 1, s, y, zero - h)) / h)
    return np.stack(cols, axis=-1), frame


def _analytic_jacobian(cs, side, s, y, frame):
    N, k = s.shape
    state = np.concatenate([s, np.zeros((N, 1)), y], axis=1)
    n = state.shape[1]
    m = frame.shape[-1] + cs.d + 1
    V = np.zeros((N, n, m))
    V[:, :k, : frame.shape[-1]] = frame
    V[:, k + 1 :, frame.shape[-1] : frame.shape[-1] + cs.d] = np.eye(cs.d)
    V[:, k, -1] = 1.0
    _, _, W = cs.step(np.full(N, side), state, V)
    sign = 1.0 if side == 0 else -1.0
    # tangent order (v_s, v_t, v_y) -> (v_s, v_y, v_tau); tau = -t on side 1 in both source and target
    out = np.concatenate([W[:, :k], W[:, k + 1 :], sign * W[:, k : k + 1]], axis=1)
    out[..., -1] *= sign
    return out


def seam_check(cs, samples: int = 1000, seed: int = 0, h: float = 1e-6) -> SeamReport:
    """Compare one-sided difference quotients of the glued map across the seam {tau = 0}."""
    k, d = cs.k, cs.d
    u = sobol(samples, k + d, seed)
    s = sphere_points(u[:, :k])
    y = u[:, k:]
    J0, frame = _fd_jacobian(cs, 0, s, y, h)
    J1, _ = _fd_jacobian(cs, 1, s, y, h)
    one_sided = float(np.max(np.abs(J0 - J1)))
    analytic = max(
        float(np.max(np.abs(J - _analytic_jacobian(cs, side, s, y, frame)))) for side, J in ((0, J0), (1, J1))
    )
    swap_gap = None
    if cs.is_double:
        swap_gap = swap_commutation(cs, samples, seed)
    return SeamReport(points=samples, one_sided_gap=one_sided, analytic_gap=analytic, swap_gap=swap_gap)


def swap_commutation(cs, samples: int = 1000, seed: int = 0) -> float:
    """max over random points of |swap(G p) - G(swap p)|, sides and states compared."""
    sys = cs.sides[0]
    k = sys.k
    u = sobol(samples, sys.k + sys.d + 2, seed + 7)
    s = sphere_points(u[:, :k])
    t = 0.5 * u[:, k]
    y = u[:, k + 1 : k + 1 + sys.d]
    side = (u[:, -1] < 0.5).astype(int)
    state = np.concatenate([s, t[:, None], y], axis=1)
    dummy = np.zeros(state.shape + (1,))
    sa, xa, _ = cs.step(side, state, dummy)
    sb, xb, _ = cs.step(cs.swap(side), state, dummy)
    side_gap = float(np.max(np.abs(cs.swap(sa) - sb)))
    return max(side_gap, float(np.max(np.abs(xa - xb))))
