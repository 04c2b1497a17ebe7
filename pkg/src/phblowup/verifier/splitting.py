"""Invariant splitting E^s + E^c + E^u of a model system by frame iteration.

E^cu is the limit of pushed-forward frames of dimension k + d_u started far
in the past, E^cs the limit of pulled-back frames of dimension k + d_s
started far in the future, and E^c their intersection. QR is applied in the
chart coordinates; a subspace does not depend on the metric, only the angles
and norms measured afterwards do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError


@dataclass(frozen=True)
class OrbitFrames:
    """Splitting frames along forward orbit pieces x_0 .. x_n of each sample point."""

    states: np.ndarray  # (n+1, N, state_dim)
    Es: np.ndarray  # (n+1, N, tangent_dim, d_s)
    Ec: np.ndarray  # (n+1, N, tangent_dim, k)
    Eu: np.ndarray  # (n+1, N, tangent_dim, d_u)
    gap: np.ndarray  # (n+1, N): 1 - k-th cosine of the E^cu / E^cs intersection
    spread: float  # largest sine between subspaces grown from two independent random frames


@dataclass(frozen=True)
class SplittingField:
    points: np.ndarray
    Es: np.ndarray
    Ec: np.ndarray
    Eu: np.ndarray
    residual: float
    spread: float
    angle: np.ndarray  # per point, angle between E^c and the horizontal space H
    shells: np.ndarray | None = None
    shell_angles: np.ndarray | None = None
    alpha: float | None = None
    orbit_frames: OrbitFrames | None = None


def random_tangent(sys, states, m, rng):
    """Random tangent frames at the given states (v_s orthogonal to s when blown up)."""
    n = states.shape[0]
    V = rng.standard_normal((n, sys.tangent_dim, m))
    if sys.blown:
        s = states[:, : sys.k]
        V[:, : sys.k] -= s[:, :, None] * np.einsum("nk,nkm->nm", s, V[:, : sys.k])[:, None, :]
    return V


def _qr(V):
    Q, _ = np.linalg.qr(V)
    return Q


def metric_qr(sys, state, V):
    """Frame spanning the same subspace, orthonormal for the system metric."""
    W = sys.to_orthonormal(state, V)
    _, R = np.linalg.qr(W)
    return V @ np.linalg.inv(R)


def principal_sines(sys, state, U, V):
    """Sine of the largest principal angle between span U and span V (system metric)."""
    Qu = _qr(sys.to_orthonormal(state, U))
    Qv = _qr(sys.to_orthonormal(state, V))
    # equal dimensions, so the largest angle is symmetric; the projection
    # residual keeps relative accuracy for tiny angles where 1 - cos^2 does not
    R = Qv - Qu @ (np.swapaxes(Qu, -1, -2) @ Qv)
    return np.linalg.norm(R, 2, axis=(-2, -1))


def splitting_along_orbits(sys, points, n_ahead: int = 0, iters: int = 200, tol: float = 1e-6,
                           seed: int = 0) -> OrbitFrames:
    """Frames of E^s, E^c, E^u at x_j = F^j(points), j = 0..n_ahead."""
    rng = np.random.default_rng(seed)
    points = np.atleast_2d(points)
    N = points.shape[0]
    k = sys.k
    d_s = sys.B.stable.shape[1]
    d_u = sys.B.unstable.shape[1]
    dummy = np.zeros(points.shape + (1,))

    past = [points]
    cur = points
    for _ in range(iters):
        cur, _ = sys.step(cur, dummy, inverse=True)
        past.append(cur)
    future = [points]
    cur = points
    for _ in range(n_ahead + iters):
        cur, _ = sys.step(cur, dummy)
        future.append(cur)
    orbit = past[::-1] + future[1:]  # index iters corresponds to x_0
    n_pts = len(orbit)

    # Two independent random frames are carried side by side; once iterated
    # long enough they span the same subspace, which is the convergence test.
    def halves(V, m):
        return _qr(V[..., :m]), _qr(V[..., m:])

    # forward pass: E^cu, whose leading d_u columns converge to E^u
    m = k + d_u
    V = np.concatenate(halves(random_tangent(sys, orbit[0], 2 * m, rng), m), axis=-1)
    Ecu = []
    for j in range(n_pts - 1):
        _, V = sys.step(orbit[j], V)
        V = np.concatenate(halves(V, m), axis=-1)
        if j + 1 >= iters and j + 1 <= iters + n_ahead:
            Ecu.append(V)
    # backward pass: E^cs, whose leading d_s columns converge to E^s
    m = k + d_s
    V = np.concatenate(halves(random_tangent(sys, orbit[-1], 2 * m, rng), m), axis=-1)
    Ecs = [None] * (n_ahead + 1)
    for j in range(n_pts - 1, iters, -1):
        _, V = sys.step(orbit[j], V, inverse=True)
        V = np.concatenate(halves(V, m), axis=-1)
        if j - 1 <= iters + n_ahead:
            Ecs[j - 1 - iters] = V
    if n_ahead + 1 > len(Ecu) or any(x is None for x in Ecs):
        raise ConvergenceError("orbit too short for the requested frames")
    x0 = orbit[iters]
    spread = 0.0
    for W, d in ((Ecu[0], d_u), (Ecs[0], d_s)):
        m = k + d
        spread = max(spread, float(np.max(principal_sines(sys, x0, W[..., :m], W[..., m:]))))
        spread = max(spread, float(np.max(principal_sines(sys, x0, W[..., :d], W[..., m : m + d]))))
    if not spread <= tol:
        raise ConvergenceError(f"frames not converged after {iters} iterations: spread {spread:.3g}")
    Ecu = [W[..., : k + d_u] for W in Ecu]
    Ecs = [W[..., : k + d_s] for W in Ecs]

    Es_l, Ec_l, Eu_l, gap_l = [], [], [], []
    for j in range(n_ahead + 1):
        Qcu, Qcs = Ecu[j], Ecs[j]
        U, S, _ = np.linalg.svd(np.swapaxes(Qcu, -1, -2) @ Qcs)
        Ec_l.append(Qcu @ U[..., :, :k])
        gap_l.append(1.0 - S[..., k - 1])
        Eu_l.append(Qcu[..., :d_u])
        Es_l.append(Qcs[..., :d_s])
    gap = np.array(gap_l)
    if np.nanmax(gap) > tol:
        raise ConvergenceError(f"centre intersection did not converge: 1 - cos = {np.nanmax(gap):.3g}")
    return OrbitFrames(
        states=np.stack(orbit[iters : iters + n_ahead + 1]),
        Es=np.stack(Es_l), Ec=np.stack(Ec_l), Eu=np.stack(Eu_l), gap=gap, spread=spread,
    )


def fit_holder(shells, angles) -> float:
    """Exponent alpha of angle ~ C t^alpha by least squares in log-log scale."""
    shells = np.asarray(shells, dtype=float)
    angles = np.asarray(angles, dtype=float)
    ok = (shells > 0) & (angles > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(shells[ok]), np.log(angles[ok]), 1)[0])


def estimate_splitting(sys, points, iters: int = 200, tol: float = 1e-6, seed: int = 0,
                       shell_index=None, shells=None, n_ahead: int = 1) -> SplittingField:
    """Splitting at the given points with invariance residual and angle to the horizontal space.

    When shell labels are given the per-shell maximal angle is recorded and
    its decay exponent alpha is fitted. Frames along the next n_ahead orbit
    points are kept for reuse by the band certificate.
    """
    frames = splitting_along_orbits(sys, points, n_ahead=max(n_ahead, 1), iters=iters, tol=tol, seed=seed)
    x0 = frames.states[0]
    imgs = []
    for E in (frames.Es[0], frames.Ec[0], frames.Eu[0]):
        _, W = sys.step(x0, E)
        imgs.append(W)
    x1 = frames.states[1]
    res = max(
        float(np.max(principal_sines(sys, x1, W, E)))
        for W, E in zip(imgs, (frames.Es[1], frames.Ec[1], frames.Eu[1]))
    )
    if res > tol:
        raise ConvergenceError(f"splitting invariance residual {res:.3g} exceeds {tol:.3g}")
    H = sys.horizontal_frame(x0)
    angle = np.arcsin(np.clip(principal_sines(sys, x0, frames.Ec[0], H), 0.0, 1.0))
    shell_angles = alpha = None
    if shell_index is not None and shells is not None:
        shell_angles = np.array([angle[shell_index == i].max() for i in range(len(shells))])
        alpha = fit_holder(shells, shell_angles)
    return SplittingField(
        points=x0, Es=frames.Es[0], Ec=frames.Ec[0], Eu=frames.Eu[0], residual=res, spread=frames.spread,
        angle=angle,
        shells=None if shells is None else np.asarray(shells), shell_angles=shell_angles, alpha=alpha,
        orbit_frames=frames,
    )
