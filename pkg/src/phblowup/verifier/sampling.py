"""Initial conditions for the certifiers."""

from __future__ import annotations

import numpy as np
from scipy.stats import norm, qmc

from .. import induced
from ..blowup_geom import blow_up_array
from ..speclin import as_hyperbolic, stable_unstable_bases


def sobol(n: int, dim: int, seed: int) -> np.ndarray:
    """n scrambled Sobol points in [0, 1)^dim."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(n, 2))))
    return sampler.random_base2(m)[:n]


def sphere_points(u: np.ndarray) -> np.ndarray:
    """Map uniform points of [0, 1)^k to the unit sphere S^{k-1}."""
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def shell_states(sys, shells, per_shell: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """States on shells {t = const}; returns (states, shell index per state)."""
    k, d = sys.k, sys.d
    u = sobol(per_shell, k + d, seed)
    s = sphere_points(u[:, :k])
    y = u[:, k:]
    states, idx = [], []
    for i, t in enumerate(shells):
        if sys.blown:
            st = np.concatenate([s, np.full((per_shell, 1), t), y], axis=1)
        else:
            st = np.concatenate([t * s, y], axis=1)
        states.append(st)
        idx.append(np.full(per_shell, i))
    return np.concatenate(states), np.concatenate(idx)


def _power_norms(M, E, j_min, j_max):
    """||M^j E||_2 for j in [j_min, j_max], indexed from j_min."""
    Minv = np.linalg.inv(M)
    out = np.empty(j_max - j_min + 1)
    P = E.copy()
    for j in range(0, j_max + 1):
        if j >= j_min:
            out[j - j_min] = np.linalg.norm(P, 2) if P.size else 0.0
        P = M @ P
    P = E.copy()
    for j in range(0, j_min - 1, -1):
        if j <= j_max:
            out[j - j_min] = np.linalg.norm(P, 2) if P.size else 0.0
        P = Minv @ P
    return out


def saddle_orbits(A, n: int, count: int, rng: np.random.Generator, radius: float = 1.0,
                  log_range: tuple[float, float] = (-4.0, 0.0)):
    """Orbits of length n of the induced map that stay in {t < radius}.

    The point at a random time m is placed at x_m = E_s c_s + E_u c_u with
    log-uniform component sizes scaled so that neither component leaves
    radius/2 over the window [-m, n - m]. Returns (s, t) of shapes
    (n+1, count, k) and (n+1, count).
    """
    M = as_hyperbolic(A).real_form()
    Es, Eu = stable_unstable_bases(M)
    k = M.shape[0]
    m = rng.integers(0, n + 1, count)
    gains_s = _power_norms(M, Es, -n, n)
    gains_u = _power_norms(M, Eu, -n, n)
    x0 = np.empty((count, k))
    for mm in np.unique(m):
        sel = np.flatnonzero(m == mm)
        gs = gains_s[n - mm : 2 * n - mm + 1].max()
        gu = gains_u[n - mm : 2 * n - mm + 1].max()
        parts = []
        for E, g in ((Es, gs), (Eu, gu)):
            c = rng.standard_normal((len(sel), E.shape[1]))
            c /= np.linalg.norm(c, axis=1, keepdims=True)
            size = 0.45 * radius * 10.0 ** rng.uniform(*log_range, len(sel)) / g
            parts.append((c * size[:, None]) @ E.T)
        xm = parts[0] + parts[1]
        x0[sel] = xm @ np.linalg.matrix_power(np.linalg.inv(M), int(mm)).T
    s, t = blow_up_array(x0)
    return induced.iterate(M, s, t, n)


def passage_orbits(A, count: int, rng: np.random.Generator, log_range=(-5.0, -0.5), cap: int = 10_000):
    """Full passages through the unit disk: closest approach, then both legs until t >= 1.

    Returns a list of t-profiles (one 1-d array per passage, in time order).
    """
    M = as_hyperbolic(A).real_form()
    Minv = np.linalg.inv(M)
    Es, Eu = stable_unstable_bases(M)
    out = []
    for _ in range(count):
        cs = rng.standard_normal(Es.shape[1])
        cu = rng.standard_normal(Eu.shape[1])
        x = (Es @ cs / np.linalg.norm(cs)) * 10 ** rng.uniform(*log_range)
        x = x + (Eu @ cu / np.linalg.norm(cu)) * 10 ** rng.uniform(*log_range)
        fwd, bwd = [], []
        y = x.copy()
        while np.linalg.norm(y) < 1.0 and len(fwd) < cap:
            fwd.append(np.linalg.norm(y))
            y = M @ y
        y = Minv @ x
        while np.linalg.norm(y) < 1.0 and len(bwd) < cap:
            bwd.append(np.linalg.norm(y))
            y = Minv @ y
        out.append(np.array(bwd[::-1] + fwd))
    return out


def pulled_back_directions(A, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors Â^{-m} s0 with s0 uniform on the sphere and m uniform in [0, n].

    Pulled-back directions reach the thin neighbourhoods of the contracting
    directions where n-step quantities on the sphere are extremal.
    """
    M = as_hyperbolic(A).real_form()
    Minv = np.linalg.inv(M)
    k = M.shape[0]
    s = rng.standard_normal((count, k))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    m = rng.integers(0, n + 1, count)
    for _ in range(n):
        move = m > 0
        s[move] = s[move] @ Minv.T
        s[move] /= np.linalg.norm(s[move], axis=1, keepdims=True)
        m[move] -= 1
    return s
