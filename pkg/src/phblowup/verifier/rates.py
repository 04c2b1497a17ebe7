"""Empirical constants for the induced map near the exceptional set.

All growth factors are exact extremal values over tangent vectors: the
n-step differential is written in g_eps-orthonormal frames and its largest
and smallest singular values are compared with the reference rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import induced
from ..blowup_geom import WarpedMetricFamily, rho_profile, sphere_frame
from ..cplx_geom import complex_frame
from ..errors import SamplingError
from ..speclin import RateBounds, as_hyperbolic, schur_normal_form, spectral_rate_bounds
from .partition import CORE, partition_orbit
from .sampling import passage_orbits, pulled_back_directions, saddle_orbits

REGIONS = ("all", "flat", "core", "sphere")


@dataclass(frozen=True)
class RateCertificate:
    eps: float
    region: str
    n_max: int
    C_emp: float
    worst_upper: np.ndarray  # indexed by n - 1
    worst_lower: np.ndarray
    samples: int
    seed: int
    bounds: RateBounds

    def rows(self):
        for n in range(1, self.n_max + 1):
            yield self.eps, n, float(self.worst_upper[n - 1]), float(self.worst_lower[n - 1]), self.C_emp


@dataclass(frozen=True)
class EpsSweepReport:
    certificates: list[RateCertificate]
    mean_return_time: list[float]
    c: float

    @property
    def eps(self) -> list[float]:
        return [c.eps for c in self.certificates]

    @property
    def C_values(self) -> np.ndarray:
        return np.array([c.C_emp for c in self.certificates])

    @property
    def spread(self) -> float:
        C = self.C_values
        return float(C.max() / C.min())

    @property
    def uniform(self) -> bool:
        """C_emp bounded across the sweep while return times grow."""
        rt = np.array(self.mean_return_time)
        growing = len(rt) < 2 or bool(np.all(np.diff(rt) > 0))
        return self.spread < 2.0 and growing

    def rows(self):
        for cert, rt in zip(self.certificates, self.mean_return_time):
            yield cert.eps, cert.C_emp, rt


# -- orthonormal frames of the blow-up -------------------------------------------
def _frame_maps(s, t, eps, complex_):
    """(basis, coords): basis maps orthonormal coordinates to ambient (v_s, v_t); coords inverts it."""
    rho, _ = rho_profile(eps, t)
    batch = s.shape[:-1]
    k = s.shape[-1]
    if complex_:
        F = complex_frame(s)
        scale = np.concatenate([t[..., None], np.broadcast_to(rho[..., None], batch + (k - 2,))], axis=-1)
    else:
        F = sphere_frame(s)
        scale = np.broadcast_to(rho[..., None], batch + (k - 1,))
    basis = np.zeros(batch + (k + 1, k))
    basis[..., :k, : k - 1] = F / scale[..., None, :]
    basis[..., k, k - 1] = 1.0
    coords = np.zeros(batch + (k, k + 1))
    coords[..., : k - 1, :k] = np.swapaxes(F, -1, -2) * scale[..., :, None]
    coords[..., k - 1, k] = 1.0
    return basis, coords


def orthonormal_steps(A, s, t, eps, complex_=False):
    """One-step differentials of the induced map in g_eps-orthonormal frames.

    s, t are orbits of shape (n+1, N, k) and (n+1, N); returns (n, N, k, k).
    """
    basis, coords = _frame_maps(s, t, eps, complex_)
    J = induced.step_matrix(A, s[:-1], t[:-1])
    return coords[1:] @ J @ basis[:-1]


def sphere_steps(A, s, complex_=False):
    """One-step differentials of the projectivized map in orthonormal frames of the sphere.

    In the complex case only horizontal directions are kept, which computes
    the differential on CP^{k-1} with the Fubini-Study metric.
    """
    F = complex_frame(s)[..., 1:] if complex_ else sphere_frame(s)
    D = induced.proj_diff_matrix(A, s[:-1])
    return np.swapaxes(F[1:], -1, -2) @ D @ F[:-1]


def window_ratios(M, up: float, down: float):
    """Worst ratios over all windows of a product of step matrices.

    M has shape (n, N, m, m). For each window length j returns
    max sigma_max / up^j and max down^j / sigma_min.
    """
    n = M.shape[0]
    Minv = np.linalg.inv(M)
    upper = np.zeros(n)
    lower = np.zeros(n)
    for i in range(n):
        P = np.broadcast_to(np.eye(M.shape[-1]), M.shape[1:]).copy()
        Pinv = P.copy()
        for j in range(1, n - i + 1):
            P = M[i + j - 1] @ P
            Pinv = Pinv @ Minv[i + j - 1]
            hi, lo = extreme_singular_values(P, Pinv)
            upper[j - 1] = max(upper[j - 1], float(np.max(hi)) / up**j)
            lower[j - 1] = max(lower[j - 1], down**j / float(np.min(lo)))
    return upper, lower


def extreme_singular_values(P, Pinv):
    """(sigma_max, sigma_min) of P; the smallest one is read off the inverse.

    Long products are too ill-conditioned for a direct SVD to resolve the
    small end, while 1 / sigma_max(P^-1) keeps full relative accuracy.
    """
    return np.linalg.norm(P, 2, axis=(-2, -1)), 1.0 / np.linalg.norm(Pinv, 2, axis=(-2, -1))


def _region_orbits(A, fam, region, n_max, samples, rng):
    H = as_hyperbolic(A)
    eps = fam.eps
    if region == "sphere":
        H = schur_normal_form(H)
        s0 = pulled_back_directions(H, n_max, samples, rng)
        return induced.iterate(H, s0, np.zeros(samples), n_max)
    if region == "core":
        s, t = saddle_orbits(H, n_max, samples, rng, radius=0.999 * eps / 2, log_range=(-6.0, 0.0))
        if H.is_complex:
            return s, t
        # the exceptional set itself belongs to the core
        half = samples // 4
        t[:, :half] = 0.0
        return s, t
    if region == "all":
        return saddle_orbits(H, n_max, samples, rng, radius=0.999)
    # flat: keep whole orbits inside {eps <= t < 1}
    s, t = saddle_orbits(H, n_max, 8 * samples, rng, radius=0.999, log_range=(-1.5, 0.0))
    ok = np.all(t >= eps, axis=0)
    if not np.any(ok):
        runs = []
        for col in (t >= eps).T:
            best = cur = 0
            for v in col:
                cur = cur + 1 if v else 0
                best = max(best, cur)
            runs.append(best)
        raise SamplingError(
            f"no orbit of length {n_max} stays in the flat region", achievable=max(runs) - 1
        )
    return s[:, ok][:, :samples], t[:, ok][:, :samples]


def certify_rates(A, fam: WarpedMetricFamily, region: str = "all", n_max: int = 40,
                  samples: int = 1000, seed: int = 0, xi: float | None = None) -> RateCertificate:
    """Smallest C with C^-1 (tau/nu)^n <= |DA^n v|/|v| <= C (nu/tau)^n over sampled orbit windows.

    region 'flat' uses the stronger references tau^n and nu^n; region
    'sphere' measures the projectivized map alone in the round metric.
    """
    if region not in REGIONS:
        raise ValueError(f"region must be one of {REGIONS}")
    H = as_hyperbolic(A)
    bounds = spectral_rate_bounds(H, xi)
    rng = np.random.default_rng(seed)
    s, t = _region_orbits(H, fam, region, n_max, samples, rng)
    if region == "sphere":
        M = sphere_steps(schur_normal_form(H), s, H.is_complex)
    else:
        M = orthonormal_steps(H, s, t, fam.eps, H.is_complex)
    if region == "flat":
        up, down = bounds.nu, bounds.tau
    else:
        up, down = bounds.ratio, 1.0 / bounds.ratio
    upper, lower = window_ratios(M, up, down)
    C = max(1.0, float(upper.max()), float(lower.max()))
    return RateCertificate(fam.eps, region, n_max, C, upper, lower, s.shape[1], seed, bounds)


def return_time(A, eps: float, samples: int, seed: int) -> float:
    """Mean number of steps a disk passage spends outside U_eps = {t < c eps}.

    Counts the outbound leg from U_eps to the disk boundary plus the inbound
    leg from the boundary back to U_eps; any return to U_eps takes at least
    this long. c = max(|A|, |A^-1|).
    """
    H = as_hyperbolic(A)
    c = max(H.norm(), H.inverse().norm())
    rng = np.random.default_rng(seed)
    times = []
    for prof in passage_orbits(H, samples, rng):
        if prof.min() < c * eps:
            times.append(int(np.sum(prof >= c * eps)))
    if not times:
        raise SamplingError("no passage reached U_eps")
    return float(np.mean(times))


def sweep_epsilon(A, eps_list, n_max: int = 40, samples: int = 1000, seed: int = 0,
                  xi: float | None = None) -> EpsSweepReport:
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly descending")
    H = as_hyperbolic(A)
    certs = [certify_rates(H, WarpedMetricFamily(e), "all", n_max, samples, seed, xi) for e in eps_list]
    rts = [return_time(H, e, max(50, samples // 10), seed) for e in eps_list]
    return EpsSweepReport(certs, rts, max(H.norm(), H.inverse().norm()))


# -- linear-level constants -------------------------------------------------------
def cocycle_constants(A, n: int, samples: int, seed: int, xi: float | None = None):
    """Empirical (c1, C) at step n.

    c1: smallest c >= 1 with c^-1 tau^n <= A^n(s) <= c nu^n.
    C:  smallest C >= 1 with C^-1 (tau/nu)^n <= |DÂ^n v|/|v| <= C (nu/tau)^n.
    Sample points are pulled back along the projectivized map so that the
    near-critical directions are represented at every n; the Schur basis
    keeps them resolvable in floating point.
    """
    H = schur_normal_form(A)
    b = spectral_rate_bounds(H, xi)
    rng = np.random.default_rng(seed)
    s0 = pulled_back_directions(H, n, samples, rng)
    s, _ = induced.iterate(H, s0, np.zeros(samples), n)
    value = induced.cocycle(H, s0, n).value
    c1 = max(1.0, float(np.max(value / b.nu**n)), float(np.max(b.tau**n / value)))
    M = sphere_steps(H, s, H.is_complex)
    P = np.broadcast_to(np.eye(M.shape[-1]), M.shape[1:]).copy()
    Pinv = P.copy()
    Minv = np.linalg.inv(M)
    for j in range(n):
        P = M[j] @ P
        Pinv = Pinv @ Minv[j]
    hi, lo = extreme_singular_values(P, Pinv)
    C = max(1.0, float(np.max(hi / b.ratio**n)), float(np.max(b.ratio**-n / lo)))
    return c1, C


def gradient_constants(A, n_values, samples: int, seed: int, xi: float | None = None) -> np.ndarray:
    """max_s |grad A^n(s)| / (A^n(s) (nu/tau)^n) for each n, sampled in the Schur basis."""
    H = schur_normal_form(A)
    b = spectral_rate_bounds(H, xi)
    out = []
    for n in n_values:
        rng = np.random.default_rng(seed + n)
        ev = induced.cocycle(H, pulled_back_directions(H, n, samples, rng), n)
        g = np.linalg.norm(ev.gradient, axis=-1) / (ev.value * b.ratio**n)
        out.append(float(g.max()))
    return np.array(out)


def metric_comparison(eps_list, samples: int, seed: int, A=None):
    """Extremal |v|_eps / |v|_flat over all vectors at sampled radii, per eps.

    Without A the radii fill the transition shell [eps/2, eps]; with A they
    fill its one-step neighbourhood [eps / (2|A|), eps |A^-1|].
    """
    rng = np.random.default_rng(seed)
    if A is not None:
        H = as_hyperbolic(A)
        lo_f, hi_f = 0.5 / H.norm(), H.inverse().norm()
    else:
        lo_f, hi_f = 0.5, 1.0
    u = rng.uniform(lo_f, hi_f, samples)
    out = []
    for eps in eps_list:
        # over all vectors at radius t the ratio ranges over [1, max(1, rho/t)]
        rho, _ = rho_profile(eps, u * eps)
        out.append((1.0, float(max(1.0, np.max(rho / (u * eps))))))
    return out


def one_step_bounds(A, eps: float, samples: int, seed: int):
    """Extremal one-step growth in g_eps at points within one step of the transition shell."""
    H = as_hyperbolic(A)
    rng = np.random.default_rng(seed)
    k = H.real_form().shape[0]
    s = rng.standard_normal((samples, k))
    s /= np.linalg.norm(s, axis=1, keepdims=True)
    lo = eps / (2 * H.norm())
    hi = eps * H.inverse().norm()
    t = rng.uniform(lo, hi, samples)
    s_orb, t_orb = induced.iterate(H, s, t, 1)
    M = orthonormal_steps(H, s_orb, t_orb, eps, H.is_complex)[0]
    hi, lo = extreme_singular_values(M, np.linalg.inv(M))
    return float(lo.min()), float(hi.max())


def core_consistency(A, s, t, eps: float) -> bool:
    """On every core segment, A^n(s_i) t_i < eps/2 for each later point of the segment."""
    H = as_hyperbolic(A)
    for j in range(t.shape[1]):
        labels = partition_orbit(t[:, j], eps).labels
        idx = np.flatnonzero(labels == CORE)
        if idx.size == 0:
            continue
        i0 = idx[0]
        for n in range(idx.size):
            if not induced.cocycle(H, s[i0, j], n).value * t[i0, j] < eps / 2:
                return False
    return True
