"""Partial hyperbolicity certificates for model systems and their suspensions.

Growth along each band is the exact extremal growth of the restricted
differential: per step, the image of a metric-orthonormal frame of one
bundle is expanded in the frames of all three bundles at the next point and
the block belonging to the same bundle is kept. Products of these blocks
give DF^n restricted to E^s, E^c and E^u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..speclin import as_hyperbolic, check_domination, spectral_rate_bounds
from .sampling import shell_states, sobol, sphere_points
from .splitting import OrbitFrames, SplittingField, metric_qr, splitting_along_orbits

BANDS = ("stable", "center", "unstable")
INFLATION = 1.1
MIN_SAMPLES = 16


@dataclass(frozen=True)
class LocalCenterReport:
    omega: float
    delta2: float
    c4: float
    alpha: float
    replay_holds: bool


@dataclass(frozen=True)
class AbsorptionReport:
    c: float
    delta3: float
    max_segments: int
    absorbed: bool


@dataclass
class PHCertificate:
    bands: dict  # band -> (low, high) log-rate per unit time, inflated
    raw_bands: dict  # band -> (low, high) before inflation
    delta: float
    C_hat: float
    verdict: str
    n_max: int
    samples: int
    seed: int
    witness: list = field(default_factory=list)
    delta1: float | None = None
    chain_holds: bool | None = None
    domination_passed: bool | None = None
    local_center: LocalCenterReport | None = None
    absorption: AbsorptionReport | None = None
    per_time: dict = field(default_factory=dict)
    roof_exponent: float | None = None
    additivity: float | None = None

    @property
    def exit_code(self) -> int:
        return {"certified": 0, "falsified": 2}.get(self.verdict, 1)

    def rows(self):
        for b in BANDS:
            lo, hi = self.bands[b]
            yield b, lo, hi, self.delta, self.verdict


# -- sample points ------------------------------------------------------------------
def ph_sample_points(sys, samples: int, seed: int, region: str = "shells", horizon: int = 1):
    """Initial points for the certificate.

    'shells': low-discrepancy points on t in {eps/4, eps/2, eps, 2 eps} and on
    the exceptional set (a tiny positive t for complex blow-ups, whose metric
    degenerates at t = 0). 'fiberwise': points close enough to the fixed
    point that ``horizon`` steps stay in the linear core.
    """
    eps = sys.eps
    if region == "shells":
        if sys.blown and sys.complex_blowup:
            zero = 1e-3 * eps
        else:
            zero = 0.0
        shells = [zero, eps / 4, eps / 2, eps, 2 * eps]
        per = max(1, samples // len(shells))
        states, idx = shell_states(sys, shells, per, seed)
        return states, idx, shells
    if region == "fiberwise":
        A = as_hyperbolic(sys.A)
        radius = sys.core_radius / max(1.0, A.norm()) ** horizon
        u = sobol(samples, sys.k + sys.d + 1, seed)
        s = sphere_points(u[:, : sys.k])
        t = radius * u[:, sys.k]
        y = u[:, sys.k + 1 :]
        if sys.blown:
            states = np.concatenate([s, t[:, None], y], axis=1)
        else:
            states = np.concatenate([t[:, None] * s, y], axis=1)
        return states, np.zeros(samples, dtype=int), [radius]
    raise ValueError("region must be 'shells' or 'fiberwise'")


# -- band products ----------------------------------------------------------------------
def _band_blocks(sys, frames: OrbitFrames, n: int):
    """Per-step restricted differentials for every band, plus one-step centre data."""
    k, d_s = sys.k, sys.B.stable.shape[1]
    blocks = {b: [] for b in BANDS}
    local = []  # (t, centre ratio, horizontal ratio) per step and column
    cols = {"stable": slice(k, k + d_s), "center": slice(0, k), "unstable": slice(k + d_s, None)}
    ortho = [None] * (n + 1)
    for j in range(n + 1):
        x = frames.states[j]
        ortho[j] = {
            "center": metric_qr(sys, x, frames.Ec[j]),
            "stable": metric_qr(sys, x, frames.Es[j]),
            "unstable": metric_qr(sys, x, frames.Eu[j]),
        }
    for j in range(n):
        x, x1 = frames.states[j], frames.states[j + 1]
        basis = np.concatenate([ortho[j + 1]["center"], ortho[j + 1]["stable"], ortho[j + 1]["unstable"]], axis=2)
        Bo = sys.to_orthonormal(x1, basis)
        for b in BANDS:
            _, W = sys.step(x, ortho[j][b])
            Wo = sys.to_orthonormal(x1, W)
            coef = np.linalg.solve(Bo, Wo)
            blocks[b].append(coef[:, cols[b], :])
            if b == "center":
                Vo = sys.to_orthonormal(x, ortho[j][b])
                h_in = np.linalg.norm(Vo[:, :k], axis=1)
                h_out = np.linalg.norm(Wo[:, :k], axis=1)
                ratio_c = np.linalg.norm(Wo, axis=1) / np.linalg.norm(Vo, axis=1)
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio_h = h_out / h_in
                local.append((sys.radius(x), ratio_c, ratio_h))
    return {b: np.stack(v) for b, v in blocks.items()}, local


def _prefix_logs(M):
    """log sigma_max and log sigma_min of every prefix product, shapes (n, N)."""
    n, N, m, _ = M.shape
    P = np.broadcast_to(np.eye(m), (N, m, m)).copy()
    Pinv = P.copy()
    Minv = np.linalg.inv(M)
    hi = np.empty((n, N))
    lo = np.empty((n, N))
    for j in range(n):
        P = M[j] @ P
        Pinv = Pinv @ Minv[j]
        hi[j] = np.log(np.linalg.norm(P, 2, axis=(-2, -1)))
        lo[j] = -np.log(np.linalg.norm(Pinv, 2, axis=(-2, -1)))
    return hi, lo


def _segment_products(M, mask):
    """Extreme singular values of the block products over maximal runs of equal mask."""
    segs = []
    n = M.shape[0]
    start = 0
    for j in range(1, n + 1):
        if j == n or mask[j] != mask[start]:
            P = np.eye(M.shape[-1])
            for i in range(start, j):
                P = M[i] @ P
            sv = np.linalg.svd(P, compute_uv=False)
            segs.append((bool(mask[start]), j - start, sv[0], sv[-1]))
            start = j
    return segs


def _assemble(logs, n):
    """Raw and inflated bands and the margin from per-orbit exponents over n steps."""
    raw, bands, final = {}, {}, {}
    infl = np.log(INFLATION) / n
    for b, (hi, lo) in logs.items():
        final[b] = (lo, hi)
        raw[b] = (float(lo.min()), float(hi.max()))
        bands[b] = (raw[b][0] - infl, raw[b][1] + infl)
    delta = min(bands["center"][0] - bands["stable"][1], bands["unstable"][0] - bands["center"][1])
    return raw, bands, float(delta), final


def _verdict(delta, count, finite):
    if count < MIN_SAMPLES or not finite:
        return "inconclusive"
    return "certified" if delta > 0 else "falsified"


def _witnesses(final, bands, states, count=3):
    """Orbits that realise the overlapping band edges."""
    out = []
    lo_c, hi_c = final["center"]
    if bands["center"][0] - bands["stable"][1] <= 0:
        for i in np.argsort(lo_c)[:count]:
            out.append({"index": int(i), "bands": "stable/center", "center_exponent": float(lo_c[i]),
                        "state": states[i].tolist()})
    if bands["unstable"][0] - bands["center"][1] <= 0:
        for i in np.argsort(-hi_c)[:count]:
            out.append({"index": int(i), "bands": "center/unstable", "center_exponent": float(hi_c[i]),
                        "state": states[i].tolist()})
    return out


def _local_center(sys, local, alpha, bands, lam, mu):
    k = local[0][1].shape[1]
    t = np.concatenate([np.repeat(x[0], k) for x in local])
    rc = np.concatenate([x[1].ravel() for x in local])
    rh = np.concatenate([x[2].ravel() for x in local])
    ok = (t > 0) & np.isfinite(rh) & (rh > 0)
    t, rc, rh = t[ok], rc[ok], rh[ok]
    a = alpha if alpha is not None and np.isfinite(alpha) and alpha > 0 else 1.0
    excess = np.clip(rc / rh - 1.0, 0.0, None)
    fit, check = np.arange(t.size) % 2 == 0, np.arange(t.size) % 2 == 1
    c4 = float(np.max((excess[fit] / t[fit] ** a) ** 2)) if fit.any() else 0.0
    replay = bool(np.all(rc[check] <= INFLATION * rh[check] * (1.0 + np.sqrt(c4) * t[check] ** a)))
    omega, delta2 = 0.0, float("-inf")
    w = 0.4
    while w > 1e-4:
        near = t <= w
        if near.any():
            infl = np.log1p(np.sqrt(c4) * w**a)
            low = float(np.log(rh[near]).min()) - infl
            high = float(np.log(rh[near]).max()) + infl
            d2 = min(low - np.log(lam), np.log(mu) - high)
            if d2 > 0:
                omega, delta2 = w, d2
                break
        w /= 2
    return LocalCenterReport(omega=omega, delta2=delta2, c4=c4, alpha=a, replay_holds=replay)


def _absorption(sys, center_blocks, frames, margin):
    H = as_hyperbolic(sys.A)
    bounds = spectral_rate_bounds(H)
    c = max(H.norm(), H.inverse().norm())
    n, N = center_blocks.shape[:2]
    radius = np.stack([sys.radius(frames.states[j]) for j in range(n)])
    inside = radius < c * sys.eps
    sv = np.linalg.svd(center_blocks, compute_uv=False)
    out_pts = ~inside
    h_hi = float(np.log(sv[..., 0][out_pts]).max()) if out_pts.any() else 0.0
    h_lo = float(np.log(sv[..., -1][out_pts]).min()) if out_pts.any() else 0.0
    worst, max_segs = 0.0, 0
    for i in range(N):
        segs = _segment_products(center_blocks[:, i], inside[:, i])
        max_segs = max(max_segs, len(segs))
        total = 0.0
        for is_in, L, s_hi, s_lo in segs:
            if is_in:
                up, down = L * np.log(bounds.ratio), -L * np.log(bounds.ratio)
            else:
                up, down = L * h_hi, L * h_lo
            total += max(0.0, np.log(s_hi) - up, down - np.log(s_lo))
        worst = max(worst, total / n)
    return AbsorptionReport(c=float(c), delta3=float(np.expm1(worst)), max_segments=max_segs,
                            absorbed=bool(worst < margin))


def certify_ph(sys, split: SplittingField | None = None, n_max: int = 50, samples: int = 1000,
               seed: int = 0, region: str = "shells", iters: int = 200) -> PHCertificate:
    """Empirical three-band certificate of partial hyperbolicity along sampled orbits."""
    if split is not None and split.orbit_frames is not None and split.orbit_frames.states.shape[0] > n_max:
        frames = split.orbit_frames
        alpha = split.alpha
    else:
        points = split.points if split is not None else ph_sample_points(sys, samples, seed, region, n_max)[0]
        frames = splitting_along_orbits(sys, points, n_ahead=n_max, iters=iters, seed=seed)
        alpha = split.alpha if split is not None else None
    blocks, local = _band_blocks(sys, frames, n_max)
    prefix = {b: _prefix_logs(blocks[b]) for b in BANDS}
    logs = {b: (hi[-1] / n_max, lo[-1] / n_max) for b, (hi, lo) in prefix.items()}
    raw, bands, delta, final = _assemble(logs, n_max)
    # smallest constant with every prefix inside the inflated bands
    steps = np.arange(1, n_max + 1)[:, None]
    C_log = 0.0
    for b, (hi, lo) in prefix.items():
        C_log = max(C_log, float(np.max(hi - steps * bands[b][1])), float(np.max(steps * bands[b][0] - lo)))
    N = frames.states.shape[1]
    finite = all(np.all(np.isfinite(v)) for pair in logs.values() for v in pair)
    verdict = _verdict(delta, N, finite)
    H = as_hyperbolic(sys.A)
    rb = spectral_rate_bounds(H)
    lam, mu = sys.ph.lam, sys.ph.mu
    cert = PHCertificate(
        bands=bands, raw_bands=raw, delta=delta, C_hat=float(np.exp(C_log)), verdict=verdict,
        n_max=n_max, samples=N, seed=seed,
        witness=_witnesses(final, bands, frames.states[0]) if verdict == "falsified" else [],
        delta1=rb.delta1(lam, mu), chain_holds=rb.chain_holds(lam, mu),
        domination_passed=check_domination(H, sys.B.matrix).passed,
    )
    cert.local_center = _local_center(sys, local, alpha, bands, lam, mu)
    cert.absorption = _absorption(sys, blocks["center"], frames, max(delta, 0.0))
    return cert


def certify_flow_ph(susp, t_list=(1.0, 2.0, 5.0), samples: int = 200, seed: int = 0,
                    region: str = "fiberwise", iters: int = 200) -> PHCertificate:
    """Band certificate of a suspension flow with exponents per unit time.

    The roof direction belongs to the centre band with growth exactly 1.
    """
    t_list = [float(t) for t in t_list]
    if min(t_list) < 1.0:
        raise ValueError("flow times must be >= 1")
    sys = susp.sys
    horizon = int(np.floor(max(t_list))) + 1
    base, _, _ = ph_sample_points(sys, samples, seed, region, horizon)
    theta = sobol(samples, 1, seed + 1)[:, 0]
    frames = splitting_along_orbits(sys, base, n_ahead=horizon, iters=iters, seed=seed)
    blocks, _ = _band_blocks(sys, frames, horizon)
    prefix = {b: _prefix_logs(blocks[b]) for b in BANDS}
    idx = np.arange(samples)
    per_time = {}
    raw_all = {b: [np.inf, -np.inf] for b in BANDS}
    for t in t_list:
        m = np.floor(theta + t + 1e-12).astype(int)
        logs = {}
        for b in BANDS:
            hi, lo = prefix[b]
            h = np.where(m > 0, hi[np.maximum(m, 1) - 1, idx], 0.0)
            l = np.where(m > 0, lo[np.maximum(m, 1) - 1, idx], 0.0)
            if b == "center":
                h, l = np.maximum(h, 0.0), np.minimum(l, 0.0)
            logs[b] = (h, l)
        per_time[t] = {b: (float(logs[b][1].min()), float(logs[b][0].max())) for b in BANDS}
        for b in BANDS:
            raw_all[b][0] = min(raw_all[b][0], per_time[t][b][0] / t)
            raw_all[b][1] = max(raw_all[b][1], per_time[t][b][1] / t)
    infl = np.log(INFLATION) / min(t_list)
    raw = {b: tuple(v) for b, v in raw_all.items()}
    bands = {b: (v[0] - infl, v[1] + infl) for b, v in raw.items()}
    delta = float(min(bands["center"][0] - bands["stable"][1], bands["unstable"][0] - bands["center"][1]))
    # additivity of raw log-bands: band(t) / t against band(t_min) / t_min
    t0 = min(t_list)
    dev = 0.0
    for t in t_list:
        for b in BANDS:
            for e in range(2):
                ref = per_time[t0][b][e] / t0
                if abs(ref) > 1e-12:
                    dev = max(dev, abs(per_time[t][b][e] / t - ref) / abs(ref))
    roof = 0.0
    for t in t_list:
        state = np.concatenate([base, theta[:, None]], axis=1)
        end, W = susp.flow(t, state, susp.roof_vector(samples))
        Wo = susp.to_orthonormal(end, W)
        roof = max(roof, float(np.max(np.abs(np.log(np.linalg.norm(Wo, axis=1)) / t))))
    verdict = _verdict(delta, samples, np.isfinite(delta))
    H = as_hyperbolic(sys.A)
    rb = spectral_rate_bounds(H)
    return PHCertificate(
        bands=bands, raw_bands=raw, delta=delta, C_hat=INFLATION, verdict=verdict, n_max=horizon,
        samples=samples, seed=seed, delta1=rb.delta1(sys.ph.lam, sys.ph.mu),
        chain_holds=rb.chain_holds(sys.ph.lam, sys.ph.mu),
        domination_passed=check_domination(H, sys.B.matrix).passed,
        per_time=per_time, roof_exponent=roof, additivity=dev,
    )
