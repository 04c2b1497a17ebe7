"""Spectral data of hyperbolic linear maps and the domination arithmetic.

All quantities here depend only on the moduli of eigenvalues, computed with a
dense eigensolver (the matrices are small).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import schur

from .errors import HyperbolicityError, SlackError

HYPERBOLIC_MARGIN = 1e-9


def realify(M: np.ndarray) -> np.ndarray:
    """Real 2k x 2k form of a complex k x k matrix.

    Coordinates are ordered (Re z_1, ..., Re z_k, Im z_1, ..., Im z_k).
    """
    M = np.asarray(M, dtype=complex)
    re, im = M.real, M.imag
    return np.block([[re, -im], [im, re]])


@dataclass(frozen=True)
class HyperbolicMatrix:
    entries: np.ndarray
    spec_min: float
    spec_max: float
    moduli: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.entries)

    def real_form(self) -> np.ndarray:
        """The matrix acting on R^k (or on R^2k for complex entries)."""
        if self.is_complex:
            return realify(self.entries)
        return self.entries

    def inverse(self) -> "HyperbolicMatrix":
        return hyperbolic_matrix(np.linalg.inv(self.entries))

    def norm(self) -> float:
        """Operator norm |A| (largest singular value)."""
        return float(np.linalg.norm(self.entries, 2))

    def unit_gap(self) -> float:
        return float(np.min(np.abs(self.moduli - 1.0)))


def hyperbolic_matrix(entries) -> HyperbolicMatrix:
    """Validate ``entries`` and wrap them with their spectral radii."""
    M = np.array(entries)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if np.iscomplexobj(M) and np.all(M.imag == 0):
        M = M.real
    M = M.astype(complex if np.iscomplexobj(M) else float)
    if abs(np.linalg.det(M)) == 0.0:
        raise HyperbolicityError("singular matrix")
    moduli = np.sort(np.abs(np.linalg.eigvals(M)))
    if np.any(np.abs(moduli - 1.0) <= HYPERBOLIC_MARGIN):
        raise HyperbolicityError(f"eigenvalue of unit modulus: {moduli}")
    M.setflags(write=False)
    moduli.setflags(write=False)
    return HyperbolicMatrix(M, float(moduli[0]), float(moduli[-1]), moduli)


def as_hyperbolic(A) -> HyperbolicMatrix:
    return A if isinstance(A, HyperbolicMatrix) else hyperbolic_matrix(A)


def schur_normal_form(A) -> HyperbolicMatrix:
    """Unitarily conjugate triangular form with the contracting eigenvalues first.

    Norms and angles on the sphere are unchanged, while the stable subspace
    becomes a coordinate subspace, so directions exponentially close to it
    keep full relative precision.
    """
    H = as_hyperbolic(A)
    T, _, _ = schur(H.entries, output="complex" if H.is_complex else "real", sort="iuc")
    T = np.array(T)
    T.setflags(write=False)
    return HyperbolicMatrix(T, H.spec_min, H.spec_max, H.moduli)


@dataclass(frozen=True)
class RateBounds:
    tau: float
    nu: float
    xi: float

    @property
    def ratio(self) -> float:
        """nu / tau, the per-step rate of the projectivized bounds."""
        return self.nu / self.tau

    def chain_holds(self, lam: float, mu: float) -> bool:
        return lam < self.tau / self.nu < self.nu / self.tau < mu

    def delta1(self, lam: float, mu: float) -> float:
        """Largest margin d with lam + d < tau/nu and nu/tau < mu - d."""
        return min(self.tau / self.nu - lam, mu - self.nu / self.tau)


def default_slack(A: HyperbolicMatrix) -> float:
    return 0.05 * min(A.spec_min, A.unit_gap())


def spectral_rate_bounds(A, xi: float | None = None) -> RateBounds:
    A = as_hyperbolic(A)
    if xi is None:
        xi = default_slack(A)
    if xi < 0:
        raise SlackError("slack must be non-negative")
    if xi >= A.spec_min:
        raise SlackError(f"slack {xi} >= spec_min {A.spec_min}")
    return RateBounds(tau=A.spec_min - xi, nu=A.spec_max + xi, xi=xi)


def require_chain(bounds: RateBounds, lam: float, mu: float) -> None:
    if not bounds.chain_holds(lam, mu):
        raise HyperbolicityError(
            f"rate chain fails: lam={lam} tau/nu={bounds.tau / bounds.nu:.6g} "
            f"nu/tau={bounds.ratio:.6g} mu={mu}"
        )


@dataclass(frozen=True)
class DominationReport:
    base_ratio_up: float
    base_ratio_down: float
    fiber_min_expand: float
    fiber_max_contract: float
    pass_: bool
    lambda_prime: float
    mu_prime: float

    @property
    def passed(self) -> bool:
        return self.pass_


def check_domination(A, B) -> DominationReport:
    """Spectral test that the fiber map B dominates the base map A."""
    A = as_hyperbolic(A)
    B = as_hyperbolic(B)
    expand = B.moduli[B.moduli > 1.0]
    contract = B.moduli[B.moduli < 1.0]
    fiber_min_expand = float(expand.min()) if expand.size else np.inf
    fiber_max_contract = float(contract.max()) if contract.size else 0.0
    up = A.spec_max / A.spec_min
    down = A.spec_min / A.spec_max
    ok = bool(up < fiber_min_expand and down > fiber_max_contract)
    return DominationReport(
        base_ratio_up=up,
        base_ratio_down=down,
        fiber_min_expand=fiber_min_expand,
        fiber_max_contract=fiber_max_contract,
        pass_=ok,
        lambda_prime=A.spec_min,
        mu_prime=A.spec_max,
    )


def stable_unstable_bases(A) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (columns) of the stable and unstable subspaces of the real form."""
    from scipy.linalg import schur

    A = as_hyperbolic(A)
    M = A.real_form()
    _, Qs, ns = schur(M, output="real", sort="iuc")
    _, Qu, nu = schur(np.linalg.inv(M), output="real", sort="iuc")
    return Qs[:, :ns], Qu[:, :nu]
