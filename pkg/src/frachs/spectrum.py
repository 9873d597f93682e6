"""Spectrum of the linearization per spherical-harmonic sector.

Linearizing the ground-state equation at v gives, on the degree-ell sector,
the generalized eigenvalue problem

    (Lambda_ell(D) + lambda) f = mu * v^(q-2) f.

Writing A for the (positive) multiplier operator and W = diag(v^(q-2)), the
pencil is reduced symmetrically through the *inverse* square root of A:

    C = A^(-1/2) W A^(-1/2),    C y = (1/mu) y,    f = A^(-1/2) y.

A^(-1/2) is itself a Fourier multiplier, so C is assembled exactly, its norm
is 1/mu_1 = O(1), and the wanted smallest mu are the top of C's spectrum,
where dense symmetric solvers deliver near machine precision.  (Reducing
through W^(-1/2) instead puts the interesting eigenvalues at the bottom of a
matrix of norm ~ max(Lambda)/min(w), which costs 8+ digits here.)

Known structure used as cross-checks downstream: mu_1 = 1 with eigenfunction
v itself, mu_2 = q-1 with the odd eigenfunction v'; every eigenvalue in the
sectors ell >= 1 must clear q-1 (the nondegeneracy gap).  The first sector-1
eigenvalue as a function of lambda is the stability indicator of the radial
minimizer; a sign change of nu_1(lambda) - (q-1) locates the
symmetry-breaking threshold.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .efgrid import EFGrid, Profile, ProblemParams
from .groundstate import ConvergenceError, GroundState, PositivityError, solve_ground

__all__ = [
    "SectorSpectrum",
    "sector_spectrum",
    "sector_eigenvalues_lanczos",
    "harmonic_multiplicity",
    "NondegeneracyReport",
    "nondegeneracy_report",
    "ScanRow",
    "StabilityScan",
    "stability_scan",
]

# weights below this fraction of the max are dominated by tail roundoff;
# kept as a guard even though the inverse reduction tolerates tiny weights
_WEIGHT_FLOOR = 1e-300


def harmonic_multiplicity(n: int, ell: int) -> int:
    """Dimension of the space of degree-ell spherical harmonics in n variables."""
    if ell == 0:
        return 1
    if n == 2:
        return 2
    return (2 * ell + n - 2) * math.comb(ell + n - 3, ell) // (n - 2)


@dataclass
class SectorSpectrum:
    """Lowest eigenpairs of one sector, weight-orthonormal eigenfunctions."""

    ell: int
    eigenvalues: np.ndarray
    eigenfunctions: list[Profile]
    weight: Profile
    gap_to_qminus1: float
    multiplicity: int = field(default=1)


def _weight_values(ground: GroundState) -> np.ndarray:
    # positive part: roundoff tails of strongly shifted ground states may
    # ripple below zero, and non-integer q-2 needs a nonnegative base
    w = np.maximum(ground.v.values, 0.0) ** (ground.params.q - 2.0)
    if np.max(w) <= _WEIGHT_FLOOR:
        raise ValueError("initialization weight underflowed; ground state invalid")
    return w


def _half_inverse_kernel(ground: GroundState, ell: int) -> np.ndarray:
    mult = ground.params.multiplier(ground.grid, ell, ground.params.lam)
    if np.min(mult) <= 0.0:
        raise ValueError("shifted sector multiplier must be positive")
    return np.fft.irfft(mult ** -0.5, n=ground.grid.N)


def _gap(ell: int, q: float, mu: np.ndarray) -> float:
    """Margin over q-1; in the radial sector skip the eigenvalues pinned at 1 and q-1."""
    target = q - 1.0
    if ell == 0:
        above = mu[mu > target * (1.0 + 1e-3)]
        return float(above[0] - target) if above.size else math.nan
    return float(mu[0] - target)


def sector_spectrum(ground: GroundState, ell: int, m: int) -> SectorSpectrum:
    """Dense solve for the m smallest eigenvalues of sector ell.

    Eigenfunctions are normalized to unit weighted norm, mutually orthogonal in
    the v^(q-2)-weighted pairing, with a deterministic sign convention.
    """
    grid, params = ground.grid, ground.params
    if not 1 <= m <= grid.N // 4:
        raise ValueError(f"m must lie in [1, N/4], got {m}")
    w = _weight_values(ground)
    r = _half_inverse_kernel(ground, ell)
    R = sla.circulant(r)
    C = R @ (w[:, None] * R)
    C = 0.5 * (C + C.T)
    theta, Y = sla.eigh(C, subset_by_index=[grid.N - m, grid.N - 1])
    theta, Y = theta[::-1], Y[:, ::-1]
    mu = 1.0 / theta

    mult_half_inv = params.multiplier(grid, ell, params.lam) ** -0.5
    h = grid.spacing
    funcs = []
    for i in range(m):
        f = np.fft.irfft(mult_half_inv * np.fft.rfft(Y[:, i]), n=grid.N)
        norm = math.sqrt(h * float(np.dot(w * f, f)))
        f /= norm
        anchor = int(np.argmax(np.abs(f)))
        if f[anchor] < 0.0:
            f = -f
        funcs.append(Profile(grid, f))
    return SectorSpectrum(
        ell=ell,
        eigenvalues=mu,
        eigenfunctions=funcs,
        weight=Profile(grid, w),
        gap_to_qminus1=_gap(ell, params.q, mu),
        multiplicity=harmonic_multiplicity(params.n, ell),
    )


def sector_eigenvalues_lanczos(ground: GroundState, ell: int, k: int = 1,
                               max_steps: int = 400, rtol: float = 1e-14) -> np.ndarray:
    """Matrix-free solve for the k smallest sector eigenvalues.

    Deterministic Lanczos with full reorthogonalization on C, started from the
    normalized weight vector; each operator application costs two transforms.
    Used where many eigenvalue-only solves are needed (stability scans, grid
    refinement studies).
    """
    grid = ground.grid
    w = _weight_values(ground)
    mult_half_inv = ground.params.multiplier(grid, ell, ground.params.lam) ** -0.5
    N = grid.N

    def apply_c(y: np.ndarray) -> np.ndarray:
        t = np.fft.irfft(mult_half_inv * np.fft.rfft(y), n=N)
        t *= w
        return np.fft.irfft(mult_half_inv * np.fft.rfft(t), n=N)

    # start vector carries both parities: the pencil commutes with the
    # reflection, and an even start would never see odd eigenfunctions
    start = w * (1.0 + 0.25 * np.sin(np.pi * grid.nodes / grid.L))
    basis = [start / np.linalg.norm(start)]
    alphas: list[float] = []
    betas: list[float] = []
    prev = None
    for _ in range(max_steps):
        u = apply_c(basis[-1])
        a = float(np.dot(basis[-1], u))
        alphas.append(a)
        u -= a * basis[-1]
        if len(basis) > 1:
            u -= betas[-1] * basis[-2]
        for vec in basis:  # full reorthogonalization
            u -= np.dot(vec, u) * vec
        tri = np.diag(alphas)
        if betas:
            tri += np.diag(betas, 1) + np.diag(betas, -1)
        theta = np.linalg.eigvalsh(tri)[-k:][::-1]
        if prev is not None and prev.size == theta.size and np.all(
            np.abs(theta - prev) <= rtol * np.abs(theta)
        ):
            return 1.0 / theta
        prev = theta
        b = float(np.linalg.norm(u))
        if b < 1e-15:
            return 1.0 / prev
        betas.append(b)
        basis.append(u / b)
    return 1.0 / prev


@dataclass
class NondegeneracyReport:
    """Structured verdict on the spectral-gap structure of the linearization."""

    passed: bool
    q: float
    mu_radial: np.ndarray
    unit_eigenvalue_error: float
    qminus1_eigenvalue_error: float
    qminus1_simple: bool
    qminus1_eigenfunction_odd: bool
    sector_margins: dict[int, float]
    kappa_margin: float
    failures: list[str]


def nondegeneracy_report(ground: GroundState, ell_max: int = 3, m: int = 4,
                         unit_tol: float = 1e-5, qm1_tol: float = 1e-4) -> NondegeneracyReport:
    """Check the expected gap structure: in the radial sector exactly one
    eigenvalue at 1 and one at q-1 (simple, odd eigenfunction); all computed
    eigenvalues of sectors 1..ell_max strictly above q-1.

    Assertion failures are collected into the report, not raised.
    """
    if ground.params.lam != 0.0:
        raise ValueError("nondegeneracy_report requires a lambda = 0 ground state")
    q = ground.params.q
    failures: list[str] = []

    radial = sector_spectrum(ground, 0, max(m, 3))
    mu = radial.eigenvalues
    near_one = np.abs(mu - 1.0) <= unit_tol
    near_qm1 = np.abs(mu - (q - 1.0)) <= qm1_tol
    err_one = float(np.min(np.abs(mu - 1.0)))
    err_qm1 = float(np.min(np.abs(mu - (q - 1.0))))
    if int(np.sum(near_one)) != 1:
        failures.append(f"sector 0: expected exactly one eigenvalue at 1, got {mu}")
    if int(np.sum(near_qm1)) != 1:
        failures.append(f"sector 0: expected exactly one eigenvalue at q-1={q - 1}, got {mu}")
    simple = bool(np.sum(near_qm1) == 1)
    odd = False
    if simple:
        idx = int(np.argmax(near_qm1))
        f = radial.eigenfunctions[idx]
        asym = np.max(np.abs(f.values + f.reflected().values)) / np.max(np.abs(f.values))
        odd = bool(asym <= 1e-6)
        if not odd:
            failures.append(f"sector 0: eigenfunction at q-1 not odd (asymmetry {asym:.2e})")
        if idx + 1 < mu.size and mu[idx + 1] - mu[idx] <= 1e-6:
            simple = False
            failures.append(
                f"sector 0: eigenvalue at q-1 not simple (next at {mu[idx + 1]:.12g})"
            )

    margins: dict[int, float] = {0: _gap(0, q, mu) / (q - 1.0)}
    for ell in range(1, ell_max + 1):
        sector = sector_spectrum(ground, ell, m)
        margins[ell] = float(sector.eigenvalues[0] / (q - 1.0) - 1.0)
        if np.min(sector.eigenvalues) <= q - 1.0:
            failures.append(
                f"sector {ell}: eigenvalue {np.min(sector.eigenvalues):.12g} does not exceed q-1"
            )
    kappa_margin = min(margins.values())
    if not kappa_margin > 0.0:
        failures.append(f"spectral margin over q-1 not positive: {kappa_margin:.3e}")

    return NondegeneracyReport(
        passed=not failures,
        q=q,
        mu_radial=mu,
        unit_eigenvalue_error=err_one,
        qminus1_eigenvalue_error=err_qm1,
        qminus1_simple=simple,
        qminus1_eigenfunction_odd=odd,
        sector_margins=margins,
        kappa_margin=kappa_margin,
        failures=failures,
    )


@dataclass
class ScanRow:
    lam: float
    best_constant: float
    nu1: float
    indicator: float
    converged: bool


@dataclass
class StabilityScan:
    rows: list[ScanRow]
    threshold: float | None
    threshold_indicator: float | None


def _scan_row(params_base: ProblemParams, lam: float, grid: EFGrid, tol: float,
              max_iter: int) -> ScanRow:
    try:
        params = ProblemParams(n=params_base.n, s=params_base.s, q=params_base.q, lam=lam)
        ground = solve_ground(params, grid, tol=tol, max_iter=max_iter)
        nu1 = float(sector_eigenvalues_lanczos(ground, 1, k=1)[0])
        return ScanRow(lam, ground.best_constant, nu1, nu1 - (params.q - 1.0), True)
    except (ConvergenceError, PositivityError, ValueError):
        return ScanRow(lam, math.nan, math.nan, math.nan, False)


def stability_scan(params_base: ProblemParams, lambda_values: np.ndarray, grid: EFGrid,
                   tol: float = 1e-6, solver_tol: float = 1e-10, max_iter: int = 4000,
                   max_workers: int | None = None) -> StabilityScan:
    """Stability of the radial minimizer against degree-1 perturbations along lambda.

    For each lambda the ground state is re-solved and the indicator
    nu_1(lambda) - (q-1) recorded; positive means the radial state is a strict
    local minimum in the degree-1 sector.  A sign change between consecutive
    converged rows is refined by bisection until |nu_1 - (q-1)| <= tol, and the
    crossing is reported as the estimated symmetry-breaking threshold.
    """
    lams = [float(x) for x in np.asarray(lambda_values, dtype=float)]
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(
                lambda lam: _scan_row(params_base, lam, grid, solver_tol, max_iter), lams
            ))
    else:
        rows = [_scan_row(params_base, lam, grid, solver_tol, max_iter) for lam in lams]

    threshold = None
    threshold_ind = None
    for a, b in zip(rows, rows[1:]):
        if not (a.converged and b.converged):
            continue
        if a.indicator == 0.0:
            threshold, threshold_ind = a.lam, a.indicator
            break
        if a.indicator * b.indicator < 0.0:
            lo, hi = a.lam, b.lam
            flo = a.indicator
            mid_row = None
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                mid_row = _scan_row(params_base, mid, grid, solver_tol, max_iter)
                if not mid_row.converged:
                    break
                if abs(mid_row.indicator) <= tol:
                    break
                if flo * mid_row.indicator < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, mid_row.indicator
                if hi - lo <= 4.0 * np.finfo(float).eps * max(1.0, abs(hi)):
                    break
            if mid_row is not None and mid_row.converged:
                threshold, threshold_ind = mid_row.lam, mid_row.indicator
            break
    return StabilityScan(rows=rows, threshold=threshold, threshold_indicator=threshold_ind)
