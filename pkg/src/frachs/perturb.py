"""Dimension reduction for radially weighted perturbations of the nonlinearity.

For a bounded radial weight kappa and small eps, solutions of

    Lambda_0(D) U = (1 + eps*kappa(zeta)) U_+^(q-1)

near the translate of the ground profile v by t_log are constructed in two
steps.  First, for each t_log the *constrained* problem is solved by Newton:
find a corrector eta orthogonal to the translated derivative direction (in the
quadratic-form pairing) and a multiplier gamma such that

    F1 = Lambda_0(D) U - (1 + eps*kappa) U_+^(q-1) + gamma * Lambda_0(D) d = 0,
    F2 = <Lambda_0(D) d, eta> = 0,        U = v(. + t_log shift) + eta,

where d is the translated v' (the dilation direction; translating v is the
log-radial form of dilating the radial solution).  Second, the reduced energy
t_log -> E_eps[U(t_log)] is scanned; its critical points are exactly the
points where gamma vanishes, and there U solves the unconstrained equation.
The curve of constrained solutions is in this sense a natural constraint:
1-D stationarity upgrades to full criticality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .efgrid import EFGrid, Profile, ProblemParams
from .groundstate import GroundState, perturbed_energy

__all__ = [
    "PerturbationWeight",
    "gaussian_bump",
    "weight_from_samples",
    "gauge_weight",
    "g_envelope",
    "ReducedPoint",
    "ReducedCurve",
    "SolutionRecord",
    "solve_reduced_point",
    "reduced_curve",
    "find_solutions",
    "NewtonError",
]

_TAIL_FRACTION = 0.05  # nodes per side used to estimate the weight limits
_DEGENERATE_TV_FACTOR = 100.0  # curves flatter than this multiple of tol are a family


class NewtonError(RuntimeError):
    """Constrained Newton solve stagnated."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass
class PerturbationWeight:
    """Bounded radial weight sampled in log-radial coordinates, kappa(zeta) = k(e^-zeta)."""

    kappa: Profile
    sup_norm: float = field(init=False)
    limit_zero: float = field(init=False)      # zeta -> +inf, i.e. x -> 0
    limit_infinity: float = field(init=False)  # zeta -> -inf, i.e. |x| -> inf

    def __post_init__(self):
        vals = self.kappa.values
        k = max(4, int(_TAIL_FRACTION * vals.size))
        object.__setattr__(self, "sup_norm", float(np.max(np.abs(vals))))
        object.__setattr__(self, "limit_zero", float(np.mean(vals[-k:])))
        object.__setattr__(self, "limit_infinity", float(np.mean(vals[:k])))

    def translated(self, delta: float) -> "PerturbationWeight":
        return PerturbationWeight(self.kappa.translated(delta))


def gaussian_bump(grid: EFGrid, center: float = 0.0, width: float = 1.0,
                  height: float = 1.0) -> PerturbationWeight:
    """Builtin localized weight height * exp(-((zeta-center)/width)^2); zero limits."""
    if width <= 0.0:
        raise ValueError(f"width must be positive, got {width}")
    vals = height * np.exp(-(((grid.nodes - center) / width) ** 2))
    return PerturbationWeight(Profile(grid, vals))


def weight_from_samples(grid: EFGrid, values: np.ndarray) -> PerturbationWeight:
    return PerturbationWeight(Profile(grid, np.asarray(values, dtype=float)))


def gauge_weight(weight: PerturbationWeight, eps: float,
                 params: ProblemParams, limit_tol: float = 1e-8) -> tuple[PerturbationWeight, float]:
    """Absorb the common limit c of the weight at 0 and infinity.

    Returns the zero-limit weight (kappa - c)/(1 + eps*c) and the amplitude
    factor (1 + eps*c)^(-1/(q-2)) that maps solutions of the gauged problem
    back to the original one.  Requires the two limits to agree.
    """
    c = 0.5 * (weight.limit_zero + weight.limit_infinity)
    scale = max(1.0, weight.sup_norm)
    if abs(weight.limit_zero - weight.limit_infinity) > limit_tol * scale:
        raise ValueError(
            "weight limits at zero and infinity differ "
            f"({weight.limit_zero:.6g} vs {weight.limit_infinity:.6g}); "
            "the reduction requires a common limit"
        )
    denom = 1.0 + eps * c
    if denom <= 0.0:
        raise ValueError(f"1 + eps * limit = {denom:.6g} must be positive")
    gauged = PerturbationWeight(Profile(weight.kappa.grid, (weight.kappa.values - c) / denom))
    return gauged, denom ** (-1.0 / (params.q - 2.0))


def g_envelope(ground: GroundState, weight: PerturbationWeight, t_log: float) -> float:
    """Decay envelope of the weighted mass along the translated family.

    (sphere_measure * int |kappa(zeta)| v(zeta + t_log)^q dzeta)^((q-1)/q);
    tends to 0 as |t_log| grows when the weight has zero limits.
    """
    params, grid = ground.params, ground.grid
    shifted = ground.v.translated(t_log)
    mass = grid.spacing * float(
        np.sum(np.abs(weight.kappa.values) * np.maximum(shifted.values, 0.0) ** params.q)
    )
    return (params.sphere_measure * mass) ** ((params.q - 1.0) / params.q)


@dataclass
class ReducedPoint:
    """Constrained solution at one point of the dilation family."""

    t_log: float
    eta: Profile
    gamma: float
    energy: float
    residual: float          # sup norm of the constrained system at exit
    eta_norm: float          # quadratic-form norm of the corrector
    converged: bool
    positive: bool
    newton_steps: int


@dataclass
class ReducedCurve:
    eps: float
    points: list[ReducedPoint]
    critical_points: list[tuple[float, float, str]]  # (t_log, energy, kind)
    degenerate_family: bool


@dataclass
class SolutionRecord:
    """Verified unconstrained solution assembled from a critical point."""

    eps: float
    t_log_star: float
    profile: Profile
    residual: float          # relative sup-norm residual of the full equation
    gamma: float
    energy: float
    positive: bool
    degenerate_family: bool = False


class _NewtonWorkspace:
    """Dense pieces reused across Newton solves on one (ground, eps, weight) task."""

    def __init__(self, ground: GroundState):
        self.ground = ground
        self.grid = ground.grid
        self.params = ground.params
        if self.params.lam != 0.0:
            raise ValueError("dimension reduction requires a lambda = 0 ground state")
        mult = self.params.multiplier(self.grid, 0, 0.0)
        self.mult = mult
        self.A = sla.circulant(np.fft.irfft(mult, n=self.grid.N))
        self.vprime = ground.v.derivative()

    def apply(self, values: np.ndarray) -> np.ndarray:
        return np.fft.irfft(self.mult * np.fft.rfft(values), n=self.grid.N)

    def direction(self, t_log: float) -> tuple[np.ndarray, np.ndarray]:
        d = self.vprime.translated(t_log).values
        return d, self.apply(d)


def _newton_solve(ws: _NewtonWorkspace, eps: float, kappa: np.ndarray, t_log: float,
                  tol: float, eta0: np.ndarray | None, max_steps: int = 30) -> tuple:
    grid, params = ws.grid, ws.params
    N, h, q = grid.N, grid.spacing, params.q
    base = ws.ground.v.translated(t_log).values
    _, a = ws.direction(t_log)
    coeff = 1.0 + eps * kappa

    eta = np.zeros(N) if eta0 is None else eta0.copy()
    gamma = 0.0

    def system(eta_, gamma_):
        U_ = base + eta_
        Uplus_ = np.maximum(U_, 0.0)
        F1_ = ws.apply(U_) - coeff * Uplus_ ** (q - 1.0) + gamma_ * a
        F2_ = h * float(np.dot(a, eta_))
        return F1_, F2_, U_, max(float(np.max(np.abs(F1_))), abs(F2_))

    F1, F2, U, norm = system(eta, gamma)
    steps = 0
    while norm > tol and steps < max_steps:
        steps += 1
        Uplus = np.maximum(U, 0.0)
        diag = (q - 1.0) * coeff * Uplus ** (q - 2.0)
        J = np.empty((N + 1, N + 1))
        J[:N, :N] = ws.A
        J[np.arange(N), np.arange(N)] -= diag
        J[:N, N] = a
        J[N, :N] = h * a
        J[N, N] = 0.0
        delta = sla.solve(J, np.concatenate((-F1, (-F2,))))
        step = 1.0
        for _ in range(8):
            cand = (eta + step * delta[:N], gamma + step * delta[N])
            F1n, F2n, Un, norm_n = system(*cand)
            if norm_n < norm:
                break
            step *= 0.5
        eta, gamma = cand
        F1, F2, U, norm = F1n, F2n, Un, norm_n

    converged = norm <= tol
    return eta, gamma, U, norm, steps, converged, base


def solve_reduced_point(ground: GroundState, eps: float, weight: PerturbationWeight,
                        t_log: float, tol: float = 1e-10,
                        _ws: _NewtonWorkspace | None = None,
                        _eta0: np.ndarray | None = None) -> ReducedPoint:
    """Newton solve of the constrained problem at one dilation parameter.

    Raises NewtonError if the damped iteration stagnates.  Positivity of the
    assembled profile is checked where the translated ground carries mass and
    reported as a flag, not an error.
    """
    if abs(eps) * weight.sup_norm > 0.5:
        raise ValueError(
            f"|eps| * sup|kappa| = {abs(eps) * weight.sup_norm:.3g} exceeds 0.5; "
            "outside the perturbative regime"
        )
    ws = _ws if _ws is not None else _NewtonWorkspace(ground)
    eta, gamma, U, norm, steps, converged, base = _newton_solve(
        ws, eps, weight.kappa.values, t_log, tol, _eta0
    )
    if not converged:
        raise NewtonError(
            f"Newton stagnated at t_log={t_log:.6g} (residual {norm:.3e}, tol {tol:.3e})",
            residual=norm,
        )
    grid, params = ws.grid, ws.params
    eta_prof = Profile(grid, eta)
    quad = grid.spacing * float(np.dot(ws.apply(eta), eta))
    eta_norm = math.sqrt(params.sphere_measure * max(quad, 0.0))
    active = base >= 1e-12 * np.max(base)
    positive = bool(np.min(U[active]) > 0.0)
    en = perturbed_energy(Profile(grid, U), eps, weight.kappa, params, grid)
    return ReducedPoint(
        t_log=t_log,
        eta=eta_prof,
        gamma=gamma,
        energy=en,
        residual=norm,
        eta_norm=eta_norm,
        converged=True,
        positive=positive,
        newton_steps=steps,
    )


def _discrete_critical_points(points: list[ReducedPoint]) -> list[tuple[float, float, str]]:
    ok = [p for p in points if p.converged]
    found = []
    for left, mid, right in zip(ok, ok[1:], ok[2:]):
        dl = (mid.energy - left.energy) / (mid.t_log - left.t_log)
        dr = (right.energy - mid.energy) / (right.t_log - mid.t_log)
        if dl == 0.0 and dr == 0.0:
            continue
        if dl <= 0.0 <= dr:
            found.append((mid.t_log, mid.energy, "min"))
        elif dl >= 0.0 >= dr:
            found.append((mid.t_log, mid.energy, "max"))
    return found


def reduced_curve(ground: GroundState, eps: float, weight: PerturbationWeight,
                  t_log_grid: np.ndarray, tol: float = 1e-10) -> ReducedCurve:
    """Sweep the constrained solve along a dilation grid, warm-starting Newton.

    Points where Newton fails are recorded as non-converged and the sweep
    continues from a cold start.  Discrete critical points are sign changes of
    the centered difference of the energy.
    """
    ws = _NewtonWorkspace(ground)
    points: list[ReducedPoint] = []
    eta_prev: np.ndarray | None = None
    for t_log in np.asarray(t_log_grid, dtype=float):
        try:
            pt = solve_reduced_point(ground, eps, weight, float(t_log), tol,
                                     _ws=ws, _eta0=eta_prev)
            eta_prev = pt.eta.values
        except NewtonError as err:
            pt = ReducedPoint(
                t_log=float(t_log), eta=Profile(ws.grid, np.zeros(ws.grid.N)),
                gamma=math.nan, energy=math.nan, residual=err.residual,
                eta_norm=math.nan, converged=False, positive=False, newton_steps=0,
            )
            eta_prev = None
        points.append(pt)

    energies = [p.energy for p in points if p.converged]
    degenerate = False
    if energies:
        tv = float(np.sum(np.abs(np.diff(energies))))
        degenerate = tv < _DEGENERATE_TV_FACTOR * tol
    critical = [] if degenerate else _discrete_critical_points(points)
    return ReducedCurve(eps=eps, points=points, critical_points=critical,
                        degenerate_family=degenerate)


def _refine_critical(ws: _NewtonWorkspace, ground: GroundState, eps: float,
                     weight: PerturbationWeight, lo: float, hi: float, kind: str,
                     tol: float, gamma_target: float) -> ReducedPoint:
    """Golden-section refinement of the reduced energy over [lo, hi].

    The multiplier gamma is proportional to the energy slope, so the loop also
    exits early once |gamma| clears the verification target.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    sign = 1.0 if kind == "max" else -1.0

    def solve_at(t):
        return solve_reduced_point(ground, eps, weight, t, tol, _ws=ws)

    probe = solve_at(0.5 * (lo + hi))
    if abs(probe.gamma) <= gamma_target:
        return probe
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    pc, pd = solve_at(c), solve_at(d)
    best = pc if sign * pc.energy >= sign * pd.energy else pd
    for _ in range(120):
        if abs(best.gamma) <= gamma_target:
            return best
        if hi - lo < 1e-13 * max(1.0, abs(lo)):
            break
        if sign * pc.energy >= sign * pd.energy:
            hi, d, pd = d, c, pc
            c = hi - invphi * (hi - lo)
            pc = solve_at(c)
        else:
            lo, c, pc = c, d, pd
            d = lo + invphi * (hi - lo)
            pd = solve_at(d)
        best = pc if sign * pc.energy >= sign * pd.energy else pd
    return best


def _full_residual(ws: _NewtonWorkspace, eps: float, kappa: np.ndarray,
                   U: np.ndarray) -> float:
    Uplus = np.maximum(U, 0.0)
    rhs = (1.0 + eps * kappa) * Uplus ** (ws.params.q - 1.0)
    return float(np.max(np.abs(ws.apply(U) - rhs)) / np.max(np.abs(rhs)))


def find_solutions(curve: ReducedCurve, ground: GroundState, weight: PerturbationWeight,
                   tol: float = 1e-10) -> tuple[list[SolutionRecord], list[SolutionRecord]]:
    """Refine the curve's critical points and verify full, unconstrained criticality.

    A candidate is accepted when the full-equation relative residual and the
    multiplier |gamma| both fall below 10*tol (gamma vanishing is exactly the
    natural-constraint mechanism) and the profile is positive.  Returns
    (verified, spurious).  A degenerate (flat) curve returns the base family
    representative flagged degenerate_family.
    """
    ws = _NewtonWorkspace(ground)
    eps = curve.eps
    verified: list[SolutionRecord] = []
    spurious: list[SolutionRecord] = []

    if curve.degenerate_family:
        converged = [p for p in curve.points if p.converged]
        anchor = min(converged, key=lambda p: abs(p.t_log), default=None)
        t0 = anchor.t_log if anchor is not None else 0.0
        pt = solve_reduced_point(ground, eps, weight, t0, tol, _ws=ws)
        U = ground.v.translated(t0).values + pt.eta.values
        rec = SolutionRecord(
            eps=eps, t_log_star=t0, profile=Profile(ws.grid, U),
            residual=_full_residual(ws, eps, weight.kappa.values, U),
            gamma=pt.gamma, energy=pt.energy, positive=pt.positive,
            degenerate_family=True,
        )
        return [rec], []

    ok = [p for p in curve.points if p.converged]
    by_t = sorted(ok, key=lambda p: p.t_log)
    for t_star, _, kind in curve.critical_points:
        idx = next(i for i, p in enumerate(by_t) if p.t_log == t_star)
        lo = by_t[max(idx - 1, 0)].t_log
        hi = by_t[min(idx + 1, len(by_t) - 1)].t_log
        point = _refine_critical(ws, ground, eps, weight, lo, hi, kind, tol, 10.0 * tol)
        U = ground.v.translated(point.t_log).values + point.eta.values
        rec = SolutionRecord(
            eps=eps, t_log_star=point.t_log, profile=Profile(ws.grid, U),
            residual=_full_residual(ws, eps, weight.kappa.values, U),
            gamma=point.gamma, energy=point.energy, positive=point.positive,
        )
        if rec.residual <= 10.0 * tol and abs(rec.gamma) <= 10.0 * tol and rec.positive:
            verified.append(rec)
        else:
            spurious.append(rec)
    return verified, spurious
