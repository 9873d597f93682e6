"""Discretized log-radial workspace.

The radial substitution v(zeta) = r^((n-2s)/2) * u(r) with r = e^(-zeta) turns
the weighted problem on (0, inf) into a translation-structured problem on the
line: dilations become translations, the inversion r -> 1/r becomes the
reflection zeta -> -zeta, and (-Delta)^s + lambda becomes the Fourier
multiplier Lambda_ell(tau) + lambda per spherical-harmonic sector.

Profiles decay like e^(-(n-2s)|zeta|/2), so a periodic pseudospectral grid on
[-L, L) with e^(-(n-2s)L/2) below solver tolerance carries the whole
computation.  All transforms are FFT-based; quadrature is the rectangle rule,
which is spectrally accurate for smooth periodicized decaying integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import cached_multiplier, hardy_constant

__all__ = [
    "ProblemParams",
    "EFGrid",
    "Profile",
    "make_grid",
    "default_half_length",
    "apply_multiplier",
    "invert_multiplier",
    "kelvin_reflect",
    "weighted_integral",
    "profile_from_radial",
    "radial_from_profile",
    "grid_radii",
]


class SingularOperatorError(ValueError):
    """Raised when a sector multiplier to be inverted is not strictly positive."""


@dataclass(frozen=True)
class ProblemParams:
    """Problem data (n, s, q, lambda) with the derived weight exponent b.

    Constraints enforced at construction:
      * 2 < q < 2n/(n-2s)   (q = 2n/(n-2s) allowed only with allow_critical,
        used by the closed-form validation mode),
      * b = n/q - (n-2s)/2 exactly, hence b*q < 2s,
      * lam > -hardy_constant(n, s) so the shifted symbol stays positive.
    """

    n: int
    s: float
    q: float
    lam: float = 0.0
    allow_critical: bool = False
    b: float = field(init=False)
    sphere_measure: float = field(init=False)

    def __post_init__(self):
        if self.n < 2 or int(self.n) != self.n:
            raise ValueError(f"dimension n must be an integer >= 2, got {self.n}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"order s must lie in (0, 1), got {self.s}")
        crit = self.critical_exponent
        if self.allow_critical:
            if not 2.0 < self.q <= crit:
                raise ValueError(
                    f"q must satisfy 2 < q <= 2n/(n-2s) = {crit:.12g} in validation mode, got q={self.q}"
                )
        elif not 2.0 < self.q < crit:
            raise ValueError(
                f"q must satisfy 2 < q < 2n/(n-2s) = {crit:.12g}, got q={self.q}"
            )
        hs = hardy_constant(self.n, self.s)
        if not self.lam > -hs:
            raise ValueError(
                f"lambda must exceed -hardy_constant(n,s) = {-hs:.12g}, got {self.lam}"
            )
        object.__setattr__(self, "b", self.n / self.q - (self.n - 2.0 * self.s) / 2.0)
        object.__setattr__(
            self, "sphere_measure", 2.0 * math.pi ** (self.n / 2.0) / math.gamma(self.n / 2.0)
        )

    @property
    def critical_exponent(self) -> float:
        return 2.0 * self.n / (self.n - 2.0 * self.s)

    @property
    def decay_rate(self) -> float:
        """Tail rate (n-2s)/2 of log-radial profiles."""
        return (self.n - 2.0 * self.s) / 2.0

    def multiplier(self, grid: "EFGrid", ell: int, shift: float = 0.0) -> np.ndarray:
        """Sector multiplier Lambda_ell(tau_m) + shift on the grid frequencies."""
        return cached_multiplier(grid.L, grid.N, ell, self.n, self.s) + shift


@dataclass(frozen=True)
class EFGrid:
    """Uniform periodic grid on [-L, L) with 2L/N spacing, N a power of two."""

    L: float
    N: int

    def __post_init__(self):
        if self.N < 64 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 64, got {self.N}")
        if not self.L >= 5.0:
            raise ValueError(f"half-length L must be >= 5, got {self.L}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def nodes(self) -> np.ndarray:
        return -self.L + self.spacing * np.arange(self.N)

    @property
    def freqs(self) -> np.ndarray:
        """Nonnegative frequencies pi*m/L, m = 0..N/2 (rfft layout)."""
        return np.pi * np.arange(self.N // 2 + 1) / self.L

    @property
    def full_freqs(self) -> np.ndarray:
        """All frequencies pi*m/L, m = -N/2..N/2-1, in fft order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.spacing)


def make_grid(L: float, N: int) -> EFGrid:
    return EFGrid(L=float(L), N=int(N))


def default_half_length(n: int, s: float) -> float:
    """Truncation rule max(30, 60/(n-2s)): tails fall below 1e-12 at the wrap."""
    return max(30.0, 60.0 / (n - 2.0 * s))


@dataclass
class Profile:
    """Real samples v(zeta_j) on an EFGrid."""

    grid: EFGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.N,):
            raise ValueError(
                f"profile needs {self.grid.N} samples, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    def copy(self) -> "Profile":
        return Profile(self.grid, self.values.copy())

    def reflected(self) -> "Profile":
        return kelvin_reflect(self)

    def symmetrized_even(self) -> "Profile":
        return Profile(self.grid, 0.5 * (self.values + _reverse(self.values)))

    def is_even(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values - _reverse(self.values))) <= tol)

    def derivative(self) -> "Profile":
        fh = np.fft.rfft(self.values) * (1j * self.grid.freqs)
        fh[-1] = 0.0  # odd multiplier has no consistent real Nyquist mode
        return Profile(self.grid, np.fft.irfft(fh, n=self.grid.N))

    def translated(self, delta: float) -> "Profile":
        """Spectral translation f(. + delta); exact for delta a multiple of the spacing."""
        phase = np.exp(1j * self.grid.freqs * delta)
        phase[-1] = math.cos(self.grid.freqs[-1] * delta)
        return Profile(self.grid, np.fft.irfft(phase * np.fft.rfft(self.values), n=self.grid.N))


def _reverse(values: np.ndarray) -> np.ndarray:
    # index map j -> (N - j) mod N; the wrap node j = 0 is its own mirror
    return np.concatenate((values[:1], values[1:][::-1]))


def _require_same_grid(f: Profile, grid: EFGrid):
    if f.grid != grid:
        raise ValueError(f"profile lives on {f.grid}, expected {grid}")


def apply_multiplier(grid: EFGrid, ell: int, params: ProblemParams, f: Profile,
                     shift: float = 0.0) -> Profile:
    """Apply the sector operator: spectral coefficients scaled by Lambda_ell(tau) + shift."""
    _require_same_grid(f, grid)
    mult = params.multiplier(grid, ell, shift)
    return Profile(grid, np.fft.irfft(mult * np.fft.rfft(f.values), n=grid.N))


def invert_multiplier(grid: EFGrid, ell: int, params: ProblemParams, rhs: Profile,
                      shift: float = 0.0) -> Profile:
    """Solve the sector problem (Lambda_ell(D) + shift) u = rhs by spectral division."""
    _require_same_grid(rhs, grid)
    mult = params.multiplier(grid, ell, shift)
    if np.min(mult) <= 0.0:
        raise SingularOperatorError(
            f"sector multiplier not positive (min {np.min(mult):.6g}); "
            f"shift must exceed {-np.min(mult - shift):.6g}"
        )
    return Profile(grid, np.fft.irfft(np.fft.rfft(rhs.values) / mult, n=grid.N))


def kelvin_reflect(f: Profile) -> Profile:
    """Log-radial form of the s-Kelvin inversion: zeta -> -zeta (an involution)."""
    return Profile(f.grid, _reverse(f.values))


def integral(f: Profile, p: float = 1.0) -> float:
    """Plain line integral (2L/N) * sum |f_j|^p, no sphere factor."""
    return f.grid.spacing * float(np.sum(np.abs(f.values) ** p))


def inner(f: Profile, g: Profile) -> float:
    """L2 pairing (2L/N) * sum f_j g_j."""
    _require_same_grid(g, f.grid)
    return f.grid.spacing * float(np.dot(f.values, g.values))


def weighted_integral(f: Profile, p: float, params: ProblemParams) -> float:
    """sphere_measure * (2L/N) * sum |f_j|^p; the x-space weighted integral of the profile."""
    return params.sphere_measure * integral(f, p)


def grid_radii(grid: EFGrid) -> np.ndarray:
    """Log-spaced radii r_j = e^(-zeta_j) carried by the grid."""
    return np.exp(-grid.nodes)


def profile_from_radial(params: ProblemParams, grid: EFGrid,
                        radial_samples: np.ndarray) -> Profile:
    """Log-radial profile of radial samples z(r_j) given on r_j = e^(-zeta_j)."""
    radial_samples = np.asarray(radial_samples, dtype=float)
    if radial_samples.shape != (grid.N,):
        raise ValueError(f"need {grid.N} radial samples, got {radial_samples.shape}")
    scale = np.exp((2.0 * params.s - params.n) / 2.0 * grid.nodes)
    return Profile(grid, scale * radial_samples)


def radial_from_profile(params: ProblemParams, f: Profile) -> np.ndarray:
    """Radial samples z(r_j) = r_j^(-(n-2s)/2) v(-ln r_j) on r_j = e^(-zeta_j)."""
    scale = np.exp((params.n - 2.0 * params.s) / 2.0 * f.grid.nodes)
    return scale * f.values
