"""Periodic grids, unitary Fourier transforms, norms and the vector field L.

The continuous transform convention is

    f_hat(xi) = (2 pi)^(-1/2) * integral exp(-i x xi) f(x) dx

approximated by the rectangle rule on the box [-L, L).  Spectral arrays are
stored in FFT order (the order returned by ``numpy.fft.fftfreq``).
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-10
BOUNDARY_FRACTION = 0.9


class BoundaryMassWarning(UserWarning):
    """Mass near the edge of the periodic box exceeds the tolerance."""


@dataclass(frozen=True, eq=False)
class Grid:
    half_length: float
    n_points: int
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    xi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 2, got {n}")
        if not self.half_length > 0:
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        dx = 2.0 * self.half_length / n
        x = -self.half_length + np.arange(n) * dx
        xi = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
        x.flags.writeable = False
        xi.flags.writeable = False
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / (self.n_points * self.dx)

    @property
    def xi_max(self) -> float:
        return np.pi / self.dx

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.half_length == other.half_length and self.n_points == other.n_points

    def __hash__(self):
        return hash((self.half_length, self.n_points))


def make_grid(half_length: float, n_points: int) -> Grid:
    """Build a grid on [-half_length, half_length) with ``n_points >= 16`` samples."""
    if int(n_points) != n_points or n_points < 16 or int(n_points) & (int(n_points) - 1):
        raise ValueError(f"n_points must be a power of two >= 16, got {n_points}")
    return Grid(float(half_length), int(n_points))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Samples of a complex function on ``grid`` at a given time."""

    grid: Grid
    time: float
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"field has shape {vals.shape}, expected ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError(f"non-finite values in field at t={self.time}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "time", float(self.time))

    def with_values(self, values, time: float | None = None) -> "ComplexField":
        return ComplexField(self.grid, self.time if time is None else time, values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Samples of f_hat at ``grid.xi`` (FFT order)."""

    grid: Grid
    time: float
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"spectrum has shape {vals.shape}, expected ({self.grid.n_points},)"
            )
        object.__setattr__(self, "values", vals)


def field_from_function(grid: Grid, func, time: float = 0.0) -> ComplexField:
    return ComplexField(grid, time, func(grid.x))


def _origin_phase(grid: Grid) -> np.ndarray:
    # sample k sits at x_k = -L + k dx, so the DFT picks up exp(i L xi)
    return np.exp(1j * grid.half_length * grid.xi)


def fourier_forward(f: ComplexField) -> SpectralField:
    g = f.grid
    spec = g.dx / np.sqrt(2.0 * np.pi) * _origin_phase(g) * np.fft.fft(f.values)
    return SpectralField(g, f.time, spec)


def fourier_inverse(F: SpectralField) -> ComplexField:
    g = F.grid
    vals = np.fft.ifft(F.values * np.conj(_origin_phase(g)))
    vals *= g.n_points * g.dxi / np.sqrt(2.0 * np.pi)
    return ComplexField(g, F.time, vals)


def norm_l2(f) -> float:
    """L2 norm; spectral fields are weighted by d(xi), physical ones by dx."""
    if isinstance(f, SpectralField):
        return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.dxi))
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.dx))


def norm_linf(f) -> float:
    return float(np.max(np.abs(f.values))) if f.values.size else 0.0


def norm_h01(f: ComplexField) -> float:
    """sqrt(||f||^2 + ||x f||^2)."""
    x = f.grid.x
    a = np.sum(np.abs(f.values) ** 2 * (1.0 + x * x)) * f.grid.dx
    return float(np.sqrt(a))


def mass(f: ComplexField) -> float:
    return float(np.sum(np.abs(f.values) ** 2) * f.grid.dx)


def boundary_mass(f: ComplexField, fraction: float = BOUNDARY_FRACTION) -> float:
    """Fraction of the total mass sitting in |x| > fraction * L."""
    dens = np.abs(f.values) ** 2
    total = dens.sum()
    if total == 0.0:
        return 0.0
    edge = np.abs(f.grid.x) > fraction * f.grid.half_length
    return float(dens[edge].sum() / total)


def check_boundary(f: ComplexField, tolerance: float = BOUNDARY_TOLERANCE) -> float:
    bm = boundary_mass(f)
    if bm > tolerance:
        warnings.warn(
            f"boundary mass {bm:.3e} exceeds {tolerance:.1e} at t={f.time:g}; "
            "domain may be too small",
            BoundaryMassWarning,
            stacklevel=2,
        )
    return bm


def derivative(f: ComplexField, order: int = 1) -> ComplexField:
    g = f.grid
    spec = np.fft.fft(f.values) * (1j * g.xi) ** order
    return f.with_values(np.fft.ifft(spec))


def apply_L(u: ComplexField, t: float | None = None,
            tolerance: float = BOUNDARY_TOLERANCE) -> ComplexField:
    """Lu = x u + i t u_x, with the derivative taken spectrally."""
    t = u.time if t is None else float(t)
    check_boundary(u, tolerance)
    out = u.grid.x * u.values
    if t != 0.0:
        out = out + 1j * t * derivative(u).values
    return u.with_values(out)


def modulate(u: ComplexField, c: float) -> ComplexField:
    """Multiply by exp(i c x)."""
    return u.with_values(np.exp(1j * c * u.grid.x) * u.values)


def sobolev_norm(F, s: float, dv: float | None = None) -> float:
    """H^s norm with weight (1 + xi^2)^(s/2), for 0 <= s <= 2.

    ``F`` is a SpectralField, a ComplexField, or a 1-D sample array on a
    uniform grid of spacing ``dv`` (treated as periodic).
    """
    if not 0.0 <= s <= 2.0:
        raise ValueError(f"Sobolev index must lie in [0, 2], got {s}")
    if isinstance(F, ComplexField):
        F = fourier_forward(F)
    if isinstance(F, SpectralField):
        xi, spec, dxi = F.grid.xi, F.values, F.grid.dxi
    else:
        if dv is None:
            raise ValueError("sample spacing dv is required for raw samples")
        vals = np.asarray(F, dtype=np.complex128)
        n = vals.size
        xi = 2.0 * np.pi * np.fft.fftfreq(n, d=dv)
        spec = dv / np.sqrt(2.0 * np.pi) * np.fft.fft(vals)
        dxi = 2.0 * np.pi / (n * dv)
    w = (1.0 + xi * xi) ** s
    return float(np.sqrt(np.sum(w * np.abs(spec) ** 2) * dxi))
