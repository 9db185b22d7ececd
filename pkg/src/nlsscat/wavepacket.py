"""Gaussian wave packets and the packet observable gamma(t, v) = <u, Psi_v>.

Psi_v(t, x) = chi((x - v t)/sqrt(t)) exp(i x^2 / (2t)) with the unit-mass
Gaussian chi.  gamma is computed three ways: direct quadrature in x, an FFT
convolution of w = exp(-i x^2/2t) u, and a quadrature on the Fourier side
against chi_1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import ComplexField, Grid, apply_L, fourier_forward

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
# Gaussian tails beyond these many standard widths are below 1e-18
_REACH_X = 9.0
_REACH_XI = 13.0
DEFAULT_V_WINDOW = (-1.0, 1.0, 513)
WINDOW_FRACTION = 0.8


def chi(y):
    return INV_SQRT_2PI * np.exp(-0.5 * np.asarray(y) ** 2)


def chi_prime(y):
    y = np.asarray(y)
    return -y * chi(y)


def chi1(eta):
    """exp(i eta^2/2) times the Fourier transform of exp(i x^2/2) chi(x)."""
    eta = np.asarray(eta)
    return INV_SQRT_2PI * (1 - 1j) ** -0.5 * np.exp(-0.25 * (1 - 1j) * eta ** 2)


# chi_1 integrates to exp(i pi/4) * (integral of chi), not to 1
CHI1_INTEGRAL = np.exp(0.25j * np.pi)


@dataclass(frozen=True)
class PacketKernel:
    name: str = "gaussian"

    chi = staticmethod(chi)
    chi_prime = staticmethod(chi_prime)
    chi1 = staticmethod(chi1)
    chi1_integral = CHI1_INTEGRAL


GAUSSIAN = PacketKernel()


@dataclass(frozen=True, eq=False)
class GammaField:
    time: float
    v: np.ndarray
    values: np.ndarray
    kernel: PacketKernel = GAUSSIAN

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0]) if self.v.size > 1 else 1.0

    def norm_l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.dv))

    def norm_linf(self) -> float:
        return float(np.max(np.abs(self.values)))


def velocity_window(grid: Grid, t: float, v_min=-1.0, v_max=1.0, n=513) -> np.ndarray:
    v = np.linspace(v_min, v_max, n)
    check_window(grid, t, v)
    return v


def check_window(grid: Grid, t: float, v) -> None:
    vmax = float(np.max(np.abs(v))) if np.size(v) else 0.0
    if vmax * t > WINDOW_FRACTION * grid.half_length * (1 + 1e-12):
        raise ValueError(
            f"velocity window |v| <= {vmax:g} at t={t:g} leaves the box "
            f"(|v| t must stay below {WINDOW_FRACTION} * {grid.half_length:g})"
        )


def _phase(x, t):
    return np.exp(0.5j * x * x / t)


def packet(v: float, t: float, grid: Grid) -> ComplexField:
    if t < 1.0:
        raise ValueError("packets are defined for t >= 1")
    check_window(grid, t, [v])
    x = grid.x
    return ComplexField(grid, t, chi((x - v * t) / np.sqrt(t)) * _phase(x, t))


def _moments(a, grid: Grid, t: float, v):
    v = np.ascontiguousarray(np.atleast_1d(np.asarray(v, dtype=float)))
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return kernels.gaussian_moments(a, float(grid.x[0]), grid.dx, float(t), v, _REACH_X)


def _require_time(u: ComplexField):
    if u.time < 1.0:
        raise ValueError(f"packet analysis needs t >= 1, field is at t={u.time:g}")


def gamma_direct(u: ComplexField, v):
    """gamma(t, v) = sum_x u conj(Psi_v) dx; scalar in, scalar out."""
    _require_time(u)
    t = u.time
    w = u.values * np.conj(_phase(u.grid.x, t))
    m0, _ = _moments(w, u.grid, t, v)
    out = u.grid.dx * m0
    return complex(out[0]) if np.ndim(v) == 0 else out


def sample(u: ComplexField, points) -> np.ndarray:
    """Trigonometric interpolation of the periodic samples at arbitrary x."""
    g = u.grid
    coef = np.fft.fftshift(np.fft.fft(u.values)) / g.n_points
    p = np.ascontiguousarray(np.asarray(points, dtype=float) - g.x[0])
    return kernels.fourier_series(coef, -np.pi / g.dx, g.dxi, p, 1.0)


def spectrum_at(u: ComplexField, xi) -> np.ndarray:
    """u_hat(xi) by direct rectangle-rule quadrature at arbitrary xi."""
    g = u.grid
    coef = np.ascontiguousarray(u.values * (g.dx / np.sqrt(2 * np.pi)))
    xi = np.ascontiguousarray(np.asarray(xi, dtype=float))
    return kernels.fourier_series(coef, float(g.x[0]), g.dx, xi, -1.0)


def gamma_conv(u: ComplexField, v=None) -> GammaField:
    """gamma via t^(-1/2) gamma = w(t, . t) * t^(1/2) chi(t^(1/2) .) in v.

    The convolution is carried out on the x grid by FFT (kernel transform
    exp(-t k^2/2)) and read off at x = v t from the band-limited result.
    """
    _require_time(u)
    g, t = u.grid, u.time
    v = velocity_window(g, t, *DEFAULT_V_WINDOW) if v is None else np.asarray(v, float)
    check_window(g, t, v)
    w = u.values * np.conj(_phase(g.x, t))
    spec = np.fft.fftshift(np.fft.fft(w) * np.exp(-0.5 * t * g.xi ** 2)) / g.n_points
    k = -np.pi / g.dx + g.dxi * np.arange(g.n_points)
    keep = np.nonzero(np.abs(k) <= np.sqrt(2 * 42.0 / t))[0]
    lo, hi = keep[0], keep[-1] + 1
    p = np.ascontiguousarray(v * t - g.x[0])
    smooth = kernels.fourier_series(np.ascontiguousarray(spec[lo:hi]), float(k[lo]), g.dxi, p, 1.0)
    return GammaField(t, v, np.sqrt(t) * smooth)


def gamma_fourier(u: ComplexField, v=None) -> GammaField:
    """gamma(t, v) = sum_xi e^{i t xi^2/2} u_hat(xi) t^(1/2) conj(chi_1(t^(1/2)(xi - v))) dxi."""
    _require_time(u)
    g, t = u.grid, u.time
    v = velocity_window(g, t, *DEFAULT_V_WINDOW) if v is None else np.asarray(v, float)
    check_window(g, t, v)
    U = fourier_forward(u)
    xi = np.fft.fftshift(g.xi)
    prof = np.fft.fftshift(U.values) * np.exp(0.5j * t * xi ** 2)
    st = np.sqrt(t)
    half = int(np.ceil(_REACH_XI / st / g.dxi)) + 1
    offs = np.arange(-half, half + 1)
    out = np.empty(v.size, dtype=np.complex128)
    step = max(1, (1 << 21) // offs.size)
    for j0 in range(0, v.size, step):
        vs = v[j0:j0 + step]
        centre = np.rint((vs - xi[0]) / g.dxi).astype(np.int64)
        idx = centre[:, None] + offs[None, :]
        ok = (idx >= 0) & (idx < g.n_points)
        idx = np.clip(idx, 0, g.n_points - 1)
        ker = np.where(ok, np.conj(chi1(st * (xi[idx] - vs[:, None]))), 0.0)
        out[j0:j0 + vs.size] = st * g.dxi * np.sum(prof[idx] * ker, axis=1)
    return GammaField(t, v, out)


def diff_physical(u: ComplexField, gam: GammaField) -> dict:
    """Norms over the v window of u(t, v t) - t^(-1/2) e^{i phi(t, v t)} gamma(t, v)."""
    t = _matching(u, gam)
    x = gam.v * t
    d = sample(u, x) - t ** -0.5 * _phase(x, t) * gam.values
    return {"linf": float(np.max(np.abs(d))),
            "l2": float(np.sqrt(np.sum(np.abs(d) ** 2) * gam.dv))}


def diff_fourier(u: ComplexField, gam: GammaField) -> dict:
    """Norms of u_hat(t, xi) - e^{i pi/4} e^{-i t xi^2/2} gamma(t, xi) on the window."""
    t = _matching(u, gam)
    xi = gam.v
    d = spectrum_at(u, xi) - CHI1_INTEGRAL * np.exp(-0.5j * t * xi ** 2) * gam.values
    return {"linf": float(np.max(np.abs(d))),
            "l2": float(np.sqrt(np.sum(np.abs(d) ** 2) * gam.dv))}


def _matching(u, gam):
    if abs(u.time - gam.time) > 1e-12 * max(1.0, u.time):
        raise ValueError(f"field at t={u.time} but gamma at t={gam.time}")
    return u.time


@dataclass(frozen=True, eq=False)
class ResidualField:
    time: float
    v: np.ndarray
    values: np.ndarray

    @property
    def dv(self):
        return float(self.v[1] - self.v[0])

    def norm_linf(self):
        return float(np.max(np.abs(self.values)))

    def norm_l2(self):
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.dv))


def residual_ode(g_prev: GammaField, g_next: GammaField, lam: float,
                 gap_fraction: float = 0.1) -> ResidualField:
    """R = -d(gamma)/dt - i lam t^(-1) |gamma|^2 gamma at the midpoint time.

    The derivative is the centred difference between the two fields and
    gamma at the midpoint is their average.
    """
    if g_prev.v.shape != g_next.v.shape or not np.array_equal(g_prev.v, g_next.v):
        raise ValueError("gamma fields live on different velocity grids")
    t0, t1 = g_prev.time, g_next.time
    tc = 0.5 * (t0 + t1)
    if not 0 < t1 - t0 <= gap_fraction * tc:
        raise ValueError(f"time gap {t1 - t0:g} must be positive and at most {gap_fraction} t")
    dot = (g_next.values - g_prev.values) / (t1 - t0)
    gam = 0.5 * (g_next.values + g_prev.values)
    R = -dot - 1j * lam / tc * np.abs(gam) ** 2 * gam
    return ResidualField(tc, g_prev.v, R)


def residual_decomposed(u: ComplexField, gam: GammaField, lam: float) -> dict:
    """The three pieces of R evaluated at a single time.

    R1 = (2t^2)^(-1) sum (t^(1/2) chi'(y) - i (x - v t) chi(y)) e^{-i phi} Lu dx
    R2 = i lam sum u conj(Psi_v) (|u|^2 - |u(t, v t)|^2) dx
    R3 = i lam gamma (|u(t, v t)|^2 - t^(-1) |gamma|^2)
    """
    t = _matching(u, gam)
    g = u.grid
    conj_phase = np.conj(_phase(g.x, t))
    Lu = apply_L(u, t)
    _, m1 = _moments(Lu.values * conj_phase, g, t, gam.v)
    # for the Gaussian, t^(1/2) chi'(y) - i (x - v t) chi(y) = -(1 + i) t^(1/2) y chi(y)
    R1 = -(1 + 1j) * np.sqrt(t) / (2 * t * t) * g.dx * m1
    w = u.values * conj_phase
    a0, _ = _moments(w, g, t, gam.v)
    a2, _ = _moments(w * np.abs(u.values) ** 2, g, t, gam.v)
    ray = np.abs(sample(u, gam.v * t)) ** 2
    R2 = 1j * lam * g.dx * (a2 - ray * a0)
    R3 = 1j * lam * gam.values * (ray - np.abs(gam.values) ** 2 / t)
    mk = lambda vals: ResidualField(t, gam.v, vals)
    return {"R1": mk(R1), "R2": mk(R2), "R3": mk(R3), "R": mk(R1 + R2 + R3)}
