"""Solving from infinity: an exact solution with a prescribed profile W.

The profile is frequency-truncated at t^(1/2) with a smooth cutoff, turned
into the approximate solution

    u_app = t^(-1/2) e^{i x^2/2t} Wt(x/t) exp(-i lam |Wt(x/t)|^2 log t),

and the correction v = u - u_app is integrated backward from v(T_max) = 0.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .grid import ComplexField, Grid, apply_L, make_grid, norm_l2, sobolev_norm
from .profile import ScatteringProfile, extract_profile
from .rates import dyadic_sup_norm
from .solver import NumericalFailure, SimConfig, _Stepper, evolve
from .wavepacket import WINDOW_FRACTION, gamma_conv

log = logging.getLogger(__name__)

GUARD_ABORT = 1e-3
SUPPORT_LEVEL = 1e-8
XNORM_BLOWUP = 1e3


class CompletenessWarning(UserWarning):
    pass


class ForcingMismatch(NumericalFailure):
    """Analytic and finite-difference forcings disagree."""


def _bump(y):
    y = np.asarray(y, dtype=float)
    pos = y > 0
    return np.where(pos, np.exp(-1.0 / np.where(pos, y, 1.0)), 0.0)


def _bump_prime(y):
    y = np.asarray(y, dtype=float)
    pos = y > 0
    ys = np.where(pos, y, 1.0)
    return np.where(pos, np.exp(-1.0 / ys) / (ys * ys), 0.0)


def cutoff(r):
    """Smooth symbol: 1 on [0, 1], 0 on [2, inf)."""
    r = np.abs(np.asarray(r, dtype=float))
    a, b = _bump(2.0 - r), _bump(r - 1.0)
    return a / (a + b)


def cutoff_prime(r):
    r = np.abs(np.asarray(r, dtype=float))
    a, b = _bump(2.0 - r), _bump(r - 1.0)
    da, db = -_bump_prime(2.0 - r), _bump_prime(r - 1.0)
    return (da * b - a * db) / (a + b) ** 2


def _step(y):
    """Smooth step 0 -> 1 on [0, 1] and its first two derivatives."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    A, B = _bump(y), _bump(1.0 - y)
    A1, B1 = _bump_prime(y), -_bump_prime(1.0 - y)

    def second(z):
        zs = np.where(z > 0, z, 1.0)
        return np.where(z > 0, np.exp(-1.0 / zs) * (1.0 / zs ** 4 - 2.0 / zs ** 3), 0.0)

    A2, B2 = second(y), second(1.0 - y)
    D, D1 = A + B, A1 + B1
    N, N1 = A1 * B - A * B1, A2 * B - A * B2
    return A / D, N / D ** 2, N1 / D ** 2 - 2 * N * D1 / D ** 3


def window_taper(W: ScatteringProfile, taper, p):
    """Edge taper of the periodic v window and its first two v-derivatives.

    Equal to 1 within a fraction taper[0] of the half window around its centre
    and to 0 beyond taper[1]; ``None`` is no taper.
    """
    p = np.asarray(p, dtype=float)
    if taper is None:
        return np.ones(p.shape), np.zeros(p.shape), np.zeros(p.shape)
    a, b = taper
    if not 0.0 < a < b <= 1.0:
        raise ValueError(f"taper fractions need 0 < a < b <= 1, got {taper}")
    v, dv = _uniform(W)
    hw = 0.5 * v.size * dv
    c = v[0] + hw
    r = np.abs(p - c) / hw
    s, s1, s2 = _step((b - r) / (b - a))
    g = np.sign(p - c) / (hw * (b - a))
    return s, -s1 * g, s2 * g * g


def _uniform(W: ScatteringProfile):
    v = np.asarray(W.v, dtype=float)
    if v.size < 16:
        raise ValueError("profile needs at least 16 samples")
    dv = (v[-1] - v[0]) / (v.size - 1)
    if not np.allclose(np.diff(v), dv, rtol=1e-9, atol=0.0):
        raise ValueError("profile samples must be uniformly spaced")
    return v, dv


class _ProfileSeries:
    """Trigonometric series of a profile on its periodic v window."""

    def __init__(self, W: ScatteringProfile, taper=None):
        v, dv = _uniform(W)
        self.W, self.taper = W, taper
        n = v.size
        self.v0, self.v1, self.dv = float(v[0]), float(v[-1]), dv
        self.k = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, d=dv))
        self.coef = np.fft.fftshift(np.fft.fft(W.values)) / n

    def evaluate(self, t: float, p, orders=(0,), shell: bool = False):
        """Derivatives of Wt(t, .) (and of the shell piece t dWt/dt) at points p.

        Points outside the profile window evaluate to zero.  The window taper,
        if any, multiplies the low-passed series.
        """
        p = np.asarray(p, dtype=float)
        if max(orders) > 2:
            raise ValueError("only derivatives up to order 2 are available")
        raw = range(max(orders) + 1) if self.taper is not None else orders
        inside = (p >= self.v0) & (p <= self.v1)
        st = math.sqrt(t)
        act = np.nonzero(np.abs(self.k) < 2.0 * st)[0]
        k = self.k[act]
        r = np.abs(k) / st
        mult = {"W": cutoff(r)}
        if shell:
            mult["S"] = -0.5 * r * cutoff_prime(r)
        pin = np.ascontiguousarray(p[inside] - self.v0)
        out = {}
        for name, m in mult.items():
            for d in raw if name == "W" else (0,):
                c = np.ascontiguousarray(self.coef[act] * m * (1j * k) ** d)
                vals = np.zeros(p.shape, dtype=np.complex128)
                if act.size:
                    vals[inside] = kernels.fourier_series(c, float(k[0]), self.k[1] - self.k[0], pin, 1.0)
                out[(name, d)] = vals
        if self.taper is None:
            return out
        T = window_taper(self.W, self.taper, p)
        binom = ((1,), (1, 1), (1, 2, 1))
        tapered = {("W", d): sum(binom[d][j] * T[j] * out[("W", d - j)] for j in range(d + 1))
                   for d in orders}
        if shell:
            tapered[("S", 0)] = T[0] * out[("S", 0)]
        return tapered


def default_profile(M: float = 0.1, delta: float = 0.25, width: float = 0.5,
                    half_window: float = 8.0, n: int = 1024, lam: int = 1) -> ScatteringProfile:
    """Gaussian profile of the given width scaled to ||W||_{H^(1+2 delta)} = M."""
    v = -half_window + (2 * half_window / n) * np.arange(n)
    g = np.exp(-0.5 * (v / width) ** 2).astype(np.complex128)
    g *= M / sobolev_norm(g, 1 + 2 * delta, dv=v[1] - v[0])
    return ScatteringProfile(v, g, float("inf"), float("nan"), lam, "input")


@dataclass(frozen=True, eq=False)
class CompletenessConfig:
    W_input: ScatteringProfile
    M: float = 0.1
    delta: float = 0.25
    T_max: float = 256.0
    T_match: float = 16.0
    lam: int = 1
    half_length: float = 1000.0
    n_points: int = 4096
    dt: float = 0.05
    per_window: int = 16
    forward_dt: float = 5e-3
    method: str = "v"
    taper: tuple | None = (0.45, 0.7)

    def __post_init__(self):
        if self.lam not in (1, -1):
            raise ValueError(f"lam must be +1 or -1, got {self.lam}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if 1 + 2 * self.delta > 2:
            raise ValueError("delta above 1/2 puts the size check outside H^2")
        if not self.T_match >= 16.0:
            raise ValueError(f"T_match must be at least 16, got {self.T_match:g}")
        if not self.T_match < self.T_max:
            raise ValueError("T_match must be smaller than T_max")
        if not self.dt > 0 or not self.forward_dt > 0:
            raise ValueError("time steps must be positive")
        if self.method not in ("v", "u"):
            raise ValueError(f"unknown backward method {self.method!r}")
        if self.per_window < 4:
            raise ValueError("X-norms need at least 4 checkpoints per window")
        v, dv = _uniform(self.W_input)
        if self.taper is not None:
            a, b = self.taper
            window_taper(self.W_input, self.taper, v[:1])
            hw = 0.5 * v.size * dv
            c = v[0] + hw
            off = np.abs(v - c) > a * hw
            top = np.max(np.abs(self.W_input.values))
            if top > 0 and np.max(np.abs(self.W_input.values[off])) > SUPPORT_LEVEL * top:
                raise ValueError(
                    f"profile is not negligible outside the flat part |v - {c:g}| <= {a * hw:g} "
                    "of the window taper; widen the profile window"
                )
            # the chirp of u_app has local frequency x/t; it must stay below Nyquist
            reach = max(abs(c - b * hw), abs(c + b * hw)) + 2.0 / math.sqrt(self.T_match)
            nyquist = math.pi / self.grid.dx
            if reach >= nyquist:
                raise ValueError(
                    f"u_app carries frequencies up to {reach:.3g} but the x grid resolves "
                    f"only {nyquist:.3g}; raise n_points or narrow the taper"
                )
        size = sobolev_norm(self.W_input.values, 1 + 2 * self.delta, dv=self.W_input.dv)
        if size > self.M * (1 + 1e-9):
            raise ValueError(
                f"||W||_H^{1 + 2 * self.delta:g} = {size:.4g} exceeds M = {self.M:g}"
            )
        if self.delta < 4 * self.M ** 2:
            warnings.warn(
                f"delta={self.delta:g} is not large against M^2={self.M ** 2:g}",
                CompletenessWarning,
                stacklevel=2,
            )

    @property
    def grid(self) -> Grid:
        return make_grid(self.half_length, self.n_points)

    def checkpoint_times(self) -> tuple:
        """per_window geometric steps in every octave from T_match to T_max."""
        n = math.floor(self.per_window * math.log2(self.T_max / self.T_match) + 1e-9)
        ts = {float(self.T_match * 2.0 ** (j / self.per_window)) for j in range(n + 1)}
        ts.add(float(self.T_max))
        return tuple(sorted(ts))


def regularize_W(W: ScatteringProfile, t: float, taper=None) -> ScatteringProfile:
    """Wt = W_{< t^(1/2)}: the smooth low-pass psi(|k| / t^(1/2)) of W.

    With ``taper`` the result is also multiplied by the window taper, which
    keeps the slowly decaying tails of the cutoff kernel off the window edge.
    """
    if t < 1.0:
        raise ValueError("regularization is defined for t >= 1")
    _uniform(W)
    k = 2 * np.pi * np.fft.fftfreq(W.values.size, d=W.dv)
    vals = np.fft.ifft(np.fft.fft(W.values) * cutoff(np.abs(k) / math.sqrt(t)))
    if taper is not None:
        vals = vals * window_taper(W, taper, W.v)[0]
    return ScatteringProfile(np.array(W.v), vals, t, W.epsilon, W.lam, "regularized")


def support_radius(W: ScatteringProfile, level: float = SUPPORT_LEVEL) -> float:
    a = np.abs(W.values)
    top = a.max() if a.size else 0.0
    if top == 0.0:
        return 0.0
    return float(np.max(np.abs(W.v[a > level * top])))


def _check_support(W: ScatteringProfile, t: float, grid: Grid):
    reach = support_radius(W) * t
    if reach > WINDOW_FRACTION * grid.half_length:
        raise ValueError(
            f"profile support reaches |x| = {reach:g} at t={t:g}, beyond "
            f"{WINDOW_FRACTION} * {grid.half_length:g}"
        )


def _phase(x, t):
    return np.exp(0.5j * x * x / t)


def build_u_app(W: ScatteringProfile, t: float, grid: Grid, lam: int | None = None,
                series: _ProfileSeries | None = None, taper=None) -> ComplexField:
    """u_app(t, x) = t^(-1/2) e^{i x^2/2t} Wt(x/t) exp(-i lam |Wt(x/t)|^2 log t)."""
    lam = W.lam if lam is None else lam
    _check_support(W, t, grid)
    series = _ProfileSeries(W, taper) if series is None else series
    a = series.evaluate(t, grid.x / t)[("W", 0)]
    vals = t ** -0.5 * _phase(grid.x, t) * a * np.exp(-1j * lam * np.abs(a) ** 2 * math.log(t))
    return ComplexField(grid, t, vals)


def forcing_envelope(series: _ProfileSeries, t: float, p, lam: int) -> np.ndarray:
    """F(t, p) with f(t, x) = t^(-1/2) e^{i x^2/2t} F(t, x/t).

    With G = Wt e^{iP}, P = -lam log t |Wt|^2, the cubic term cancels against
    the t-derivative of the log phase and what is left is

        F = e^{iP} [ i Wt_t + 2 lam log t Re(Wt_t conj Wt) Wt
                     + (Wt'' + 2i P' Wt' + i P'' Wt - P'^2 Wt) / (2t^2) ]

    where Wt_t = S / t and S is the dyadic-shell piece of the cutoff.
    """
    ev = series.evaluate(t, p, orders=(0, 1, 2), shell=True)
    a, a1, a2, s = ev[("W", 0)], ev[("W", 1)], ev[("W", 2)], ev[("S", 0)]
    lt = math.log(t)
    wt = s / t
    P = -lam * lt * np.abs(a) ** 2
    Pv = -2 * lam * lt * np.real(a1 * np.conj(a))
    Pvv = -2 * lam * lt * (np.real(a2 * np.conj(a)) + np.abs(a1) ** 2)
    first = 1j * wt + 2 * lam * lt * np.real(wt * np.conj(a)) * a
    second = (a2 + 2j * Pv * a1 + 1j * Pvv * a - Pv * Pv * a) / (2 * t * t)
    return np.exp(1j * P) * (first + second)


def forcing_f(W: ScatteringProfile, t: float, grid: Grid, lam: int | None = None,
              series: _ProfileSeries | None = None, taper=None) -> ComplexField:
    """f = (i d_t + d_xx/2) u_app - lam |u_app|^2 u_app from the analytic formula."""
    lam = W.lam if lam is None else lam
    _check_support(W, t, grid)
    series = _ProfileSeries(W, taper) if series is None else series
    F = forcing_envelope(series, t, grid.x / t, lam)
    return ComplexField(grid, t, t ** -0.5 * _phase(grid.x, t) * F)


_FD6 = (np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0, np.arange(-3, 4))


def forcing_envelope_fd(W: ScatteringProfile, t: float, lam: int | None = None,
                        h_rel: float = 1.0 / 32.0, taper=None) -> np.ndarray:
    """F on the profile grid from the defining equation.

    Uses i G_t + G_vv/(2t^2) - lam t^-1 |G|^2 G with G(t, v) = Wt e^{iP}; the
    t-derivative is a sixth-order centred difference with spacing h_rel * t
    and G_vv is spectral on the periodic v window.
    """
    lam = W.lam if lam is None else lam
    h = h_rel * t
    if t - 3 * h < 1.0:
        raise ValueError("finite-difference stencil reaches below t = 1")
    w, offs = _FD6

    def G(s):
        a = regularize_W(W, s, taper).values
        return a * np.exp(-1j * lam * math.log(s) * np.abs(a) ** 2)

    Gt = sum(c * G(t + j * h) for c, j in zip(w, offs) if c != 0.0) / h
    g0 = G(t)
    k = 2 * np.pi * np.fft.fftfreq(g0.size, d=W.dv)
    Gvv = np.fft.ifft(-(k * k) * np.fft.fft(g0))
    return 1j * Gt + Gvv / (2 * t * t) - lam * np.abs(g0) ** 2 * g0 / t


def forcing_guard(W: ScatteringProfile, t: float, lam: int | None = None, taper=None) -> float:
    """Relative L2 gap between the analytic and finite-difference forcings."""
    lam = W.lam if lam is None else lam
    an = forcing_envelope(_ProfileSeries(W, taper), t, W.v, lam)
    fd = forcing_envelope_fd(W, t, lam, taper=taper)
    den = np.sqrt(np.sum(np.abs(fd) ** 2))
    num = np.sqrt(np.sum(np.abs(an - fd) ** 2))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return float(num / den)


@dataclass
class BackwardRun:
    config: CompletenessConfig
    times: list = field(default_factory=list)
    v: list = field(default_factory=list)
    u_app_l2: list = field(default_factory=list)
    guard: float = 0.0
    method: str = "v"

    def at(self, t: float) -> ComplexField:
        for s, f in zip(self.times, self.v):
            if abs(s - t) <= 1e-9 * max(1.0, t):
                return f
        raise KeyError(f"no correction checkpoint at t={t}")

    def smallness(self) -> float:
        """||v(T_match)|| / ||u_app(T_match)||."""
        den = self.u_app_l2[0]
        return norm_l2(self.v[0]) / den if den > 0 else 0.0


class _Sources:
    """u_app and f on the x grid, cached per time."""

    def __init__(self, W, grid, lam, zero_forcing=False, taper=None):
        self.W, self.grid, self.lam = W, grid, lam
        self.series = _ProfileSeries(W, taper)
        self.zero_forcing = zero_forcing
        self._cache = {}

    def __call__(self, t):
        hit = self._cache.get(t)
        if hit is None:
            ua = build_u_app(self.W, t, self.grid, self.lam, self.series).values
            if self.zero_forcing:
                f = np.zeros_like(ua)
            else:
                f = forcing_f(self.W, t, self.grid, self.lam, self.series).values
            if len(self._cache) > 8:
                self._cache.clear()
            hit = self._cache[t] = (ua, f)
        return hit


def _difference_rhs(v, ua, f, lam):
    """-i (lam (|u|^2 u - |ua|^2 ua) - f) with u = ua + v."""
    u = ua + v
    return -1j * (lam * (np.abs(u) ** 2 * u - np.abs(ua) ** 2 * ua) - f)


def _source_step(v, t0, tau, src, lam):
    """Midpoint rule over [t0, t0 + tau] with sources taken at the centre."""
    ua, f = src(t0 + 0.5 * tau)
    vm = v + 0.5 * tau * _difference_rhs(v, ua, f, lam)
    return v + tau * _difference_rhs(vm, ua, f, lam)


def integrate_difference(v0: np.ndarray, t0: float, t1: float, dt: float,
                         src, stepper: _Stepper, lam: int) -> np.ndarray:
    """Strang steps of i v_t + v_xx/2 = N(v, u_app) - f from t0 to t1."""
    span = t1 - t0
    if span == 0.0:
        return np.array(v0)
    n = max(1, math.ceil(abs(span) / dt - 1e-9))
    h = span / n
    v = np.array(v0, dtype=np.complex128)
    for j in range(n):
        t = t0 + j * h
        v = _source_step(v, t, 0.5 * h, src, lam)
        v = stepper.linear(v, h)
        v = _source_step(v, t + 0.5 * h, 0.5 * h, src, lam)
    if not np.all(np.isfinite(v)):
        raise NumericalFailure(f"non-finite correction between t={t0:g} and t={t1:g}", v)
    return v


def _guard_times(cfg):
    return (cfg.T_match, math.sqrt(cfg.T_match * cfg.T_max), cfg.T_max)


def backward_solve(cfg: CompletenessConfig, zero_forcing: bool = False) -> BackwardRun:
    """Integrate v from v(T_max) = 0 down to T_match.

    ``method="v"`` steps the difference equation with its forcing;
    ``method="u"`` steps the full equation from u_app(T_max) and subtracts
    u_app afterwards (same fixed point, used as a cross-check).
    """
    W, grid, lam = cfg.W_input, cfg.grid, cfg.lam
    for t in (cfg.T_match, cfg.T_max):
        _check_support(W, t, grid)
    guard = 0.0
    if not zero_forcing and np.any(W.values != 0):
        guard = max(forcing_guard(W, t, lam, cfg.taper) for t in _guard_times(cfg))
        if guard > GUARD_ABORT:
            raise ForcingMismatch(f"analytic and finite-difference forcing differ by {guard:.2e}")
    times = cfg.checkpoint_times()
    src = _Sources(W, grid, lam, zero_forcing, cfg.taper)
    run = BackwardRun(cfg, guard=guard, method=cfg.method)
    vs = {}
    if cfg.method == "v" or zero_forcing:
        st = _Stepper(grid, SimConfig(lam=lam, dt=cfg.dt, t_end=cfg.T_max))
        v = np.zeros(grid.n_points, dtype=np.complex128)
        t = cfg.T_max
        vs[t] = v
        for target in reversed(times[:-1]):
            v = integrate_difference(v, t, target, cfg.dt, src, st, lam)
            t = target
            vs[t] = v
    else:
        ua_end = build_u_app(W, cfg.T_max, grid, lam, src.series)
        scfg = SimConfig(lam=lam, dt=cfg.forward_dt, t_start=cfg.T_match, t_end=cfg.T_max,
                         checkpoint_times=times)
        traj = evolve(ua_end, scfg, with_L=False, backward=True)
        for c in traj.checkpoints:
            vs[c.time] = c.values - src(c.time)[0] if c.time != cfg.T_max else np.zeros(grid.n_points, complex)
    for t in times:
        key = min(vs, key=lambda s: abs(s - t))
        run.times.append(t)
        run.v.append(ComplexField(grid, t, vs[key]))
        run.u_app_l2.append(norm_l2(ComplexField(grid, t, src(t)[0])))
    table = xnorm(run, "X")
    vals = np.array([val for _, val in table])
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("X-norm is not finite")
    pos = vals[vals > 0]
    if pos.size and pos.max() > XNORM_BLOWUP * max(pos.min(), 1e-300) and vals[-1] == pos.max():
        raise NumericalFailure("X-norm grows across windows; M is too large for delta")
    return run


def forward_difference(run: BackwardRun) -> np.ndarray:
    """Re-integrate the difference equation forward from v(T_match) to T_max."""
    cfg = run.config
    grid = cfg.grid
    src = _Sources(cfg.W_input, grid, cfg.lam, taper=cfg.taper)
    st = _Stepper(grid, SimConfig(lam=cfg.lam, dt=cfg.dt, t_end=cfg.T_max))
    v, t = np.array(run.v[0].values), run.times[0]
    for target in run.times[1:]:
        v = integrate_difference(v, t, target, cfg.dt, src, st, cfg.lam)
        t = target
    return v


def _weights(kind, M, delta):
    if kind == "X":
        return lambda T: T ** (0.5 + delta) / (1 + M * M * math.log(T)) ** 2
    if kind == "X_tilde":
        return lambda T: T ** delta / (1 + M * M * math.log(T)) ** 3
    raise ValueError(f"unknown norm kind {kind!r}")


def xnorm(run: BackwardRun, kind: str = "X", field_name: str | None = None):
    """Per-window values of the X (on v) or X-tilde (on Lv) norm.

    Window [T, 2T] contributes weight(T) * (max ||.||_L2 + (int sup|.|^4 dt)^(1/4)).
    """
    cfg = run.config
    w = _weights(kind, cfg.M, cfg.delta)
    field_name = field_name or ("v" if kind == "X" else "Lv")
    if field_name == "v":
        vals = [f.values for f in run.v]
    elif field_name == "Lv":
        vals = [apply_L(f, tolerance=np.inf).values for f in run.v]
    else:
        raise ValueError(f"unknown field {field_name!r}")
    dx = run.v[0].grid.dx
    return dyadic_sup_norm(run.times, vals, dx, w, "both", run.times[0], run.times[-1])


def xnorm_sup(table) -> float:
    return max(v for _, v in table)


def roundtrip(cfg: CompletenessConfig, run: BackwardRun | None = None) -> dict:
    """Forward-evolve u_app + v from T_match to T_max and re-extract the profile."""
    run = backward_solve(cfg) if run is None else run
    grid, W, lam = cfg.grid, cfg.W_input, cfg.lam
    ua = build_u_app(W, cfg.T_match, grid, lam, taper=cfg.taper)
    u0 = ComplexField(grid, cfg.T_match, ua.values + run.v[0].values)
    scfg = SimConfig(lam=lam, dt=cfg.forward_dt, t_start=cfg.T_match, t_end=cfg.T_max)
    u_end = evolve(u0, scfg, with_L=False).checkpoints[-1]
    vmax = WINDOW_FRACTION * grid.half_length / cfg.T_max
    inside = np.abs(W.v) <= vmax
    g = gamma_conv(u_end, W.v[inside])
    rec = extract_profile(g, lam)
    full = np.zeros_like(W.values)
    full[inside] = rec.values
    W_rec = ScatteringProfile(np.array(W.v), full, cfg.T_max, W.epsilon, lam)
    err = math.sqrt(np.sum(np.abs(full - W.values) ** 2) * W.dv)
    return {
        "W_recovered": W_rec,
        "l2_error": err,
        "relative_error": err / W.norm_l2() if W.norm_l2() > 0 else 0.0,
        "run": run,
        "u_end": u_end,
    }


def with_T_max(cfg: CompletenessConfig, T_max: float) -> CompletenessConfig:
    return replace(cfg, T_max=float(T_max))

