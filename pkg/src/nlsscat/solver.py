"""Strang-split time integration of i u_t + u_xx/2 = lam u|u|^2 + u F(|u|^2).

F(r) = mu * r**(1 + delta_exp) is the optional short-range perturbation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .grid import (
    BOUNDARY_TOLERANCE,
    ComplexField,
    apply_L,
    boundary_mass,
    mass,
    norm_l2,
    norm_linf,
)
from .rates import InsufficientData, RateFit, fit_power_law

log = logging.getLogger(__name__)


class NumericalFailure(RuntimeError):
    """Integration produced NaN, lost mass, or left the box."""

    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


@dataclass(frozen=True)
class SimConfig:
    lam: int = 1
    epsilon: float = 0.1
    dt: float = 5e-3
    t_start: float = 0.0
    t_end: float = 256.0
    checkpoint_times: tuple = ()
    mu: float = 0.0
    delta_exp: float = 1.0
    # test switches: drop the cubic/perturbation term or the dispersion
    nonlinear: bool = True
    dispersion: bool = True
    mass_tolerance: float = 1e-6
    boundary_tolerance: float = BOUNDARY_TOLERANCE
    boundary_abort: float = 1e-3

    def __post_init__(self):
        if self.lam not in (1, -1):
            raise ValueError(f"lam must be +1 or -1, got {self.lam}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_start < self.t_end:
            raise ValueError("t_start must be smaller than t_end")
        if self.mu != 0.0 and not self.delta_exp > 0:
            raise ValueError("delta_exp must be positive when a perturbation is present")
        cps = tuple(float(c) for c in self.checkpoint_times)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoint_times must be strictly increasing")
        object.__setattr__(self, "checkpoint_times", cps)

    @property
    def perturbation(self):
        return None if self.mu == 0.0 else {"mu": self.mu, "delta_exp": self.delta_exp}

    def nonlinear_coefficients(self):
        if not self.nonlinear:
            return 0.0, 0.0
        return float(self.lam), float(self.mu)


@dataclass
class Trajectory:
    checkpoints: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    sup_norm: list = field(default_factory=list)
    Lu_l2: list = field(default_factory=list)
    boundary_mass: list = field(default_factory=list)
    config: SimConfig | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([c.time for c in self.checkpoints])

    def at(self, t: float) -> ComplexField:
        for c in self.checkpoints:
            if abs(c.time - t) <= 1e-9 * max(1.0, abs(t)):
                return c
        raise KeyError(f"no checkpoint at t={t}")

    def record(self, u: ComplexField, with_L: bool = True):
        self.checkpoints.append(u)
        self.mass.append(mass(u))
        self.sup_norm.append(norm_linf(u))
        self.Lu_l2.append(norm_l2(apply_L(u, tolerance=np.inf)) if with_L else float("nan"))
        self.boundary_mass.append(boundary_mass(u))

    def diagnostics_rows(self):
        return [
            (c.time, m, s, l, b)
            for c, m, s, l, b in zip(
                self.checkpoints, self.mass, self.sup_norm, self.Lu_l2, self.boundary_mass
            )
        ]


class _Stepper:
    """Fused Strang stepping on a raw array; caches linear propagators."""

    def __init__(self, grid, cfg: SimConfig):
        self.grid = grid
        self.cfg = cfg
        self.lam, self.mu = cfg.nonlinear_coefficients()
        self.dexp = float(cfg.delta_exp)
        self._prop = {}

    def propagator(self, h):
        p = self._prop.get(h)
        if p is None:
            if self.cfg.dispersion:
                p = np.exp(-0.5j * h * self.grid.xi ** 2)
            else:
                p = None
            self._prop[h] = p
        return p

    def nonlinear(self, u, h):
        if self.lam != 0.0 or self.mu != 0.0:
            kernels.nonlinear_phase(u, h, self.lam, self.mu, self.dexp)

    def linear(self, u, h):
        p = self.propagator(h)
        if p is None:
            return u
        return np.fft.ifft(np.fft.fft(u) * p)

    def advance(self, u, t0, t1, dt):
        """Strang steps from t0 to t1 (either direction) with |step| <= dt."""
        span = t1 - t0
        if span == 0.0:
            return u
        n = max(1, math.ceil(abs(span) / dt - 1e-9))
        h = span / n
        u = np.array(u, dtype=np.complex128, copy=True)
        self.nonlinear(u, 0.5 * h)
        for k in range(n):
            u = self.linear(u, h)
            self.nonlinear(u, h if k < n - 1 else 0.5 * h)
            if (k & 1023) == 1023 and not np.isfinite(u[0:1]).all():
                break
        if not np.all(np.isfinite(u)):
            raise NumericalFailure(f"non-finite values between t={t0:g} and t={t1:g}", u)
        return u


def strang_step(u: ComplexField, t: float, dt: float, cfg: SimConfig) -> ComplexField:
    """One step: half nonlinear phase, full linear propagation, half nonlinear phase."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    st = _Stepper(u.grid, cfg)
    arr = np.array(u.values, dtype=np.complex128)
    st.nonlinear(arr, 0.5 * dt)
    arr = st.linear(arr, dt)
    st.nonlinear(arr, 0.5 * dt)
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(f"non-finite values after step at t={t:g}", arr)
    return ComplexField(u.grid, t + dt, arr)


def evolve(u0: ComplexField, cfg: SimConfig, with_L: bool = True,
           backward: bool = False) -> Trajectory:
    """Integrate from ``cfg.t_start`` to ``cfg.t_end`` recording checkpoints.

    With ``backward=True`` integration starts from ``u0`` at ``cfg.t_end`` and
    runs down to ``cfg.t_start``; checkpoints are still returned in
    increasing time order.
    """
    start, stop = (cfg.t_end, cfg.t_start) if backward else (cfg.t_start, cfg.t_end)
    if abs(u0.time - start) > 1e-12 * max(1.0, abs(start)):
        raise ValueError(f"initial field is at t={u0.time}, run starts at {start}")
    cps = [c for c in cfg.checkpoint_times if cfg.t_start <= c <= cfg.t_end]
    stops = sorted(set(cps) | {start, stop}, reverse=backward)
    st = _Stepper(u0.grid, cfg)
    traj = Trajectory(config=cfg)
    m0 = mass(u0)
    u = np.array(u0.values)
    t = start
    for target in stops:
        u = st.advance(u, t, target, cfg.dt)
        t = target
        fieldt = ComplexField(u0.grid, t, u)
        m = mass(fieldt)
        if m0 > 0 and abs(m - m0) / m0 > cfg.mass_tolerance:
            raise NumericalFailure(f"relative mass drift {abs(m - m0) / m0:.2e} at t={t:g}", u)
        bm = boundary_mass(fieldt)
        if bm > cfg.boundary_abort:
            raise NumericalFailure(f"boundary mass {bm:.2e} at t={t:g} exceeds abort level", u)
        if bm > cfg.boundary_tolerance:
            log.warning("boundary mass %.2e at t=%g exceeds %.1e", bm, t, cfg.boundary_tolerance)
        if target in cps or target == stop or target == start:
            traj.record(fieldt, with_L)
    if backward:
        order = np.argsort(traj.times)
        for name in ("checkpoints", "mass", "sup_norm", "Lu_l2", "boundary_mass"):
            seq = getattr(traj, name)
            setattr(traj, name, [seq[i] for i in order])
    return traj


def richardson(u0: ComplexField, cfg: SimConfig) -> dict:
    """Compare the final state at dt and dt/2."""
    a = evolve(u0, replace(cfg, checkpoint_times=()), with_L=False).checkpoints[-1]
    b = evolve(u0, replace(cfg, dt=cfg.dt / 2, checkpoint_times=()), with_L=False).checkpoints[-1]
    d = a.values - b.values
    return {
        "dt": cfg.dt,
        "l2_diff": float(np.sqrt(np.sum(np.abs(d) ** 2) * u0.grid.dx)),
        "linf_diff": float(np.max(np.abs(d))),
        "extrapolated_error": float(np.sqrt(np.sum(np.abs(d) ** 2) * u0.grid.dx)) * 4 / 3,
    }


def _L_potentials(u, cfg: SimConfig):
    """Coefficients of i w_t + w_xx/2 = V1 w + V2 conj(w) for w = Lu."""
    lam, mu = cfg.nonlinear_coefficients()
    r = np.abs(u) ** 2
    G = lam * r
    dG = np.full_like(r, lam)
    if mu != 0.0:
        G = G + mu * r ** (1 + cfg.delta_exp)
        dG = dG + mu * (1 + cfg.delta_exp) * r ** cfg.delta_exp
    return G, dG


def evolve_linearized(w0: ComplexField, background: Trajectory,
                      t_end: float | None = None,
                      checkpoint_times=None) -> Trajectory:
    """Evolve i w_t + w_xx/2 = V1 w + V2 conj(w) along the background solution.

    V1 = G + r G', V2 = -u^2 G' with G(r) = lam r + F(r): the equation solved
    by Lu.  The background is re-integrated from its checkpoint at
    ``w0.time`` in lockstep with w; within each nonlinear substep the pair is
    propagated exactly (in the co-rotating frame the substep map is linear
    with a nilpotent generator).
    """
    cfg = background.config
    if cfg is None:
        raise ValueError("background trajectory has no configuration")
    t0 = w0.time
    t_end = background.times[-1] if t_end is None else float(t_end)
    times = background.times
    if not (times[0] - 1e-9 <= t0 and t_end <= times[-1] + 1e-9 and t0 < t_end):
        raise ValueError(
            f"requested [{t0}, {t_end}] not covered by background [{times[0]}, {times[-1]}]"
        )
    u = np.array(background.at(t0).values)
    w = np.array(w0.values)
    st = _Stepper(w0.grid, cfg)
    cps = sorted({t_end} | {c for c in (checkpoint_times or ()) if t0 < c <= t_end})
    traj = Trajectory(config=cfg)
    traj.record(w0, with_L=False)

    def half(u, w, h):
        G, dG = _L_potentials(u, cfg)
        rot = np.exp(-1j * h * G)
        z = w - 1j * h * (np.abs(u) ** 2 * dG * w - u * u * dG * np.conj(w))
        return u * rot, z * rot

    t = t0
    for target in cps:
        n = max(1, math.ceil((target - t) / cfg.dt - 1e-9))
        h = (target - t) / n
        u, w = half(u, w, 0.5 * h)
        for k in range(n):
            u = st.linear(u, h)
            w = st.linear(w, h)
            u, w = half(u, w, h if k < n - 1 else 0.5 * h)
        t = target
        if not np.all(np.isfinite(w)):
            raise NumericalFailure(f"non-finite linearized field at t={t:g}", w)
        traj.record(ComplexField(w0.grid, t, w), with_L=False)
    return traj


def energy_growth_exponent(traj: Trajectory, t_min: float = 1.0) -> RateFit:
    """Fit ||Lu(t)||_L2 against (1 + t) over checkpoints with t >= t_min."""
    t = traj.times
    y = np.asarray(traj.Lu_l2)
    sel = t >= t_min
    if sel.sum() < 4 or t[sel][-1] < 100 * max(t_min, 1.0):
        raise InsufficientData("energy growth fit needs two decades of time past t=1")
    return fit_power_law(1.0 + t[sel], y[sel], min_octaves=2.0)


def free_gaussian(x, t):
    """Free Schroedinger evolution of exp(-x^2/2)."""
    a = 1.0 + 1j * t
    return a ** -0.5 * np.exp(-(x ** 2) / (2 * a))


def soliton(x, t, a=0.5):
    """Focusing (lam = -1) soliton a sech(a x) exp(i a^2 t / 2)."""
    return a / np.cosh(a * x) * np.exp(0.5j * a * a * t)
