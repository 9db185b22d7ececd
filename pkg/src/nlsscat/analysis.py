"""Packet analysis of a forward run: the time series fed to the rate claims."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import ComplexField, Grid, mass, norm_l2
from .profile import (
    EXTRACTION_FLOOR,
    ScatteringProfile,
    asymptotic_error,
    extract_profile,
    extrapolated_profile,
    profile_convergence,
)
from .solver import Trajectory
from .wavepacket import (
    GammaField,
    diff_fourier,
    diff_physical,
    gamma_conv,
    residual_decomposed,
    residual_ode,
)

FD_REL = 1.0 / 64.0


def analysis_schedule(t_end: float, per_octave: int = 4, t_first: float = 1.0,
                      residual_from: float = 8.0, fd_rel: float = FD_REL):
    """Analysis times t_first * 2^(k/per_octave) and the full checkpoint list.

    For analysis times >= ``residual_from`` the neighbours t(1 -+ fd_rel) are
    added so the centred difference spans t/32.
    """
    n = int(np.floor(per_octave * np.log2(t_end / t_first) + 1e-9))
    times = t_first * 2.0 ** (np.arange(n + 1) / per_octave)
    times = [float(np.round(t, 12)) for t in times]
    cps = set(times)
    for t in times:
        if t >= residual_from and t * (1 + fd_rel) <= t_end * (1 + 1e-12):
            cps.update((t * (1 - fd_rel), t * (1 + fd_rel)))
    return times, tuple(sorted(cps))


def extraction_times(t_end: float, floor: float = EXTRACTION_FLOOR):
    out, t = [], floor
    while t <= t_end * (1 + 1e-12):
        out.append(t)
        t *= 2
    return out


@dataclass
class ForwardAnalysis:
    lam: int
    series: dict = field(default_factory=dict)
    gammas: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    profile: ScatteringProfile | None = None
    convergence: dict | None = None
    limit_profile: ScatteringProfile | None = None
    mass0: float = float("nan")
    decomposition_gap: list = field(default_factory=list)


def _near(times, t):
    for s in times:
        if abs(s - t) <= 1e-9 * max(1.0, t):
            return s
    return None


def analyze_forward(traj: Trajectory, analysis_times, lam: int, v=None,
                    fd_rel: float = FD_REL, u0: ComplexField | None = None) -> ForwardAnalysis:
    """Compute gamma, comparison errors, ODE residuals and profiles at the analysis times."""
    times = list(traj.times)
    out = ForwardAnalysis(lam)
    out.mass0 = traj.mass[0] if u0 is None else mass(u0)
    ser = {k: ([], []) for k in (
        "sup_u", "Lu_l2", "Lu_l2_1pt", "diff_x_l2", "diff_x_linf", "diff_xi_l2",
        "diff_xi_linf", "R_linf", "R_l2", "R1_l2", "Rdec_linf", "err_x_l2", "err_x_linf",
        "err_xi_l2", "err_xi_linf", "profile_diff_l2", "profile_diff_linf")}

    def push(name, t, y):
        ser[name][0].append(t)
        ser[name][1].append(y)

    for t, s, lu in zip(times, traj.sup_norm, traj.Lu_l2):
        if t >= 1.0:
            push("sup_u", t, s)
            push("Lu_l2", t, lu)
            push("Lu_l2_1pt", 1.0 + t, lu)

    for ta in analysis_times:
        t = _near(times, ta)
        if t is None or t < 1.0:
            continue
        u = traj.at(t)
        g = gamma_conv(u, v)
        out.gammas[t] = g
        dp, df = diff_physical(u, g), diff_fourier(u, g)
        push("diff_x_l2", t, dp["l2"])
        push("diff_x_linf", t, dp["linf"])
        push("diff_xi_l2", t, df["l2"])
        push("diff_xi_linf", t, df["linf"])
        lo, hi = _near(times, t * (1 - fd_rel)), _near(times, t * (1 + fd_rel))
        if lo is not None and hi is not None:
            R = residual_ode(gamma_conv(traj.at(lo), g.v), gamma_conv(traj.at(hi), g.v), lam)
            dec = residual_decomposed(u, g, lam)
            out.residuals[t] = (R, dec)
            push("R_linf", t, R.norm_linf())
            push("R_l2", t, R.norm_l2())
            push("R1_l2", t, dec["R1"].norm_l2())
            push("Rdec_linf", t, float(np.max(np.abs(dec["R"].values - R.values))))

    ext = [t for t in sorted(out.gammas) if t >= EXTRACTION_FLOOR
           and abs(np.log2(t / EXTRACTION_FLOOR) - round(np.log2(t / EXTRACTION_FLOOR))) < 1e-9]
    if ext:
        out.profile = extract_profile(out.gammas[ext[-1]], lam)
        if len(ext) >= 5:
            conv = profile_convergence([out.gammas[t] for t in ext], lam)
            out.convergence = conv
            for t, a, b in zip(conv["times"], conv["diff_l2"], conv["diff_linf"]):
                push("profile_diff_l2", t, a)
                push("profile_diff_linf", t, b)
        W = out.profile
        if len(ext) >= 2:
            rate = -1.0
            if out.convergence is not None and out.convergence["rate_l2"] is not None:
                rate = min(out.convergence["rate_l2"].exponent, -0.25)
            W = extrapolated_profile(extract_profile(out.gammas[ext[-2]], lam), W, rate)
        out.limit_profile = W
        for t in sorted(out.gammas):
            if t >= 1.0 and t < W.extraction_time:
                e = asymptotic_error(traj.at(t), W)
                for k, val in e.items():
                    push(k, t, val)
    out.series = {k: (np.array(a), np.array(b)) for k, (a, b) in ser.items() if a}
    return out


def make_initial(grid: Grid, epsilon: float, width: float = 1.0, velocity: float = 0.0,
                 shape: str = "gaussian") -> ComplexField:
    """Initial data epsilon * exp(-x^2 / (2 width^2)) * exp(i velocity x)."""
    x = grid.x
    if shape == "gaussian":
        vals = epsilon * np.exp(-(x ** 2) / (2 * width ** 2))
    elif shape == "sech":
        vals = epsilon / np.cosh(x / width)
    else:
        raise ValueError(f"unknown initial shape {shape!r}")
    return ComplexField(grid, 0.0, vals * np.exp(1j * velocity * x))
