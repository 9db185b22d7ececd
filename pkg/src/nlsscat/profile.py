"""Modified-scattering profile W(v) extracted from gamma(t, v)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ComplexField, sobolev_norm
from .rates import InsufficientData, RateFit, fit_power_law
from .wavepacket import CHI1_INTEGRAL, GammaField, sample, spectrum_at

EXTRACTION_FLOOR = 16.0
PHASE_CONVENTION = "gamma-modulus"


@dataclass(frozen=True, eq=False)
class ScatteringProfile:
    v: np.ndarray
    values: np.ndarray
    extraction_time: float
    epsilon: float = float("nan")
    lam: int = 1
    phase_convention: str = PHASE_CONVENTION

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0])

    def norm_l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.dv))

    def norm_linf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def asymptotic_gamma(self, t: float) -> np.ndarray:
        """W exp(-i lam |W|^2 log t): the unperturbed ODE solution."""
        return self.values * np.exp(-1j * self.lam * np.abs(self.values) ** 2 * np.log(t))


def extract_profile(g: GammaField, lam: int = 1, epsilon: float = float("nan"),
                    floor: float = EXTRACTION_FLOOR) -> ScatteringProfile:
    """W(v) = gamma(t, v) exp(+i lam |gamma(t, v)|^2 log t).

    The ODE d(gamma)/dt = -i lam t^-1 |gamma|^2 gamma rotates the phase by
    -lam |gamma|^2 log t, so the correction undoes exactly that rotation.
    """
    if g.time < floor:
        raise ValueError(f"extraction needs t >= {floor}, got {g.time:g}")
    vals = g.values * np.exp(1j * lam * np.abs(g.values) ** 2 * np.log(g.time))
    return ScatteringProfile(np.array(g.v), vals, g.time, epsilon, lam)


def profile_convergence(run: list, lam: int = 1, atol: float = 1e-13) -> dict:
    """Fit the decay of successive-extraction differences ||W_{t_k+1} - W_{t_k}||."""
    gammas = sorted(run, key=lambda g: g.time)
    if len(gammas) < 4 or gammas[-1].time / gammas[0].time < 4 * (1 - 1e-12):
        raise InsufficientData("profile convergence needs >= 4 extractions over >= 2 octaves")
    prof = [extract_profile(g, lam) for g in gammas]
    t = np.array([p.extraction_time for p in prof[:-1]])
    dl2 = np.array([np.sqrt(np.sum(np.abs(b.values - a.values) ** 2) * a.dv)
                    for a, b in zip(prof, prof[1:])])
    dlinf = np.array([np.max(np.abs(b.values - a.values)) for a, b in zip(prof, prof[1:])])
    scale = max(p.norm_linf() for p in prof)
    out = {"times": t, "diff_l2": dl2, "diff_linf": dlinf, "profiles": prof}
    if np.max(dlinf) <= atol * max(scale, 1.0):
        out.update(converged=True, rate_l2=None, rate_linf=None)
        return out
    out.update(
        converged=False,
        rate_l2=fit_power_law(t, dl2),
        rate_linf=fit_power_law(t, dlinf),
    )
    return out


def extrapolated_profile(coarse: ScatteringProfile, fine: ScatteringProfile,
                         exponent: float = -1.0) -> ScatteringProfile:
    """Richardson estimate of the t -> infinity profile from two extractions.

    Assumes W_t - W_inf ~ C t^exponent; a profile taken at a finite time
    otherwise leaves an O(t^exponent) floor in every asymptotic comparison.
    """
    if not np.array_equal(coarse.v, fine.v):
        raise ValueError("profiles live on different velocity grids")
    if not exponent < 0:
        raise ValueError("extrapolation needs a decaying difference")
    ratio = (coarse.extraction_time / fine.extraction_time) ** exponent
    vals = fine.values - (fine.values - coarse.values) / (1.0 - ratio)
    return ScatteringProfile(np.array(fine.v), vals, fine.extraction_time,
                             fine.epsilon, fine.lam, "extrapolated")


def asymptotic_error(u: ComplexField, W: ScatteringProfile) -> dict:
    """Residuals of the physical and Fourier-side asymptotic expansions on the v window."""
    t = u.time
    x = W.v * t
    ag = W.asymptotic_gamma(t)
    ex = sample(u, x) - t ** -0.5 * np.exp(0.5j * x * x / t) * ag
    ek = spectrum_at(u, W.v) - CHI1_INTEGRAL * np.exp(-0.5j * t * W.v ** 2) * ag
    dv = W.dv
    return {
        "err_x_linf": float(np.max(np.abs(ex))),
        # L2 in x over x = v t: dx = t dv
        "err_x_l2": float(np.sqrt(np.sum(np.abs(ex) ** 2) * dv * t)),
        "err_xi_linf": float(np.max(np.abs(ek))),
        "err_xi_l2": float(np.sqrt(np.sum(np.abs(ek) ** 2) * dv)),
    }


def _taper(n: int, flat: float = 0.8) -> np.ndarray:
    """Smooth window equal to 1 on the central ``flat`` fraction, 0 at the ends."""
    s = np.abs(np.linspace(-1.0, 1.0, n))
    r = np.clip((s - flat) / (1.0 - flat), 0.0, 1.0)

    def bump(y):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    return bump(1.0 - r) / (bump(1.0 - r) + bump(r))


def regularity_curve(W: ScatteringProfile, s_values=None) -> tuple[np.ndarray, np.ndarray]:
    """H^s norms of the (edge-tapered) profile for s on a grid in [0, 2]."""
    s_values = np.linspace(0.0, 2.0, 201) if s_values is None else np.asarray(s_values)
    vals = W.values * _taper(W.values.size)
    return s_values, np.array([sobolev_norm(vals, s, dv=W.dv) for s in s_values])


def profile_regularity(W: ScatteringProfile, factor: float = 10.0, s_values=None) -> float:
    """Largest scanned s with ||W||_{H^s} <= factor * ||W||_{H^0}."""
    s, h = regularity_curve(W, s_values)
    if h[0] == 0.0:
        return float(s[-1])
    bad = np.nonzero(h > factor * h[0])[0]
    return float(s[-1] if bad.size == 0 else (s[bad[0] - 1] if bad[0] > 0 else 0.0))
