"""Power-law fits, dyadic-window norms and pass/fail verdicts on decay claims."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_R2_MIN = 0.9
DEFAULT_SLACK_C = 5.0


class InsufficientData(ValueError):
    pass


class MissingArtifact(KeyError):
    pass


@dataclass(frozen=True)
class RateFit:
    exponent: float
    intercept: float
    r_squared: float
    window: tuple
    n_samples: int

    def predict(self, t):
        return np.exp(self.intercept) * np.asarray(t, dtype=float) ** self.exponent


def fit_power_law(t: Sequence[float], y: Sequence[float], min_octaves: float = 2.0) -> RateFit:
    """Least-squares fit of log y = exponent * log t + intercept."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if t.size < 4:
        raise InsufficientData(f"need at least 4 samples, got {t.size}")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t must be positive and strictly increasing")
    if np.any(~(y > 0)):
        raise ValueError("y must be strictly positive")
    if np.log2(t[-1] / t[0]) < min_octaves - 1e-12:
        raise InsufficientData(
            f"span {t[0]:g}..{t[-1]:g} covers fewer than {min_octaves} octaves"
        )
    lt, ly = np.log(t), np.log(y)
    A = np.column_stack([lt, np.ones_like(lt)])
    (p, c), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (p * lt + c)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return RateFit(float(p), float(c), r2, (float(t[0]), float(t[-1])), int(t.size))


def dyadic_windows(t_lo: float, t_hi: float) -> list[float]:
    out, T = [], float(t_lo)
    while 2 * T <= t_hi * (1 + 1e-12):
        out.append(T)
        T *= 2
    return out


def dyadic_sup_norm(
    times: Sequence[float],
    values: Sequence[np.ndarray],
    dx: float,
    weight: Callable[[float], float],
    inner: str = "both",
    t_lo: float | None = None,
    t_hi: float | None = None,
    min_points: int = 4,
) -> list[tuple[float, float]]:
    """Weighted norms over windows [T, 2T].

    ``inner`` picks ``"LinfL2"`` (max over the window of the spatial L2 norm),
    ``"L4Linf"`` ((integral over the window of sup|v|^4 dt)^(1/4), trapezoid
    rule over the samples) or ``"both"`` (their sum).
    """
    times = np.asarray(times, dtype=float)
    if inner not in ("LinfL2", "L4Linf", "both"):
        raise ValueError(f"unknown inner norm {inner!r}")
    l2 = np.array([np.sqrt(np.sum(np.abs(v) ** 2) * dx) for v in values])
    linf = np.array([np.max(np.abs(v)) if np.size(v) else 0.0 for v in values])
    t_lo = times[0] if t_lo is None else t_lo
    t_hi = times[-1] if t_hi is None else t_hi
    wins = dyadic_windows(t_lo, t_hi)
    if not wins:
        raise InsufficientData("no complete dyadic window in the sampled range")
    table = []
    for T in wins:
        sel = (times >= T * (1 - 1e-12)) & (times <= 2 * T * (1 + 1e-12))
        if sel.sum() < min_points:
            raise InsufficientData(
                f"window [{T:g}, {2 * T:g}] has {int(sel.sum())} samples, need {min_points}"
            )
        a = float(np.max(l2[sel]))
        b = float(np.trapezoid(linf[sel] ** 4, times[sel]) ** 0.25)
        val = {"LinfL2": a, "L4Linf": b, "both": a + b}[inner]
        table.append((T, weight(T) * val))
    return table


@dataclass(frozen=True)
class Claim:
    claim_id: str
    series: str
    target_exponent: float
    slack: float
    lower: float | None = None
    r2_min: float = DEFAULT_R2_MIN
    t_min: float = 1.0
    t_max: float = np.inf


@dataclass(frozen=True)
class Verdict:
    claim_id: str
    target_exponent: float
    slack: float
    measured: RateFit
    passed: bool
    lower: float | None = None
    r2_min: float = DEFAULT_R2_MIN

    def to_record(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "target": self.target_exponent,
            "slack": self.slack,
            "lower": self.lower,
            "exponent": self.measured.exponent,
            "r2": self.measured.r_squared,
            "window": list(self.measured.window),
            "n": self.measured.n_samples,
            "pass": self.passed,
        }


def judge(claim: Claim, fit: RateFit) -> Verdict:
    ok = fit.exponent <= claim.target_exponent + claim.slack and fit.r_squared >= claim.r2_min
    if claim.lower is not None:
        ok = ok and fit.exponent >= claim.lower
    return Verdict(claim.claim_id, claim.target_exponent, claim.slack, fit, bool(ok),
                   claim.lower, claim.r2_min)


# Thresholds are the exit criteria of the acceptance suite.
CLAIMS: tuple[Claim, ...] = (
    Claim("point_decay", "sup_u", -0.5, 0.05, lower=-0.55, r2_min=0.95, t_min=1.0),
    Claim("energy_growth", "Lu_l2_1pt", 0.0, 0.05, lower=0.0, r2_min=0.0, t_min=1.0),
    Claim("diff_x_l2", "diff_x_l2", -1.0, 0.1, t_min=4.0),
    Claim("diff_x_linf", "diff_x_linf", -0.75, 0.1, t_min=4.0),
    Claim("diff_xi_l2", "diff_xi_l2", -0.5, 0.1, t_min=4.0),
    Claim("diff_xi_linf", "diff_xi_linf", -0.25, 0.1, t_min=4.0),
    Claim("residual_linf", "R_linf", -1.25, 0.2, lower=-1.45, t_min=8.0),
    Claim("residual_l2", "R_l2", -1.5, 0.2, t_min=8.0),
    Claim("profile_l2", "profile_diff_l2", -0.5, 0.15, t_min=16.0),
    Claim("profile_linf", "profile_diff_linf", -0.25, 0.1, t_min=16.0),
    Claim("asy_x_l2", "err_x_l2", -1.0, 0.15, t_min=4.0),
    Claim("asy_xi_l2", "err_xi_l2", -0.5, 0.1, t_min=4.0),
)


def verify_claims(artifacts: dict, claims: Iterable[Claim] | None = None) -> list[Verdict]:
    """Fit every claim's series and judge it.

    ``artifacts`` maps a series name to ``(t, y)``.  With ``claims=None`` the
    registered claims whose series are present are checked; explicitly
    requested claims with a missing series raise ``MissingArtifact``.
    """
    explicit = claims is not None
    claims = CLAIMS if claims is None else tuple(claims)
    out = []
    for c in claims:
        if c.series not in artifacts:
            if explicit:
                raise MissingArtifact(f"claim {c.claim_id} needs series {c.series!r}")
            continue
        t, y = (np.asarray(a, dtype=float) for a in artifacts[c.series])
        sel = (t >= c.t_min) & (t <= c.t_max)
        out.append(judge(c, fit_power_law(t[sel], y[sel])))
    if not out:
        raise MissingArtifact("no claim has its input series available")
    return out


def verdict_lines(verdicts: Iterable[Verdict]) -> str:
    """JSON-lines report, one verdict per line, stable key order."""
    return "".join(json.dumps(v.to_record(), sort_keys=True) + "\n" for v in verdicts)
