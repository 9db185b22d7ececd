"""INI run configuration.

Every section and key is optional; missing keys take the defaults below.
Unknown sections or keys are rejected with the offending line number.

    [simulation]   lam epsilon dt t_start t_end mu delta_exp half_length
                   n_points shape width velocity seed nonlinear
    [analysis]     v_min v_max v_samples per_octave residual_from fd_rel
    [completeness] M delta T_max T_match width half_window n_profile
                   half_length n_points dt per_window forward_dt method
                   taper_inner taper_outer (taper_outer = 0 turns the taper off)
"""
from __future__ import annotations

import configparser
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .analysis import analysis_schedule, make_initial
from .completeness import CompletenessConfig, default_profile
from .grid import ComplexField, Grid, make_grid
from .solver import SimConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationSection:
    lam: int = 1
    epsilon: float = 0.1
    dt: float = 5e-3
    t_start: float = 0.0
    t_end: float = 256.0
    mu: float = 0.0
    delta_exp: float = 1.0
    half_length: float = 1600.0
    n_points: int = 16384
    shape: str = "gaussian"
    width: float = 1.0
    velocity: float = 0.0
    seed: int = 0
    nonlinear: int = 1


@dataclass(frozen=True)
class AnalysisSection:
    v_min: float = -3.0
    v_max: float = 3.0
    v_samples: int = 1537
    per_octave: int = 4
    residual_from: float = 8.0
    fd_rel: float = 1.0 / 64.0


@dataclass(frozen=True)
class CompletenessSection:
    M: float = 0.1
    delta: float = 0.25
    T_max: float = 256.0
    T_match: float = 16.0
    width: float = 0.5
    half_window: float = 8.0
    n_profile: int = 1024
    half_length: float = 1000.0
    n_points: int = 4096
    dt: float = 0.05
    per_window: int = 16
    forward_dt: float = 5e-3
    method: str = "v"
    taper_inner: float = 0.45
    taper_outer: float = 0.7


SECTIONS = {
    "simulation": SimulationSection,
    "analysis": AnalysisSection,
    "completeness": CompletenessSection,
}


@dataclass(frozen=True)
class RunConfig:
    simulation: SimulationSection = field(default_factory=SimulationSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    completeness: CompletenessSection = field(default_factory=CompletenessSection)

    def grid(self) -> Grid:
        s = self.simulation
        return make_grid(s.half_length, s.n_points)

    def schedule(self):
        s, a = self.simulation, self.analysis
        return analysis_schedule(s.t_end, a.per_octave, residual_from=a.residual_from,
                                 fd_rel=a.fd_rel)

    def sim_config(self, dt: float | None = None) -> SimConfig:
        s = self.simulation
        _, cps = self.schedule()
        return SimConfig(lam=s.lam, epsilon=s.epsilon, dt=s.dt if dt is None else dt,
                         t_start=s.t_start, t_end=s.t_end, checkpoint_times=cps,
                         mu=s.mu, delta_exp=s.delta_exp, nonlinear=bool(s.nonlinear))

    def initial_field(self) -> ComplexField:
        s = self.simulation
        g = self.grid()
        if s.shape == "random":
            return random_smooth_field(g, s.epsilon, s.seed, s.width)
        return make_initial(g, s.epsilon, s.width, s.velocity, s.shape)

    def v_window(self) -> np.ndarray:
        a = self.analysis
        return np.linspace(a.v_min, a.v_max, a.v_samples)

    def completeness_config(self, T_max: float | None = None) -> CompletenessConfig:
        c = self.completeness
        W = default_profile(c.M, c.delta, c.width, c.half_window, c.n_profile, self.simulation.lam)
        return CompletenessConfig(
            W, M=c.M, delta=c.delta, T_max=c.T_max if T_max is None else T_max,
            T_match=c.T_match, lam=self.simulation.lam, half_length=c.half_length,
            n_points=c.n_points, dt=c.dt, per_window=c.per_window,
            forward_dt=c.forward_dt, method=c.method,
            taper=(c.taper_inner, c.taper_outer) if c.taper_outer > 0 else None,
        )

    def to_ini(self) -> str:
        """Canonical text form; parsing it gives back an equal config."""
        out = []
        for name in SECTIONS:
            out.append(f"[{name}]")
            for k, v in asdict(getattr(self, name)).items():
                out.append(f"{k} = {format(v, '.17g') if isinstance(v, float) else v}")
            out.append("")
        return "\n".join(out)

    def validate(self):
        """Build every derived object once so invalid values surface as ConfigError."""
        try:
            self.grid()
            self.sim_config()
            self.initial_field()
            a = self.analysis
            if not a.v_min < a.v_max or a.v_samples < 2:
                raise ValueError("analysis window needs v_min < v_max and >= 2 samples")
            c = self.completeness
            make_grid(c.half_length, c.n_points)
            self.completeness_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def random_smooth_field(grid: Grid, epsilon: float, seed: int, width: float = 1.0) -> ComplexField:
    """Sum of a few random complex Gaussian bumps, scaled to sup norm epsilon."""
    rng = np.random.default_rng(seed)
    x = grid.x
    vals = np.zeros(x.size, dtype=np.complex128)
    for _ in range(4):
        c = rng.normal() + 1j * rng.normal()
        x0 = rng.uniform(-2.0, 2.0) * width
        k = rng.uniform(-0.5, 0.5)
        vals += c * np.exp(-0.5 * ((x - x0) / width) ** 2 + 1j * k * x)
    top = np.max(np.abs(vals))
    return ComplexField(grid, 0.0, epsilon * vals / top if top > 0 else vals)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    cur = None
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            cur = m.group(1).strip()
            if key is None and cur == section:
                return no
            continue
        if key is not None and cur == section:
            m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
            if m and m.group(1).strip().lower() == key:
                return no
    return None


def _convert(raw: str, typ, where: str):
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {typ.__name__}") from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " ")) from exc
    parts = {}
    for section in cp.sections():
        if section not in SECTIONS:
            line = _line_of(text, section, None)
            raise ConfigError(f"{source}, line {line}: unknown section [{section}]")
        cls = SECTIONS[section]
        known = {f.name.lower(): f for f in fields(cls)}
        vals = {}
        for key, raw in cp.items(section):
            if key not in known:
                line = _line_of(text, section, key)
                raise ConfigError(f"{source}, line {line}: unknown key '{key}' in [{section}]")
            f = known[key]
            line = _line_of(text, section, key)
            vals[f.name] = _convert(raw, type(f.default), f"{source}, line {line}, key '{key}'")
        parts[section] = cls(**vals)
    return RunConfig(**parts).validate()


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from exc
    return parse_config(text, str(p))
