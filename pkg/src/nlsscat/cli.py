"""Command-line driver: nlsscat {simulate,gamma,profile,complete,roundtrip,verify}.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 missing or unreadable artifact.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .analysis import analyze_forward, extraction_times
from .completeness import backward_solve, roundtrip, xnorm, xnorm_sup
from .config import ConfigError, RunConfig, load_config
from .profile import extract_profile, profile_convergence, regularity_curve
from .rates import InsufficientData, MissingArtifact, verdict_lines, verify_claims
from .solver import NumericalFailure, Trajectory, evolve
from .wavepacket import gamma_conv

log = logging.getLogger("nlsscat")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_MISSING = 0, 2, 3, 4
CONFIG_NAME = "config.ini"
CKPT_DIR = "checkpoints"


def _config(args) -> RunConfig:
    if args.config is None:
        return RunConfig().validate()
    return load_config(args.config)


def _out(args, default: str) -> Path:
    return Path(args.out if args.out is not None else default)


def _write_checkpoints(out: Path, traj: Trajectory, cfg: RunConfig):
    s = cfg.simulation
    for i, u in enumerate(traj.checkpoints):
        io.checkpoint_write(out / CKPT_DIR / io.checkpoint_name(i), u, s.lam, s.epsilon)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    out = _out(args, "run")
    u0 = cfg.initial_field()
    sim = cfg.sim_config()
    traj = evolve(u0, sim)
    io.write_text(out / CONFIG_NAME, cfg.to_ini())
    _write_checkpoints(out, traj, cfg)
    io.write_csv(out / "diagnostics.csv", io.DIAGNOSTICS_HEADER, traj.diagnostics_rows())
    if args.dt_halve:
        fine = evolve(u0, cfg.sim_config(dt=sim.dt / 2), with_L=False)
        rows = []
        for a, b in zip(traj.checkpoints, fine.checkpoints):
            d = a.values - b.values
            rows.append((a.time, float(np.sqrt(np.sum(np.abs(d) ** 2) * a.grid.dx)),
                         float(np.max(np.abs(d)))))
        io.write_csv(out / "richardson.csv", ("t", "l2_diff", "linf_diff"), rows)
    print(f"simulate: {len(traj.checkpoints)} checkpoints in {out}")
    return EXIT_OK


def load_run(run_dir) -> tuple[RunConfig, Trajectory]:
    """Configuration and checkpoints of a simulate output directory."""
    run_dir = Path(run_dir)
    cfg_path = run_dir / CONFIG_NAME
    if not cfg_path.is_file():
        raise MissingArtifact(f"{cfg_path} is missing; run 'nlsscat simulate' first")
    cfg = load_config(cfg_path)
    _, cps = cfg.schedule()
    expected = sorted({cfg.simulation.t_start, cfg.simulation.t_end} | set(cps))
    names = [io.checkpoint_name(i) for i in range(len(expected))]
    missing = [n for n in names if not (run_dir / CKPT_DIR / n).is_file()]
    if missing:
        shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
        raise MissingArtifact(
            f"{len(missing)} of {len(names)} checkpoints missing in {run_dir / CKPT_DIR}: {shown}"
        )
    traj = Trajectory(config=cfg.sim_config())
    for n in names:
        try:
            u, _, _ = io.checkpoint_read(run_dir / CKPT_DIR / n)
        except io.CheckpointError as exc:
            raise MissingArtifact(f"{run_dir / CKPT_DIR / n}: {exc}") from exc
        traj.record(u)
    return cfg, traj


def _gammas(traj: Trajectory, times, v, threads: int):
    def one(t):
        return gamma_conv(traj.at(t), v)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(one, times))


def cmd_gamma(args) -> int:
    run_dir = Path(args.run_dir)
    cfg, traj = load_run(run_dir)
    times, _ = cfg.schedule()
    times = [t for t in times if t >= 1.0]
    rows = []
    for g in _gammas(traj, times, cfg.v_window(), args.threads):
        rows.extend((g.time, v, z.real, z.imag, abs(z)) for v, z in zip(g.v, g.values))
    io.write_csv(_out(args, str(run_dir)) / "gamma.csv", io.GAMMA_HEADER, rows)
    print(f"gamma: {len(times)} times x {cfg.analysis.v_samples} velocities")
    return EXIT_OK


def cmd_profile(args) -> int:
    run_dir = Path(args.run_dir)
    cfg, traj = load_run(run_dir)
    lam = cfg.simulation.lam
    ext = extraction_times(cfg.simulation.t_end)
    gam = _gammas(traj, ext, cfg.v_window(), args.threads)
    W = extract_profile(gam[-1], lam, cfg.simulation.epsilon)
    out = _out(args, str(run_dir))
    io.write_csv(out / "profile.csv", io.PROFILE_HEADER,
                 [(v, z.real, z.imag, abs(z)) for v, z in zip(W.v, W.values)])
    s, h = regularity_curve(W)
    io.write_csv(out / "regularity.csv", io.REGULARITY_HEADER, list(zip(s, h)))
    try:
        conv = profile_convergence(gam, lam)
        io.write_csv(out / "profile_convergence.csv", ("t", "diff_l2", "diff_linf"),
                     list(zip(conv["times"], conv["diff_l2"], conv["diff_linf"])))
    except InsufficientData as exc:
        log.warning("profile convergence skipped: %s", exc)
    print(f"profile: extracted at t={W.extraction_time:g}, ||W||_L2={W.norm_l2():.6g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    run_dir = Path(args.run_dir)
    cfg, traj = load_run(run_dir)
    times, _ = cfg.schedule()
    an = analyze_forward(traj, times, cfg.simulation.lam, v=cfg.v_window(),
                         fd_rel=cfg.analysis.fd_rel)
    verdicts = verify_claims(an.series)
    io.write_text(_out(args, str(run_dir)) / "verdicts.jsonl", verdict_lines(verdicts))
    for v in verdicts:
        print(f"{v.claim_id:16s} exponent={v.measured.exponent:+.4f} "
              f"r2={v.measured.r_squared:.4f} {'PASS' if v.passed else 'FAIL'}")
    return EXIT_OK


def cmd_complete(args) -> int:
    cfg = _config(args)
    cc = cfg.completeness_config()
    run = backward_solve(cc)
    out = _out(args, "complete")
    X, Xt = xnorm(run, "X"), xnorm(run, "X_tilde")
    io.write_csv(out / "xnorm.csv", ("T", "X", "X_tilde"),
                 [(T, a, b) for (T, a), (_, b) in zip(X, Xt)])
    io.write_csv(out / "correction.csv", ("t", "v_l2", "u_app_l2"),
                 [(t, float(np.sqrt(np.sum(np.abs(v.values) ** 2) * v.grid.dx)), a)
                  for t, v, a in zip(run.times, run.v, run.u_app_l2)])
    io.checkpoint_write(out / "v_match.bin", run.v[0], cc.lam, cc.M)
    print(f"complete: ||v(T_match)||/||u_app|| = {run.smallness():.4g}, "
          f"X = {xnorm_sup(X):.4g}, forcing guard = {run.guard:.2e}")
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    cfg = _config(args)
    cc = cfg.completeness_config()
    res = roundtrip(cc)
    out = _out(args, "roundtrip")
    X = xnorm_sup(xnorm(res["run"], "X"))
    io.write_csv(out / "roundtrip.csv", io.ROUNDTRIP_HEADER,
                 [(cc.T_max, cc.T_match, res["l2_error"], X)])
    W = res["W_recovered"]
    io.write_csv(out / "profile_recovered.csv", io.PROFILE_HEADER,
                 [(v, z.real, z.imag, abs(z)) for v, z in zip(W.v, W.values)])
    print(f"roundtrip: l2_error = {res['l2_error']:.6g} "
          f"({res['relative_error']:.3%} of ||W||)")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "gamma": cmd_gamma,
    "profile": cmd_profile,
    "complete": cmd_complete,
    "roundtrip": cmd_roundtrip,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlsscat", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", metavar="DIR", default=None, help="output directory")
        sp.add_argument("--threads", metavar="N", type=int, default=1,
                        help="worker threads for per-checkpoint analysis")

    for name in ("simulate", "complete", "roundtrip"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", default=None)
        common(sp)
        if name == "simulate":
            sp.add_argument("--dt-halve", action="store_true",
                            help="re-run at dt/2 and write richardson.csv")
    for name in ("gamma", "profile", "verify"):
        sp = sub.add_parser(name)
        sp.add_argument("run_dir", metavar="RUN_DIR")
        common(sp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MissingArtifact as exc:
        print(f"missing artifact: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_MISSING
    except InsufficientData as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_MISSING


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
