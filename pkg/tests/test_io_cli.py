import json
import struct
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nlsscat import io
from nlsscat.cli import main
from nlsscat.config import ConfigError, RunConfig, parse_config
from nlsscat.grid import ComplexField, make_grid

LINEAR = """\
[simulation]
nonlinear = 0
t_end = 64
dt = 0.02
width = 0.5
half_length = 800
n_points = 8192
[analysis]
v_min = -2
v_max = 2
v_samples = 257
"""

SMALL = """\
[simulation]
t_end = 16
dt = 0.01
half_length = 200
n_points = 2048
[analysis]
v_min = -1
v_max = 1
v_samples = 65
[completeness]
T_max = 32
forward_dt = 0.01
"""


def write(tmp, name, text):
    p = Path(tmp) / name
    p.write_text(text)
    return str(p)


def tree_bytes(root):
    root = Path(root)
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def linear_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("linear")
    cfg = write(d, "lin.ini", LINEAR)
    assert main(["simulate", "--config", cfg, "--out", str(d / "run")]) == 0
    return d / "run"


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("small")
    cfg = write(d, "small.ini", SMALL)
    assert main(["simulate", "--config", cfg, "--out", str(d / "run")]) == 0
    return d, cfg


class TestCheckpoint:
    def field(self, rng, n=64):
        g = make_grid(12.5, n)
        return ComplexField(g, 3.25, rng.normal(size=n) + 1j * rng.normal(size=n))

    def test_layout(self, rng):
        u = self.field(rng, 16)
        data = io.encode_checkpoint(u, -1, 0.125)
        head = (b"NLSSCAT1" + (1).to_bytes(4, "little") + (16).to_bytes(8, "little")
                + struct.pack("<d", 12.5) + struct.pack("<d", 3.25)
                + (-1).to_bytes(4, "little", signed=True) + struct.pack("<d", 0.125))
        assert data[:len(head)] == head and len(head) == 48
        body = np.frombuffer(data[48:], dtype="<f8")
        assert np.array_equal(body[0::2], u.values.real)
        assert np.array_equal(body[1::2], u.values.imag)
        assert len(data) == 48 + 16 * 16

    def test_round_trip(self, rng, tmp_path):
        u = self.field(rng)
        p = io.checkpoint_write(tmp_path / "a.bin", u, 1, 0.1)
        back, lam, eps = io.checkpoint_read(p)
        assert np.array_equal(back.values, u.values)
        assert (back.time, lam, eps) == (3.25, 1, 0.1)
        assert back.grid.half_length == 12.5 and back.grid.n_points == 64
        assert io.encode_checkpoint(back, lam, eps) == p.read_bytes()

    def test_truncated(self, rng):
        data = io.encode_checkpoint(self.field(rng), 1, 0.1)
        for cut in (10, 48, len(data) - 1):
            with pytest.raises(io.CheckpointError, match="truncated"):
                io.decode_checkpoint(data[:cut])
        with pytest.raises(io.CheckpointError, match="oversized"):
            io.decode_checkpoint(data + b"\0")

    def test_magic(self, rng):
        data = io.encode_checkpoint(self.field(rng), 1, 0.1)
        with pytest.raises(io.CheckpointError, match="NLSSCAT1"):
            io.decode_checkpoint(b"NLSSCAT2" + data[8:])

    def test_version(self, rng):
        data = io.encode_checkpoint(self.field(rng), 1, 0.1)
        with pytest.raises(io.CheckpointError, match="version 2"):
            io.decode_checkpoint(data[:8] + (2).to_bytes(4, "little") + data[12:])


class TestText:
    def test_number_format(self):
        assert io.fmt(0.1) == "0.10000000000000001"
        assert io.fmt(np.float64(-1 / 3)) == "-0.33333333333333331"
        assert io.fmt(2.5e-300) == "2.5e-300"
        assert io.fmt(7) == "7" and io.fmt(np.int64(-3)) == "-3"
        assert io.fmt(True) == "1" and io.fmt(float("inf")) == "inf"

    def test_number_round_trip(self, rng):
        x = rng.normal(size=1000) * 10.0 ** rng.integers(-300, 300, size=1000)
        assert all(float(io.fmt(a)) == a for a in x)

    def test_csv_round_trip(self, rng, tmp_path):
        rows = [tuple(r) for r in rng.normal(size=(5, 3))]
        p = io.write_csv(tmp_path / "t.csv", ("a", "b", "c"), rows)
        text = p.read_text()
        assert text.splitlines()[0] == "a,b,c" and text.endswith("\n")
        header, back = io.read_csv(p)
        assert header == ("a", "b", "c") and back == rows

    def test_atomic_write_keeps_old_file(self, tmp_path):
        p = io.write_text(tmp_path / "x.txt", "old")
        with pytest.raises(TypeError):
            io.write_atomic(p, "not bytes")
        assert p.read_text() == "old"
        assert [q.name for q in tmp_path.iterdir()] == ["x.txt"]


class TestConfig:
    def test_ini_round_trip(self):
        cfg = RunConfig()
        assert parse_config(cfg.to_ini()) == cfg

    def test_partial_sections(self):
        cfg = parse_config("[completeness]\ntaper_outer = 0\n")
        assert cfg.completeness_config().taper is None
        assert cfg.simulation == RunConfig().simulation

    @pytest.mark.parametrize("text, needle", [
        ("[simulation]\nlam = 1\nbogus = 3\n", "bogus"),
        ("[nonsense]\nx = 1\n", "nonsense"),
        ("[simulation]\ndt = fast\n", "dt"),
        ("[simulation]\nlam = 3\n", "lam"),
        ("no section\n", "section"),
    ])
    def test_rejects(self, text, needle):
        with pytest.raises(ConfigError, match=needle):
            parse_config(text)

    def test_line_number(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("[simulation]\nlam = 1\nbogus = 3\n")


class TestCLI:
    def test_minimal_config(self, tmp_path):
        cfg = write(tmp_path, "min.ini", "[simulation]\nt_end = 2\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
        cps = list((tmp_path / "r" / "checkpoints").glob("ckpt_*.bin"))
        assert len(cps) >= 1
        header, rows = io.read_csv(tmp_path / "r" / "diagnostics.csv")
        assert header == ("t", "mass", "sup_norm", "Lu_l2", "boundary_mass")
        assert len(rows) == len(cps)

    def test_malformed_key(self, tmp_path, capsys):
        cfg = write(tmp_path, "bad.ini", "[simulation]\nepsilonn = 0.1\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "r")]) == 2
        assert "epsilonn" in capsys.readouterr().err
        assert not (tmp_path / "r").exists()

    def test_missing_config_file(self, tmp_path):
        assert main(["complete", "--config", str(tmp_path / "none.ini")]) == 2

    def test_bad_threads(self, linear_run):
        assert main(["gamma", str(linear_run), "--threads", "0"]) == 2

    def test_numerical_failure(self, tmp_path, capsys):
        cfg = write(tmp_path, "wide.ini",
                    "[simulation]\nhalf_length = 10\nn_points = 256\nt_end = 40\ndt = 0.01\n")
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "r")]) == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_gamma_empty_directory(self, tmp_path, capsys):
        assert main(["gamma", str(tmp_path)]) == 4
        assert "config.ini" in capsys.readouterr().err

    def test_gamma_lists_missing_checkpoints(self, tmp_path, capsys):
        io.write_text(tmp_path / "config.ini", parse_config(LINEAR).to_ini())
        assert main(["gamma", str(tmp_path)]) == 4
        err = capsys.readouterr().err
        assert "ckpt_00000.bin" in err and "checkpoints missing" in err

    def test_corrupt_checkpoint(self, linear_run, tmp_path):
        import shutil

        d = tmp_path / "run"
        shutil.copytree(linear_run, d)
        p = sorted((d / "checkpoints").glob("*.bin"))[3]
        p.write_bytes(p.read_bytes()[:100])
        assert main(["verify", str(d)]) == 4

    def test_verify_linear_run(self, linear_run):
        assert main(["verify", str(linear_run)]) == 0
        recs = [json.loads(s) for s in (linear_run / "verdicts.jsonl").read_text().splitlines()]
        (sup,) = [r for r in recs if r["claim_id"] == "point_decay"]
        # free Gaussian: sup|u| = (1 + t^2/w^4)^(-1/4); slack 0.02 around -1/2
        assert sup["pass"] and abs(sup["exponent"] + 0.5) <= 0.02
        assert sup["r2"] >= 0.95

    def test_gamma_threads_identical(self, linear_run, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["gamma", str(linear_run), "--out", str(a)]) == 0
        assert main(["gamma", str(linear_run), "--out", str(b), "--threads", "3"]) == 0
        data = (a / "gamma.csv").read_bytes()
        assert data == (b / "gamma.csv").read_bytes()
        assert data.splitlines()[0].decode() == ",".join(io.GAMMA_HEADER)

    def test_profile(self, linear_run, tmp_path):
        assert main(["profile", str(linear_run), "--out", str(tmp_path)]) == 0
        header, rows = io.read_csv(tmp_path / "profile.csv")
        assert header == io.PROFILE_HEADER and len(rows) == 257
        assert io.read_csv(tmp_path / "regularity.csv")[0] == io.REGULARITY_HEADER

    def test_dt_halve(self, tmp_path):
        cfg = write(tmp_path, "s.ini", SMALL)
        out = tmp_path / "r"
        assert main(["simulate", "--config", cfg, "--out", str(out), "--dt-halve"]) == 0
        header, rows = io.read_csv(out / "richardson.csv")
        assert header == ("t", "l2_diff", "linf_diff")
        assert rows[0][1] == 0.0 and 0 < rows[-1][1] < 1e-5

    def test_determinism(self, small_run, tmp_path):
        d, cfg = small_run
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "again")]) == 0
        assert tree_bytes(d / "run") == tree_bytes(tmp_path / "again")
        for out in (d / "run", tmp_path / "again"):
            assert main(["gamma", str(out)]) == 0
        assert (d / "run" / "gamma.csv").read_bytes() == (tmp_path / "again" / "gamma.csv").read_bytes()

    def test_verdicts_deterministic(self, linear_run, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["verify", str(linear_run), "--out", str(a)]) == 0
        assert main(["verify", str(linear_run), "--out", str(b)]) == 0
        assert (a / "verdicts.jsonl").read_bytes() == (b / "verdicts.jsonl").read_bytes()

    def test_complete_and_roundtrip(self, small_run, tmp_path):
        _, cfg = small_run
        assert main(["complete", "--config", cfg, "--out", str(tmp_path / "c")]) == 0
        header, rows = io.read_csv(tmp_path / "c" / "correction.csv")
        assert header == ("t", "v_l2", "u_app_l2") and rows[-1][1] == 0.0
        assert main(["roundtrip", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
        header, rows = io.read_csv(tmp_path / "r" / "roundtrip.csv")
        assert header == io.ROUNDTRIP_HEADER and "l2_error" in header
        assert rows[0][:2] == (32.0, 16.0) and rows[0][2] > 0

    def test_console_script(self, tmp_path):
        bad = write(tmp_path, "bad.ini", "[simulation]\nwat = 1\n")
        r = subprocess.run([sys.executable, "-m", "nlsscat.cli", "simulate", "--config", bad],
                           capture_output=True, text=True, cwd=tmp_path)
        assert r.returncode == 2 and "wat" in r.stderr
