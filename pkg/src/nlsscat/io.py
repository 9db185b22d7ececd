"""Checkpoint files, CSV tables and JSON-lines reports, all written atomically."""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .grid import ComplexField, make_grid

MAGIC = b"NLSSCAT1"
VERSION = 1
# magic, version u32, n_points u64, half_length f64, time f64, lambda i32, epsilon f64
HEADER = struct.Struct("<8sIQddid")

DIAGNOSTICS_HEADER = ("t", "mass", "sup_norm", "Lu_l2", "boundary_mass")
GAMMA_HEADER = ("t", "v", "Re", "Im", "|γ|")
PROFILE_HEADER = ("v", "Re W", "Im W", "|W|")
REGULARITY_HEADER = ("s", "H^s")
ROUNDTRIP_HEADER = ("T_max", "T_match", "l2_error", "X-norm")


class CheckpointError(ValueError):
    pass


def write_atomic(path, data: bytes) -> Path:
    """Write to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def encode_checkpoint(u: ComplexField, lam: int, epsilon: float) -> bytes:
    g = u.grid
    head = HEADER.pack(MAGIC, VERSION, g.n_points, float(g.half_length), float(u.time),
                       int(lam), float(epsilon))
    payload = np.empty(2 * g.n_points, dtype="<f8")
    payload[0::2] = u.values.real
    payload[1::2] = u.values.imag
    return head + payload.tobytes()


def decode_checkpoint(data: bytes):
    """Return (field, lam, epsilon) from checkpoint bytes."""
    if len(data) < HEADER.size:
        raise CheckpointError(f"truncated checkpoint: {len(data)} bytes, header needs {HEADER.size}")
    magic, version, n, L, t, lam, eps = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}, expected {VERSION}")
    need = HEADER.size + 16 * n
    if len(data) != need:
        kind = "truncated" if len(data) < need else "oversized"
        raise CheckpointError(f"{kind} checkpoint: {len(data)} bytes, expected {need}")
    raw = np.frombuffer(data, dtype="<f8", offset=HEADER.size)
    grid = make_grid(L, int(n))
    return ComplexField(grid, t, raw[0::2] + 1j * raw[1::2]), int(lam), float(eps)


def checkpoint_write(path, u: ComplexField, lam: int, epsilon: float) -> Path:
    return write_atomic(path, encode_checkpoint(u, lam, epsilon))


def checkpoint_read(path):
    return decode_checkpoint(Path(path).read_bytes())


def checkpoint_name(index: int) -> str:
    return f"ckpt_{index:05d}.bin"


def fmt(x) -> str:
    """Locale-free full-precision number."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def csv_bytes(header, rows) -> bytes:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(x) for x in row) for row in rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_csv(path, header, rows) -> Path:
    return write_atomic(path, csv_bytes(header, rows))


def read_csv(path):
    """(header, rows of floats) from a table written by ``write_csv``."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ValueError(f"{path} is empty")
    header = tuple(text[0].split(","))
    rows = [tuple(float(c) for c in line.split(",")) for line in text[1:] if line]
    return header, rows


def write_text(path, text: str) -> Path:
    return write_atomic(path, text.encode("utf-8"))
