"""Field-dump file formats: 17-digit CSV and a fixed little-endian
binary layout, both written atomically (temp file plus rename).

Binary layout: magic "CAMF", version u32, site count u64, time f64,
then per-site records of (x, y, re, im) as f64; 24 + 32*N bytes total.
CSV: a `# time = ...` comment, a `x,y,re,im,prob` header, then one row
per site. Rows are ordered by ascending site id; readers assign
positional ids.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import CamcloakError, DumpFormatError
from .experiments import FieldDump

MAGIC = b"CAMF"
VERSION = 1
_HEADER = struct.Struct("<4sIQd")
_RECORD_BYTES = 32


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _require_amplitudes(dump: FieldDump) -> np.ndarray:
    if dump.amplitudes is None:
        raise CamcloakError("dump carries no amplitudes to serialize")
    return np.asarray(dump.amplitudes, dtype=np.complex128)


def write_dump(dump: FieldDump, fmt: str, path: str | Path) -> None:
    """Serialize a dump as `csv` or `binary`; nothing partial is left on
    disk if the write fails."""
    path = Path(path)
    amp = _require_amplitudes(dump)
    if fmt == "binary":
        n = amp.size
        table = np.empty((n, 4), dtype="<f8")
        table[:, 0] = dump.positions[:, 0]
        table[:, 1] = dump.positions[:, 1]
        table[:, 2] = amp.real
        table[:, 3] = amp.imag
        data = _HEADER.pack(MAGIC, VERSION, n, dump.time) + table.tobytes()
        _atomic_write(path, data)
    elif fmt == "csv":
        lines = [f"# time = {dump.time:.17g}", "x,y,re,im,prob"]
        for (x, y), a, p in zip(dump.positions, amp, dump.prob):
            lines.append(f"{x:.17g},{y:.17g},{a.real:.17g},"
                         f"{a.imag:.17g},{p:.17g}")
        _atomic_write(path, ("\n".join(lines) + "\n").encode("ascii"))
    else:
        raise CamcloakError(f"unknown dump format {fmt!r}")


def read_dump(path: str | Path) -> FieldDump:
    """Load a dump written by :func:`write_dump`; the format is sniffed
    from the leading bytes."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
        fh.seek(0)
        raw = fh.read()
    if head == MAGIC:
        return _read_binary(raw, path)
    return _read_csv(raw, path)


def _read_binary(raw: bytes, path: Path) -> FieldDump:
    if len(raw) < _HEADER.size:
        raise DumpFormatError(f"{path}: truncated header")
    magic, version, n, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DumpFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DumpFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + _RECORD_BYTES * n
    if len(raw) != expected:
        raise DumpFormatError(
            f"{path}: expected {expected} bytes for {n} sites, got {len(raw)}")
    table = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, 4)
    amp = table[:, 2] + 1j * table[:, 3]
    return FieldDump(time=time, site_ids=np.arange(n, dtype=np.int64),
                     positions=table[:, :2].astype(np.float64),
                     prob=np.abs(amp) ** 2, amplitudes=amp)


def _read_csv(raw: bytes, path: Path) -> FieldDump:
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise DumpFormatError(
            f"{path}: neither a CAMF binary nor a text dump") from exc
    time = None
    rows = []
    saw_header = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("time"):
                try:
                    time = float(body.split("=", 1)[1])
                except (IndexError, ValueError) as exc:
                    raise DumpFormatError(
                        f"{path}:{lineno}: malformed time comment") from exc
            continue
        if not saw_header:
            if line != "x,y,re,im,prob":
                raise DumpFormatError(
                    f"{path}:{lineno}: expected header `x,y,re,im,prob`")
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise DumpFormatError(f"{path}:{lineno}: expected 5 columns")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise DumpFormatError(
                f"{path}:{lineno}: non-numeric value") from exc
    if time is None:
        raise DumpFormatError(f"{path}: missing `# time = ...` line")
    if not saw_header:
        raise DumpFormatError(f"{path}: missing column header")
    table = np.asarray(rows, dtype=np.float64).reshape(-1, 5)
    amp = table[:, 2] + 1j * table[:, 3]
    return FieldDump(time=time,
                     site_ids=np.arange(table.shape[0], dtype=np.int64),
                     positions=table[:, :2].copy(),
                     prob=table[:, 4].copy(), amplitudes=amp)


def dump_filename(index: int, fmt: str) -> str:
    ext = "camf" if fmt == "binary" else "csv"
    return f"dump_{index:06d}.{ext}"


def read_dump_directory(directory: str | Path) -> list[FieldDump]:
    """Load every dump file in a directory, ordered by filename."""
    directory = Path(directory)
    files = sorted(p for p in directory.iterdir()
                   if p.name.startswith("dump_")
                   and p.suffix in (".csv", ".camf"))
    if not files:
        raise DumpFormatError(f"no dump files found in {directory}")
    return [read_dump(p) for p in files]
