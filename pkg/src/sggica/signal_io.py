"""Readers and writers for delimited matrices, PGM images and PCM16 WAV audio.

Every reader raises SignalIOError (with a line number or byte offset where
possible) on malformed input; none of them lets a low-level exception escape.
"""

import io
import os
import tempfile
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import SignalIOError, UnsupportedFormatError


@dataclass(eq=False)
class SignalMatrix:
    """``data`` is (n samples, d channels)."""

    data: np.ndarray
    channel_names: Optional[List[str]] = None
    sample_rate: Optional[int] = None
    width: Optional[int] = None
    height: Optional[int] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise SignalIOError(f"signal must be a non-empty (n, d) matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise SignalIOError("signal contains non-finite values")
        if self.channel_names is not None and len(self.channel_names) != data.shape[1]:
            raise SignalIOError("channel_names length does not match channel count")
        self.data = data

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def d(self):
        return self.data.shape[1]


def atomic_write(path, payload):
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    mode = "wb" if isinstance(payload, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(payload)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise SignalIOError(f"cannot read file: {exc.strerror or exc}", path=path) from exc


# -- delimited text ---------------------------------------------------------


def _split(line, comma):
    return [cell.strip() for cell in line.split(",")] if comma else line.split()


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_matrix_text(text, path=None):
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if not lines:
        raise SignalIOError("no data", path=path)
    comma = "," in lines[0][1]
    first = _split(lines[0][1], comma)
    names = None
    if not all(_is_number(cell) for cell in first):
        names = first
        lines = lines[1:]
        if not lines:
            raise SignalIOError("header without data rows", path=path)
    width = len(names) if names is not None else len(first)
    rows = []
    for lineno, line in lines:
        cells = _split(line, comma)
        if len(cells) != width:
            raise SignalIOError(f"expected {width} columns, found {len(cells)}", path=path, line=lineno)
        try:
            row = [float(cell) for cell in cells]
        except ValueError:
            bad = next(cell for cell in cells if not _is_number(cell))
            raise SignalIOError(f"non-numeric cell {bad!r}", path=path, line=lineno) from None
        if not all(np.isfinite(row)):
            raise SignalIOError("non-finite value", path=path, line=lineno)
        rows.append(row)
    return SignalMatrix(np.array(rows, dtype=float), channel_names=names)


def read_matrix_csv(path):
    raw = _read_bytes(path)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SignalIOError("file is not UTF-8 text", path=path, offset=exc.start) from None
    return parse_matrix_text(text, path=path)


def format_matrix(data, names=None):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    out = io.StringIO()
    if names:
        out.write(",".join(names) + "\n")
    for row in data:
        out.write(",".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def write_matrix_csv(m, path):
    if not isinstance(m, SignalMatrix):
        m = SignalMatrix(m)
    atomic_write(path, format_matrix(m.data, m.channel_names))


# -- PGM --------------------------------------------------------------------


def _pgm_header(raw, path):
    """Return (magic, width, height, maxval, payload offset)."""
    tokens = []
    pos = 0
    size = len(raw)
    while len(tokens) < 4:
        while pos < size and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < size and raw[pos : pos + 1] == b"#":
            while pos < size and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= size:
            raise SignalIOError("truncated PGM header", path=path, offset=pos)
        start = pos
        while pos < size and not raw[pos : pos + 1].isspace() and raw[pos : pos + 1] != b"#":
            pos += 1
        tokens.append((raw[start:pos], start))
    magic = tokens[0][0]
    if magic not in (b"P2", b"P5"):
        raise SignalIOError(f"bad magic {magic[:8]!r}; expected P2 or P5", path=path, offset=0)
    values = []
    for tok, off in tokens[1:]:
        if not tok.isdigit():
            raise SignalIOError(f"invalid header field {tok[:16]!r}", path=path, offset=off)
        values.append(int(tok))
    width, height, maxval = values
    if width < 1 or height < 1:
        raise SignalIOError("image dimensions must be positive", path=path, offset=tokens[1][1])
    if not 1 <= maxval <= 65535:
        raise SignalIOError(f"maxval {maxval} outside 1..65535", path=path, offset=tokens[3][1])
    if magic == b"P5":
        if pos >= size or not raw[pos : pos + 1].isspace():
            raise SignalIOError("missing whitespace after maxval", path=path, offset=pos)
        pos += 1
    return magic.decode(), width, height, maxval, pos


def read_pgm(path):
    """Read a P2/P5 PGM into a single-column SignalMatrix of values in [0, 1]."""
    raw = _read_bytes(path)
    magic, width, height, maxval, pos = _pgm_header(raw, path)
    count = width * height
    if magic == "P5":
        nbytes = 1 if maxval < 256 else 2
        need = count * nbytes
        if len(raw) - pos < need:
            raise SignalIOError(
                f"truncated payload: need {need} bytes, found {len(raw) - pos}", path=path, offset=len(raw)
            )
        dtype = np.uint8 if nbytes == 1 else np.dtype(">u2")
        pixels = np.frombuffer(raw, dtype=dtype, count=count, offset=pos).astype(float)
    else:
        try:
            fields = raw[pos:].decode("ascii").split()
        except UnicodeDecodeError as exc:
            raise SignalIOError("non-ASCII byte in P2 payload", path=path, offset=pos + exc.start) from None
        if len(fields) < count:
            raise SignalIOError(f"truncated payload: need {count} values, found {len(fields)}", path=path)
        if not all(f.isdigit() for f in fields[:count]):
            raise SignalIOError("non-integer pixel value", path=path)
        pixels = np.array([int(f) for f in fields[:count]], dtype=float)
    if np.any(pixels > maxval):
        raise SignalIOError("pixel value exceeds maxval", path=path)
    return SignalMatrix(pixels / maxval, width=width, height=height)


def quantize_8bit(values):
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    return np.floor(v * 255.0 + 0.5).astype(np.uint8)


def write_pgm(m, width, height, path, ascii=False):
    """Write one channel as an 8-bit PGM; values are clamped to [0, 1] first."""
    data = m.data if isinstance(m, SignalMatrix) else np.asarray(m, dtype=float)
    data = np.asarray(data, dtype=float).reshape(-1, 1) if data.ndim == 1 else data
    if data.shape[1] != 1:
        raise SignalIOError(f"PGM holds one channel, got {data.shape[1]}")
    if data.shape[0] != width * height:
        raise SignalIOError(f"{data.shape[0]} pixels do not fit {width}x{height}")
    pix = quantize_8bit(data[:, 0])
    if ascii:
        body = "\n".join(" ".join(str(int(v)) for v in pix[r * width : (r + 1) * width]) for r in range(height))
        atomic_write(path, f"P2\n{width} {height}\n255\n{body}\n".encode("ascii"))
    else:
        atomic_write(path, f"P5\n{width} {height}\n255\n".encode("ascii") + pix.tobytes())


# -- WAV --------------------------------------------------------------------


def read_wav(path):
    """Read 16-bit PCM WAV; samples scaled to [-1, 1) by 1/32768."""
    raw = _read_bytes(path)
    try:
        with wave.open(io.BytesIO(raw), "rb") as wf:
            if wf.getcomptype() != "NONE":
                raise UnsupportedFormatError(f"compressed WAV ({wf.getcomptype()})", path=path)
            width = wf.getsampwidth()
            channels = wf.getnchannels()
            rate = wf.getframerate()
            frames = wf.readframes(wf.getnframes())
    except SignalIOError:
        raise
    except wave.Error as exc:
        msg = str(exc)
        if "unknown format" in msg:
            raise UnsupportedFormatError(f"non-PCM WAV ({msg})", path=path) from None
        raise SignalIOError(f"malformed WAV: {msg}", path=path) from None
    except Exception as exc:  # struct.error, EOFError and friends from the wave module
        raise SignalIOError(f"malformed WAV: {type(exc).__name__}: {exc}", path=path) from None
    if width != 2:
        raise UnsupportedFormatError(f"{8 * width}-bit samples; only 16-bit PCM is supported", path=path)
    if channels < 1:
        raise SignalIOError("WAV declares no channels", path=path)
    usable = len(frames) // (2 * channels) * (2 * channels)
    samples = np.frombuffer(frames[:usable], dtype="<i2").astype(float) / 32768.0
    if samples.size == 0:
        raise SignalIOError("WAV contains no samples", path=path)
    return SignalMatrix(samples.reshape(-1, channels), sample_rate=rate)


def write_wav(m, sample_rate, path):
    data = m.data if isinstance(m, SignalMatrix) else np.asarray(m, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2 or data.size == 0:
        raise SignalIOError(f"WAV data must be a non-empty (n, d) matrix, got shape {data.shape}")
    q = np.clip(np.round(data * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(data.shape[1])
        wf.setsampwidth(2)
        wf.setframerate(int(sample_rate))
        wf.writeframes(q.tobytes())
    atomic_write(path, buf.getvalue())
