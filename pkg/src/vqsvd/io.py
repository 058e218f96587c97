"""Text formats for matrices and LCUs, PGM images and atomic file writes.

Matrix files::

    rows cols real|complex
    a00 a01 ...            # row-major tokens, complex tokens as ``re,im``

LCU files::

    n_qubits K
    re,im LABEL            # Pauli string, e.g. ``0.5,0 XZ``
    re,im PERM k           # cyclic shift sending e_i to e_{i+k}
"""

import os
import tempfile
from pathlib import Path

import numpy as np

from .pauli import CyclicShift, LcuDecomposition, PauliString


class FormatError(ValueError):
    """Malformed input file; ``str()`` names the file and line."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        self.message = message
        super().__init__(f"{self.path}:{line}: {message}")


def atomic_write_bytes(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def _fmt(x):
    return format(float(x), ".17g")


def _tokens(path, lines):
    """Yield ``(line_number, token)`` for the non-empty lines after the header."""
    for lineno, line in lines:
        for tok in line.split():
            yield lineno, tok


def _numbered_lines(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(path, 0, f"not UTF-8 text ({exc.reason})") from None
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            out.append((i, stripped))
    return out


def format_matrix(m):
    m = np.asarray(m)
    complex_field = np.iscomplexobj(m) and bool(np.any(m.imag != 0))
    rows, cols = m.shape
    out = [f"{rows} {cols} {'complex' if complex_field else 'real'}"]
    for r in range(rows):
        if complex_field:
            toks = [f"{_fmt(z.real)},{_fmt(z.imag)}" for z in m[r]]
        else:
            toks = [_fmt(np.real(z)) for z in m[r]]
        out.append(" ".join(toks))
    return "\n".join(out) + "\n"


def write_matrix(path, m):
    atomic_write_text(path, format_matrix(m))


def _parse_number(path, lineno, tok):
    try:
        return float(tok)
    except ValueError:
        raise FormatError(path, lineno, f"bad number {tok!r}") from None


def read_matrix(path):
    lines = _numbered_lines(path)
    if not lines:
        raise FormatError(path, 1, "empty file, expected 'rows cols field' header")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[2] not in ("real", "complex"):
        raise FormatError(path, lineno, "header must be 'rows cols real|complex'")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(path, lineno, "rows and cols must be integers") from None
    if rows < 1 or cols < 1:
        raise FormatError(path, lineno, "rows and cols must be positive")
    is_complex = parts[2] == "complex"
    values = []
    last = lineno
    for lineno, tok in _tokens(path, lines[1:]):
        last = lineno
        if is_complex:
            pieces = tok.split(",")
            if len(pieces) != 2:
                raise FormatError(path, lineno, f"complex token {tok!r} is not 're,im'")
            values.append(complex(_parse_number(path, lineno, pieces[0]),
                                  _parse_number(path, lineno, pieces[1])))
        else:
            if "," in tok:
                raise FormatError(path, lineno, f"complex token {tok!r} in a real matrix")
            values.append(_parse_number(path, lineno, tok))
    if len(values) != rows * cols:
        raise FormatError(path, last, f"expected {rows * cols} entries, found {len(values)}")
    arr = np.array(values, dtype=complex if is_complex else float).reshape(rows, cols)
    if not np.all(np.isfinite(arr)):
        raise FormatError(path, 1, "matrix contains non-finite entries")
    return arr


def format_lcu(lcu):
    lines = [f"{lcu.n_qubits} {len(lcu)}"]
    for c, u in lcu.terms:
        coeff = f"{_fmt(c.real)},{_fmt(c.imag)}"
        if isinstance(u, (PauliString, CyclicShift)):
            lines.append(f"{coeff} {u}")
        else:
            raise ValueError("explicit matrix terms cannot be written to an LCU file")
    return "\n".join(lines) + "\n"


def write_lcu(path, lcu):
    atomic_write_text(path, format_lcu(lcu))


def read_lcu(path):
    lines = _numbered_lines(path)
    if not lines:
        raise FormatError(path, 1, "empty file, expected 'n_qubits K' header")
    lineno, header = lines[0]
    parts = header.split()
    try:
        n_qubits, count = int(parts[0]), int(parts[1])
        if len(parts) != 2 or n_qubits < 0 or count < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise FormatError(path, lineno, "header must be 'n_qubits K'") from None
    dim = 2**n_qubits
    body = lines[1:]
    if len(body) != count:
        last = body[-1][0] if body else lineno
        raise FormatError(path, last, f"expected {count} terms, found {len(body)}")
    terms = []
    for lineno, line in body:
        parts = line.split()
        pieces = parts[0].split(",") if parts else []
        if len(pieces) != 2:
            raise FormatError(path, lineno, "coefficient must be 're,im'")
        c = complex(_parse_number(path, lineno, pieces[0]), _parse_number(path, lineno, pieces[1]))
        if len(parts) == 2:
            label = parts[1]
            if len(label) != n_qubits or set(label) - set("IXYZ"):
                raise FormatError(path, lineno, f"bad Pauli label {label!r} for {n_qubits} qubits")
            terms.append((c, PauliString(label)))
        elif len(parts) == 3 and parts[1] == "PERM":
            try:
                k = int(parts[2])
            except ValueError:
                raise FormatError(path, lineno, f"bad shift {parts[2]!r}") from None
            terms.append((c, CyclicShift(k % dim, dim)))
        else:
            raise FormatError(path, lineno, "expected 're,im LABEL' or 're,im PERM k'")
    return LcuDecomposition(terms, dim)


# ---------------------------------------------------------------------------
# PGM


def read_pgm(path):
    """Read a P2 or P5 greyscale image; returns ``(pixels, maxval)``."""
    data = Path(path).read_bytes()
    pos = 0
    header = []

    def next_token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos:pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        return data[start:pos].decode("ascii", "replace")

    def line_of(offset):
        # at end of input, blame the last line that has content
        offset = min(offset, len(data.rstrip()))
        return data.count(b"\n", 0, offset) + 1

    for _ in range(4):
        tok = next_token()
        if not tok:
            raise FormatError(path, line_of(pos), "truncated PGM header")
        header.append(tok)
    magic = header[0]
    if magic not in ("P2", "P5"):
        raise FormatError(path, 1, f"unsupported magic {magic!r}; expected P2 or P5")
    try:
        width, height, maxval = (int(x) for x in header[1:])
    except ValueError:
        raise FormatError(path, line_of(pos), "width, height and maxval must be integers") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(path, line_of(pos), "invalid PGM dimensions or maxval")
    count = width * height
    if magic == "P5":
        pos += 1  # single whitespace byte before the raster
        itemsize = 1 if maxval < 256 else 2
        raw = data[pos:pos + count * itemsize]
        if len(raw) != count * itemsize:
            raise FormatError(path, line_of(len(data)), "truncated PGM raster")
        pixels = np.frombuffer(raw, dtype=np.uint8 if itemsize == 1 else ">u2").astype(int)
    else:
        vals = []
        for _ in range(count):
            tok = next_token()
            if not tok:
                raise FormatError(path, line_of(pos), f"expected {count} pixels, found {len(vals)}")
            try:
                vals.append(int(tok))
            except ValueError:
                raise FormatError(path, line_of(pos), f"bad pixel value {tok!r}") from None
        pixels = np.array(vals, dtype=int)
    if np.any(pixels > maxval) or np.any(pixels < 0):
        raise FormatError(path, 1, "pixel value outside [0, maxval]")
    return pixels.reshape(height, width), maxval


def write_pgm(path, pixels, binary=False):
    """Write 8-bit greyscale (maxval 255)."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValueError("PGM images are 2-D")
    px = np.clip(np.rint(pixels), 0, 255).astype(np.uint8)
    h, w = px.shape
    if binary:
        atomic_write_bytes(path, f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes())
    else:
        rows = "\n".join(" ".join(str(int(v)) for v in row) for row in px)
        atomic_write_text(path, f"P2\n{w} {h}\n255\n{rows}\n")


def image_to_unit(pixels, maxval):
    return np.asarray(pixels, dtype=float) / float(maxval)


def unit_to_image(values):
    return np.clip(np.asarray(values, dtype=float), 0.0, 1.0) * 255.0
