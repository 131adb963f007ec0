"""Deterministic file output: atomic writes, PGM images, CSV tables and
float32 field dumps with text headers.

Every writer goes through an atomic temp-file + rename so a crashed run
never leaves a half-written artifact, and every format is byte-stable for
a given input (fixed float repr, fixed line endings) so repeated runs
diff clean.
"""

from __future__ import annotations

import csv
import io
import os

import numpy as np

from .errors import DomainError

FIELD_MAGIC = "statorlab-field 1"


def atomic_write_bytes(path, data: bytes):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_csv(path, header, rows):
    """RFC-4180-style CSV: comma separated, CRLF, one header row."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(c) for c in row])
    atomic_write_bytes(path, buf.getvalue().encode("utf-8"))


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def quantize_intensity(intensity: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """8-bit quantization round(i*255); masked-out samples map to 0.

    Zeroing invalid pixels is a property of the export format only; the
    in-memory objects keep the validity mask.
    """
    img = np.zeros(intensity.shape, dtype=np.uint8)
    img[mask] = np.rint(np.clip(intensity[mask], 0.0, 1.0) * 255.0).astype(np.uint8)
    return img


def write_pgm(path, intensity: np.ndarray, mask: np.ndarray):
    """Binary PGM (P5, maxval 255) of an intensity map in [0, 1]."""
    if intensity.ndim == 1:
        intensity = intensity[None, :]
        mask = mask[None, :]
    if intensity.ndim != 2:
        raise DomainError(f"PGM export needs a 1-D or 2-D array, got {intensity.ndim}-D")
    img = quantize_intensity(intensity, mask)
    h, w = img.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + img.tobytes())


def phase_to_unit(phase: np.ndarray) -> np.ndarray:
    """Map wrapped phase (-pi, pi] onto [0, 1] for image export."""
    return (phase + np.pi) / (2.0 * np.pi)


def write_field_f32(path, values: np.ndarray, meta: dict):
    """Raw little-endian float32 dump with an ASCII header.

    The header carries the grid metadata (one ``key value`` pair per
    line, taken from the grid's describe() dict plus caller extras) and
    ends with an ``end-header`` line; the payload follows row-major.
    """
    lines = [FIELD_MAGIC]
    for key in sorted(meta):
        value = meta[key]
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} {value}")
    shape = "x".join(str(s) for s in values.shape)
    lines.append(f"shape {shape}")
    lines.append("dtype <f4")
    lines.append("end-header")
    header = ("\n".join(lines) + "\n").encode("ascii")
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    atomic_write_bytes(path, header + payload)


def read_field_f32(path):
    """Inverse of write_field_f32: returns (values, meta dict of strings)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    end = blob.find(b"end-header\n")
    if end < 0 or not blob.startswith(FIELD_MAGIC.encode("ascii")):
        raise DomainError(f"{path}: not a statorlab field dump")
    header = blob[:end].decode("ascii").splitlines()[1:]
    meta = {}
    for line in header:
        key, _, value = line.partition(" ")
        meta[key] = value
    shape = tuple(int(s) for s in meta.pop("shape").split("x"))
    payload = blob[end + len(b"end-header\n"):]
    values = np.frombuffer(payload, dtype="<f4").reshape(shape)
    return values.astype(float), meta
