"""European Data Format reader for ingesting public biosignal recordings.

Only plain uniform-rate EDF is handled: a 256-byte fixed ASCII header,
256 bytes of per-signal header fields, and 16-bit little-endian
two's-complement samples.  EDF+ annotations and the 24-bit BDF variant are
out of scope.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import EXCLUDED, ChannelLayout, Recording, _default_positions


class EdfFormatError(ValueError):
    """File does not follow the EDF byte layout."""


class UnsupportedEdfError(ValueError):
    """Valid EDF using features this reader does not support."""


class DegenerateScalingError(ValueError):
    """Signal with dig_max == dig_min cannot be scaled to physical units."""


def _ascii(raw: bytes, start: int, length: int, what: str) -> str:
    try:
        return raw[start:start + length].decode("ascii")
    except UnicodeDecodeError as exc:
        raise EdfFormatError(f"non-ASCII bytes in {what} at offset {start}") from exc


def _number(raw: bytes, start: int, length: int, what: str, conv=float):
    text = _ascii(raw, start, length, what).strip()
    try:
        return conv(text)
    except ValueError as exc:
        raise EdfFormatError(f"cannot parse {what} field {text!r} at offset {start}") from exc


def _positions_for(labels: list[str]) -> np.ndarray:
    """Standard scalp coordinates where the label is recognized, else a ring."""
    known = {k.upper(): v for k, v in _default_positions().items()}
    n = len(labels)
    out = np.zeros((n, 2))
    for i, lab in enumerate(labels):
        key = lab.upper().removeprefix("EEG ").strip()
        if key in known:
            out[i] = known[key]
        else:
            ang = 2.0 * np.pi * i / max(n, 1)
            out[i] = (0.9 * np.sin(ang), 0.9 * np.cos(ang))
    return out


def parse_edf(path: str | Path) -> Recording:
    """Parse an EDF file into a Recording of physical values.

    Physical values follow the EDF scaling
    ``(digital - dig_min) * (phys_max - phys_min) / (dig_max - dig_min) + phys_min``.

    Raises
    ------
    EdfFormatError
        Wrong magic/version or malformed header fields.
    UnsupportedEdfError
        Signals with differing sampling rates.
    DegenerateScalingError
        A signal whose digital range is empty.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 256:
        raise EdfFormatError(f"{path}: file shorter than the 256-byte EDF header")
    version = _ascii(raw, 0, 8, "version")
    if version.strip() != "0":
        raise EdfFormatError(f"{path}: not EDF (version field {version!r})")
    n_records = _number(raw, 236, 8, "number of data records", int)
    record_dur = _number(raw, 244, 8, "record duration")
    ns = _number(raw, 252, 4, "signal count", int)
    if ns <= 0:
        raise EdfFormatError(f"{path}: non-positive signal count {ns}")
    header_len = 256 * (ns + 1)
    if len(raw) < header_len:
        raise EdfFormatError(f"{path}: truncated signal headers "
                             f"(need {header_len} bytes, have {len(raw)})")

    def field(width: int, base: int, conv=None):
        vals = []
        for i in range(ns):
            start = base + i * width
            if conv is None:
                vals.append(_ascii(raw, start, width, "signal header").strip())
            else:
                vals.append(_number(raw, start, width, "signal header", conv))
        return vals

    base = 256
    labels = field(16, base); base += 16 * ns
    base += 80 * ns  # transducer
    base += 8 * ns   # physical dimension
    phys_min = field(8, base, float); base += 8 * ns
    phys_max = field(8, base, float); base += 8 * ns
    dig_min = field(8, base, int); base += 8 * ns
    dig_max = field(8, base, int); base += 8 * ns
    base += 80 * ns  # prefiltering
    spr = field(8, base, int); base += 8 * ns
    base += 32 * ns  # reserved

    if record_dur <= 0:
        raise EdfFormatError(f"{path}: non-positive record duration {record_dur}")
    rates = [n / record_dur for n in spr]
    if len(set(rates)) != 1:
        raise UnsupportedEdfError(
            f"{path}: mixed sampling rates {sorted(set(rates))}; uniform-rate EDF required")
    for i in range(ns):
        if dig_max[i] == dig_min[i]:
            raise DegenerateScalingError(
                f"{path}: signal {i} ({labels[i]!r}) has dig_max == dig_min == {dig_min[i]}")

    per_record = sum(spr)
    expected = header_len + 2 * per_record * n_records
    if len(raw) < expected:
        raise EdfFormatError(f"{path}: truncated data records "
                             f"(need {expected} bytes, have {len(raw)})")
    digital = np.frombuffer(raw, dtype="<i2", count=per_record * n_records, offset=header_len)
    digital = digital.reshape(n_records, per_record)

    gains = [(phys_max[i] - phys_min[i]) / (dig_max[i] - dig_min[i]) for i in range(ns)]
    samples = np.empty((ns, spr[0] * n_records), dtype=np.float64)
    col = 0
    for i in range(ns):
        block = digital[:, col:col + spr[i]].reshape(-1).astype(np.float64)
        samples[i] = (block - dig_min[i]) * gains[i] + phys_min[i]
        col += spr[i]

    layout = ChannelLayout(names=tuple(labels), positions_2d=_positions_for(labels),
                           grid_index=tuple(EXCLUDED for _ in labels))
    return Recording(layout=layout, sample_rate=rates[0], samples=samples, t0=0.0)


def write_edf(path: str | Path, labels: list[str], digital: np.ndarray,
              sample_rate: float, phys_min: float = -100.0, phys_max: float = 100.0,
              dig_min: int = -32768, dig_max: int = 32767,
              record_duration_s: float = 1.0) -> None:
    """Write a minimal uniform-rate EDF file from int16 digital values.

    ``digital`` is signals x samples; the sample count must fill whole data
    records.  Intended for building fixtures and exporting synthetic data.
    """
    digital = np.asarray(digital)
    if digital.dtype != np.int16:
        raise ValueError(f"digital values must be int16, got {digital.dtype}")
    ns, total = digital.shape
    if ns != len(labels):
        raise ValueError(f"{len(labels)} labels for {ns} signal rows")
    spr = int(round(sample_rate * record_duration_s))
    if spr <= 0 or total % spr:
        raise ValueError(f"{total} samples do not fill whole records of {spr}")
    n_records = total // spr

    def pad(text: str, width: int) -> bytes:
        b = text.encode("ascii")
        if len(b) > width:
            raise ValueError(f"field {text!r} longer than {width} bytes")
        return b.ljust(width)

    header = b"".join([
        pad("0", 8), pad("synthetic", 80), pad("peds test writer", 80),
        pad("01.01.00", 8), pad("00.00.00", 8),
        pad(str(256 * (ns + 1)), 8), pad("", 44),
        pad(str(n_records), 8), pad(f"{record_duration_s:g}", 8), pad(str(ns), 4),
    ])
    sig = b"".join([
        b"".join(pad(lab, 16) for lab in labels),
        b"".join(pad("", 80) for _ in labels),
        b"".join(pad("uV", 8) for _ in labels),
        b"".join(pad(f"{phys_min:g}", 8) for _ in labels),
        b"".join(pad(f"{phys_max:g}", 8) for _ in labels),
        b"".join(pad(str(dig_min), 8) for _ in labels),
        b"".join(pad(str(dig_max), 8) for _ in labels),
        b"".join(pad("", 80) for _ in labels),
        b"".join(pad(str(spr), 8) for _ in labels),
        b"".join(pad("", 32) for _ in labels),
    ])
    records = digital.reshape(ns, n_records, spr).transpose(1, 0, 2)
    with open(path, "wb") as f:
        f.write(header)
        f.write(sig)
        f.write(np.ascontiguousarray(records, dtype="<i2").tobytes())
