"""File formats: the native recording container, epoch archives, and event CSVs.

Recording container layout::

    magic   "PEDS-EEG\\0"                         9 bytes
    version u32 little-endian                     4 bytes
    hlen    u32 little-endian                     4 bytes
    header  UTF-8 JSON                            hlen bytes
    data    channel-major float32 little-endian   4 * n_channels * n_samples bytes

The JSON header carries channel names, positions, the grid map,
``sample_rate_hz``, ``t0_s`` and ``n_samples``.  Identical recordings always
produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .core import (EXCLUDED, ChannelLayout, Epoch, EpochSet, EventAnnotation,
                   Recording, RiskClass)

MAGIC = b"PEDS-EEG\0"
EPOCH_MAGIC = b"PEDS-EPO\0"
VERSION = 1


class FormatError(ValueError):
    """Malformed file structure; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class IntegrityError(ValueError):
    """Structurally valid file whose declared and actual contents disagree."""


def _layout_to_json(layout: ChannelLayout) -> dict:
    return {
        "channel_names": list(layout.names),
        "positions_2d": [[float(x), float(y)] for x, y in layout.positions_2d],
        "grid_map": [None if g == EXCLUDED else [g[0], g[1]] for g in layout.grid_index],
    }


def _layout_from_json(doc: dict) -> ChannelLayout:
    grid = tuple(EXCLUDED if g is None else (g[0], g[1]) for g in doc["grid_map"])
    return ChannelLayout(names=tuple(doc["channel_names"]),
                         positions_2d=np.asarray(doc["positions_2d"], dtype=float),
                         grid_index=grid)


def _dump_header(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_container(recording: Recording, path: str | Path) -> None:
    """Write a Recording; identical input yields identical file bytes."""
    header = _layout_to_json(recording.layout)
    header.update({
        "sample_rate_hz": recording.sample_rate,
        "t0_s": recording.t0,
        "n_samples": recording.n_samples,
    })
    hbytes = _dump_header(header)
    data = np.ascontiguousarray(recording.samples, dtype="<f4")
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<II", VERSION, len(hbytes)))
            f.write(hbytes)
            f.write(data.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write container {path}: {exc}") from exc


def read_container(path: str | Path) -> Recording:
    """Read a Recording written by :func:`write_container`."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 8:
        raise FormatError(f"{path}: file too short for a container header", offset=0)
    if raw[:len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:len(MAGIC)]!r}", offset=0)
    off = len(MAGIC)
    version, hlen = struct.unpack_from("<II", raw, off)
    off += 8
    if version != VERSION:
        raise FormatError(f"{path}: unsupported container version {version}", offset=len(MAGIC))
    if off + hlen > len(raw):
        raise FormatError(f"{path}: declared header length {hlen} exceeds file size", offset=off)
    try:
        header = json.loads(raw[off:off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON: {exc}", offset=off) from exc
    off += hlen
    layout = _layout_from_json(header)
    n_samples = int(header["n_samples"])
    n_channels = layout.n_channels
    expected = 4 * n_channels * n_samples
    actual = len(raw) - off
    if actual != expected:
        raise IntegrityError(
            f"{path}: header declares {n_channels} channels x {n_samples} samples "
            f"({expected} data bytes) but file holds {actual}")
    data = np.frombuffer(raw, dtype="<f4", count=n_channels * n_samples, offset=off)
    samples = data.reshape(n_channels, n_samples).astype(np.float64)
    return Recording(layout=layout, sample_rate=float(header["sample_rate_hz"]),
                     samples=samples, t0=float(header["t0_s"]))


_RISK_TAGS = {r.value: r for r in RiskClass}


def write_epochs(epochset: EpochSet, path: str | Path) -> None:
    """Write an EpochSet archive (same container discipline, float32 payload)."""
    if len(epochset) == 0:
        raise ValueError("refusing to write an empty epoch set")
    window = epochset.window
    header = _layout_to_json(epochset.layout)
    header.update({
        "sample_rate_hz": epochset.sample_rate,
        "window_s": [window[0], window[1]],
        "n_epochs": len(epochset),
        "n_samples": epochset[0].n_samples,
        "events": [{"event_id": ep.source_event.event_id,
                    "onset_s": ep.source_event.onset_s,
                    "meta": ep.source_event.meta,
                    "risk": ep.risk.value} for ep in epochset],
    })
    hbytes = _dump_header(header)
    data = np.ascontiguousarray(epochset.data_array(), dtype="<f4")
    with open(path, "wb") as f:
        f.write(EPOCH_MAGIC)
        f.write(struct.pack("<II", VERSION, len(hbytes)))
        f.write(hbytes)
        f.write(data.tobytes())


def read_epochs(path: str | Path) -> EpochSet:
    raw = Path(path).read_bytes()
    if len(raw) < len(EPOCH_MAGIC) + 8 or raw[:len(EPOCH_MAGIC)] != EPOCH_MAGIC:
        raise FormatError(f"{path}: not an epoch archive", offset=0)
    off = len(EPOCH_MAGIC)
    version, hlen = struct.unpack_from("<II", raw, off)
    off += 8
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}", offset=len(EPOCH_MAGIC))
    header = json.loads(raw[off:off + hlen].decode("utf-8"))
    off += hlen
    layout = _layout_from_json(header)
    n_epochs = int(header["n_epochs"])
    n_samples = int(header["n_samples"])
    nch = layout.n_channels
    expected = 4 * n_epochs * nch * n_samples
    if len(raw) - off != expected:
        raise IntegrityError(f"{path}: payload size mismatch "
                             f"(expected {expected} bytes, found {len(raw) - off})")
    cube = np.frombuffer(raw, dtype="<f4", count=n_epochs * nch * n_samples,
                         offset=off).reshape(n_epochs, nch, n_samples).astype(np.float64)
    window = (float(header["window_s"][0]), float(header["window_s"][1]))
    rate = float(header["sample_rate_hz"])
    epochs = []
    for i, ev in enumerate(header["events"]):
        ann = EventAnnotation(event_id=int(ev["event_id"]), onset_s=float(ev["onset_s"]),
                              meta=str(ev.get("meta", "")))
        epochs.append(Epoch(data=cube[i], sample_rate=rate, window=window,
                            source_event=ann, risk=_RISK_TAGS[ev["risk"]]))
    return EpochSet(epochs=tuple(epochs), layout=layout, sample_rate=rate)


def write_events_csv(events: list[EventAnnotation], path: str | Path) -> None:
    """Event file: UTF-8 CSV ``event_id,onset_s,meta`` with a header row."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["event_id", "onset_s", "meta"])
        for ev in events:
            w.writerow([ev.event_id, repr(ev.onset_s), ev.meta])


def read_events_csv(path: str | Path) -> list[EventAnnotation]:
    events = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        head = next(reader, None)
        if head is None or [c.strip() for c in head[:2]] != ["event_id", "onset_s"]:
            raise FormatError(f"{path}: expected header row 'event_id,onset_s,meta'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                events.append(EventAnnotation(event_id=int(row[0]), onset_s=float(row[1]),
                                              meta=row[2] if len(row) > 2 else ""))
            except (ValueError, IndexError) as exc:
                raise FormatError(f"{path}:{lineno}: bad event row {row!r}: {exc}") from exc
    return events
