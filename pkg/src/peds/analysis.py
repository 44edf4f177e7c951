"""Exploratory analyses: topographic map series and peak-latency summaries.

Outputs are data (CSV/JSON); rendering lives in the report command.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ChannelLayout, Epoch, EpochSet

CLAMP_UV = 6.0
GRID_SIZE = 64
IDW_NEIGHBORS = 4
IDW_POWER = 2

# Analysis windows: pre-event peaks fall in [-2.5, -1.0] s and post-event
# peaks between 0 and 0.7 s.
PRE_EVENT_LATENCY_WINDOW = (-2.5, -1.0)
POST_EVENT_LATENCY_WINDOW = (0.0, 0.7)


@dataclass(frozen=True)
class TopomapFrame:
    """Scalar field over the unit head disc at one time point.

    Cells outside the disc are NaN; values are clamped to +-CLAMP_UV.
    """

    t_s: float
    grid: np.ndarray
    clamp: tuple[float, float] = (-CLAMP_UV, CLAMP_UV)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)


def _disc_coordinates(size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    axis = np.linspace(-1.0, 1.0, size)
    gx, gy = np.meshgrid(axis, axis)
    inside = gx**2 + gy**2 <= 1.0
    return gx, gy, inside


def interpolate_scalp(values: np.ndarray, layout: ChannelLayout,
                      size: int = GRID_SIZE,
                      clamp: float = CLAMP_UV) -> np.ndarray:
    """Inverse-distance interpolation of channel values onto the head disc.

    Exact at electrode positions (before clamping); power-2 weights over the
    four nearest electrodes.
    """
    gx, gy, inside = _disc_coordinates(size)
    pos = layout.positions_2d
    pts = np.stack([gx[inside], gy[inside]], axis=1)
    d2 = ((pts[:, None, :] - pos[None, :, :])**2).sum(axis=2)
    k = min(IDW_NEIGHBORS, pos.shape[0])
    nearest = np.argpartition(d2, k - 1, axis=1)[:, :k]
    nd2 = np.take_along_axis(d2, nearest, axis=1)
    w = 1.0 / np.maximum(nd2, 1e-30) ** (IDW_POWER / 2)
    exact = nd2[:, 0] < 1e-18
    w /= w.sum(axis=1, keepdims=True)
    vals = (w * values[nearest]).sum(axis=1)
    vals[exact] = values[nearest[exact, 0]]
    out = np.full(gx.shape, np.nan)
    out[inside] = np.clip(vals, -clamp, clamp)
    return out


def topomap_series(erp: Epoch, layout: ChannelLayout, step_s: float = 0.050,
                   t_range: tuple[float, float] = (-2.0, 2.0),
                   size: int = GRID_SIZE) -> list[TopomapFrame]:
    """One interpolated frame per ``step_s`` over ``t_range`` (inclusive)."""
    w0, w1 = erp.window
    if t_range[0] < w0 - 1e-9 or t_range[1] > w1 + 1e-9:
        raise ValueError(f"range {t_range} outside epoch window {erp.window}")
    n_frames = int(round((t_range[1] - t_range[0]) / step_s)) + 1
    frames = []
    for i in range(n_frames):
        t = t_range[0] + i * step_s
        idx = int(round((t - w0) * erp.sample_rate))
        idx = min(max(idx, 0), erp.n_samples - 1)
        grid = interpolate_scalp(erp.data[:, idx], layout, size=size)
        frames.append(TopomapFrame(t_s=t, grid=grid))
    return frames


@dataclass(frozen=True)
class LatencySummary:
    """Per-epoch peak times on one channel within an analysis window."""

    channel: str
    window: tuple[float, float]
    latencies: np.ndarray
    quartiles: tuple[float, float, float]
    density_x: np.ndarray
    density_y: np.ndarray

    def __post_init__(self):
        lat = np.asarray(self.latencies, dtype=float)
        lat.flags.writeable = False
        object.__setattr__(self, "latencies", lat)


def peak_latency(epochs: EpochSet, channel: str,
                 window: tuple[float, float],
                 polarity: str = "abs") -> LatencySummary:
    """Per-epoch time of the extreme amplitude of ``channel`` in ``window``.

    ``polarity`` is ``"abs"`` (maximum absolute value) or ``"pos"``
    (signed maximum).
    """
    if len(epochs) == 0:
        raise ValueError("empty epoch set")
    if polarity not in ("abs", "pos"):
        raise ValueError(f"polarity must be 'abs' or 'pos', got {polarity!r}")
    ch = epochs.layout.index_of(channel)
    w0, w1 = epochs.window
    if window[0] < w0 - 1e-9 or window[1] > w1 + 1e-9:
        raise ValueError(f"analysis window {window} outside epoch window {epochs.window}")
    rate = epochs.sample_rate
    i0 = int(round((window[0] - w0) * rate))
    i1 = int(round((window[1] - w0) * rate))
    lats = []
    for ep in epochs:
        seg = ep.data[ch, i0:i1]
        score = np.abs(seg) if polarity == "abs" else seg
        lats.append(window[0] + np.argmax(score) / rate)
    lats = np.asarray(lats)
    q1, q2, q3 = np.percentile(lats, [25, 50, 75])
    gx, gy = _kde(lats, window)
    return LatencySummary(channel=channel, window=(float(window[0]), float(window[1])),
                          latencies=lats, quartiles=(float(q1), float(q2), float(q3)),
                          density_x=gx, density_y=gy)


def _kde(samples: np.ndarray, window: tuple[float, float],
         n_points: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian kernel density over the window for violin rendering."""
    x = np.linspace(window[0], window[1], n_points)
    n = samples.size
    sd = samples.std()
    if n < 2 or sd < 1e-12:
        y = np.zeros_like(x)
        center = samples.mean() if n else 0.5 * (window[0] + window[1])
        y[np.argmin(np.abs(x - center))] = 1.0
        return x, y
    bw = 1.06 * sd * n ** (-0.2)
    z = (x[:, None] - samples[None, :]) / bw
    y = np.exp(-0.5 * z**2).sum(axis=1) / (n * bw * np.sqrt(2.0 * np.pi))
    return x, y


def export_topomaps(frames: list[TopomapFrame], out_dir: str | Path) -> dict:
    """Write one ``row,col,value`` CSV per frame plus an index JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = {"format": "peds-topomap-index", "version": 1, "frames": []}
    for i, frame in enumerate(frames):
        name = f"frame_{i:04d}.csv"
        with open(out / name, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["row", "col", "value"])
            rows, cols = np.nonzero(~np.isnan(frame.grid))
            for r, c in zip(rows, cols):
                w.writerow([int(r), int(c), repr(float(frame.grid[r, c]))])
        index["frames"].append({"file": name, "t_s": frame.t_s,
                                "clamp_uv": list(frame.clamp),
                                "grid_size": list(frame.grid.shape)})
    index_path = out / "index.json"
    index_path.write_text(json.dumps(index, indent=2, sort_keys=True), encoding="utf-8")
    return index


def export_latency(summary: LatencySummary, path: str | Path) -> None:
    """Latency JSON: raw latencies, quartiles, and violin density samples."""
    doc = {
        "format": "peds-latency", "version": 1,
        "channel": summary.channel,
        "window_s": list(summary.window),
        "latencies_s": [float(v) for v in summary.latencies],
        "quartiles_s": list(summary.quartiles),
        "density": {"x": [float(v) for v in summary.density_x],
                    "y": [float(v) for v in summary.density_y]},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")
