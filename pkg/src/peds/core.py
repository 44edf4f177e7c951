"""Core domain types: channel layout, recordings, events, and epochs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

EXCLUDED = "excluded"

# Default 64-channel cap, listed front-to-back.  M1/M2 are the reference
# mastoids; ten channels (references, frontal-pole/anterior-frontal, cerebellar
# and OZ) stay off the 6x9 analysis grid, leaving 54 gridded channels.
DEFAULT_CHANNEL_NAMES = [
    "FP1", "FPZ", "FP2", "AF3", "AF4",
    "F7", "F5", "F3", "F1", "FZ", "F2", "F4", "F6", "F8",
    "FT7", "FC5", "FC3", "FC1", "FCZ", "FC2", "FC4", "FC6", "FT8",
    "T7", "C5", "C3", "C1", "CZ", "C2", "C4", "C6", "T8",
    "M1",
    "TP7", "CP5", "CP3", "CP1", "CPZ", "CP2", "CP4", "CP6", "TP8",
    "M2",
    "P7", "P5", "P3", "P1", "PZ", "P2", "P4", "P6", "P8",
    "PO7", "PO5", "PO3", "POZ", "PO4", "PO6", "PO8",
    "CB1", "O1", "OZ", "O2", "CB2",
]

DEFAULT_OFF_GRID = ["FP1", "FPZ", "FP2", "AF3", "AF4", "M1", "M2", "CB1", "OZ", "CB2"]

GRID_ROWS = 6
GRID_COLS = 9


def _row_positions(y: float, labels: list[str], span: float) -> dict[str, tuple[float, float]]:
    n = len(labels)
    if n == 1:
        return {labels[0]: (0.0, y)}
    xs = np.linspace(-span, span, n)
    return {lab: (float(x), y) for lab, x in zip(labels, xs)}


def _default_positions() -> dict[str, tuple[float, float]]:
    """Schematic scalp projection in normalized head units (y toward nasion)."""
    pos: dict[str, tuple[float, float]] = {}
    pos.update(_row_positions(0.90, ["FP1", "FPZ", "FP2"], 0.28))
    pos.update(_row_positions(0.75, ["AF3", "AF4"], 0.30))
    pos.update(_row_positions(0.55, ["F7", "F5", "F3", "F1", "FZ", "F2", "F4", "F6", "F8"], 0.835))
    pos.update(_row_positions(0.28, ["FT7", "FC5", "FC3", "FC1", "FCZ", "FC2", "FC4", "FC6", "FT8"], 0.96))
    pos.update(_row_positions(0.00, ["T7", "C5", "C3", "C1", "CZ", "C2", "C4", "C6", "T8"], 1.0))
    pos.update(_row_positions(-0.28, ["TP7", "CP5", "CP3", "CP1", "CPZ", "CP2", "CP4", "CP6", "TP8"], 0.96))
    pos.update(_row_positions(-0.55, ["P7", "P5", "P3", "P1", "PZ", "P2", "P4", "P6", "P8"], 0.835))
    pos.update(_row_positions(-0.75, ["PO7", "PO5", "PO3", "POZ", "PO4", "PO6", "PO8"], 0.661))
    pos.update(_row_positions(-0.90, ["O1", "OZ", "O2"], 0.28))
    pos.update(_row_positions(-0.98, ["CB1", "CB2"], 0.40))
    pos["M1"] = (-1.05, -0.10)
    pos["M2"] = (1.05, -0.10)
    return pos


class LayoutError(ValueError):
    """Raised when a channel layout violates its invariants."""


@dataclass(frozen=True)
class ChannelLayout:
    """Ordered channel labels with scalp coordinates and the 6x9 grid map.

    Parameters
    ----------
    names : list of str
        Channel labels, in recording order.
    positions_2d : (n_channels, 2) ndarray
        Normalized head-unit (x, y) scalp projection per channel.
    grid_index : list
        Per channel either an (row, col) tuple into the 6x9 grid or the
        string ``"excluded"``.  Exactly 54 channels must be gridded and the
        assignments must cover all 54 cells.
    """

    names: tuple[str, ...]
    positions_2d: np.ndarray
    grid_index: tuple

    def __post_init__(self):
        pos = np.asarray(self.positions_2d, dtype=float)
        object.__setattr__(self, "positions_2d", pos)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "grid_index", tuple(
            g if g == EXCLUDED else (int(g[0]), int(g[1])) for g in self.grid_index))
        n = len(self.names)
        if pos.shape != (n, 2):
            raise LayoutError(f"positions_2d shape {pos.shape} does not match {n} channels")
        if len(self.grid_index) != n:
            raise LayoutError("grid_index length does not match channel count")
        if len(set(self.names)) != n:
            raise LayoutError("duplicate channel names")
        cells = [g for g in self.grid_index if g != EXCLUDED]
        # Layouts may omit the grid entirely (generic ingestion); once any
        # cell is declared, the full-cap invariants apply.
        if cells:
            if len(cells) != GRID_ROWS * GRID_COLS:
                raise LayoutError(
                    f"expected {GRID_ROWS * GRID_COLS} gridded channels, got {len(cells)}")
            if len(set(cells)) != len(cells):
                raise LayoutError("grid assignments are not unique")
            for r, c in cells:
                if not (0 <= r < GRID_ROWS and 0 <= c < GRID_COLS):
                    raise LayoutError(f"grid cell ({r}, {c}) outside {GRID_ROWS}x{GRID_COLS}")
            for ref in ("M1", "M2"):
                if ref not in self.names:
                    raise LayoutError(f"reference channel {ref} missing from layout")
        pos.flags.writeable = False

    @property
    def has_grid(self) -> bool:
        return any(g != EXCLUDED for g in self.grid_index)

    @property
    def n_channels(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LayoutError(f"channel {name!r} not in layout") from None

    def gridded_channels(self) -> list[int]:
        """Channel indices carrying a grid cell, in recording order."""
        return [i for i, g in enumerate(self.grid_index) if g != EXCLUDED]

    def grid_to_channel(self) -> np.ndarray:
        """(6, 9) array mapping each grid cell to its channel index."""
        out = np.full((GRID_ROWS, GRID_COLS), -1, dtype=int)
        for i, g in enumerate(self.grid_index):
            if g != EXCLUDED:
                out[g[0], g[1]] = i
        return out


def grid_position(layout: ChannelLayout, channel_index: int):
    """Grid cell of a channel, or ``"excluded"``.

    Raises
    ------
    IndexError
        If the channel index is out of range.
    """
    if not 0 <= channel_index < layout.n_channels:
        raise IndexError(f"channel index {channel_index} out of range [0, {layout.n_channels})")
    return layout.grid_index[channel_index]


def default_layout() -> ChannelLayout:
    """The shipped 64-channel layout with its row-major grid assignment."""
    pos_map = _default_positions()
    names = DEFAULT_CHANNEL_NAMES
    positions = np.array([pos_map[n] for n in names], dtype=float)
    off = set(DEFAULT_OFF_GRID)
    grid: list = []
    k = 0
    for name in names:
        if name in off:
            grid.append(EXCLUDED)
        else:
            grid.append((k // GRID_COLS, k % GRID_COLS))
            k += 1
    return ChannelLayout(names=tuple(names), positions_2d=positions, grid_index=tuple(grid))


class RiskClass(Enum):
    """Three-level risk taxonomy for traffic scenarios."""

    SAFE = "safe"
    LOW_RISK = "low_risk"
    HIGH_RISK = "high_risk"


@dataclass(frozen=True)
class EventAnnotation:
    """A timestamped scenario event; id 0 marks a pseudo-event in a safe interval."""

    event_id: int
    onset_s: float
    meta: str = ""

    def __post_init__(self):
        if not 0 <= int(self.event_id) <= 14:
            raise ValueError(f"event_id {self.event_id} outside 0..14")
        object.__setattr__(self, "event_id", int(self.event_id))
        object.__setattr__(self, "onset_s", float(self.onset_s))


class RecordingError(ValueError):
    """Raised when recording data violates its invariants."""


@dataclass(frozen=True)
class Recording:
    """Continuous multichannel EEG in microvolts.

    ``samples`` is channels x time; row order follows ``layout.names``.
    """

    layout: ChannelLayout
    sample_rate: float
    samples: np.ndarray
    t0: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=np.float64)
        if data.ndim != 2:
            raise RecordingError(f"samples must be 2-D, got shape {data.shape}")
        if data.shape[0] != self.layout.n_channels:
            raise RecordingError(
                f"{data.shape[0]} sample rows for {self.layout.n_channels} channels")
        if not self.sample_rate > 0:
            raise RecordingError(f"sample_rate must be positive, got {self.sample_rate}")
        if data.size and not np.isfinite(data).all():
            raise RecordingError("samples contain non-finite values")
        data.flags.writeable = False
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate

    def replace_samples(self, samples: np.ndarray) -> "Recording":
        """New Recording with the same metadata and different sample data."""
        return Recording(layout=self.layout, sample_rate=self.sample_rate,
                         samples=samples, t0=self.t0)


@dataclass(frozen=True)
class Epoch:
    """A fixed window of multichannel EEG cut around one event."""

    data: np.ndarray
    sample_rate: float
    window: tuple[float, float]
    source_event: EventAnnotation
    risk: RiskClass

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        start, end = float(self.window[0]), float(self.window[1])
        if not start < end:
            raise ValueError(f"window start {start} not before end {end}")
        expected = int(round((end - start) * self.sample_rate))
        if data.ndim != 2 or data.shape[1] != expected:
            raise ValueError(
                f"epoch data shape {data.shape} does not give {expected} samples "
                f"for window [{start}, {end}] at {self.sample_rate} Hz")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "window", (start, end))

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    def times(self) -> np.ndarray:
        """Sample times relative to event onset."""
        return self.window[0] + np.arange(self.n_samples) / self.sample_rate

    def crop(self, window: tuple[float, float]) -> "Epoch":
        """Sub-window of this epoch (window relative to event onset)."""
        lo = int(round((window[0] - self.window[0]) * self.sample_rate))
        hi = lo + int(round((window[1] - window[0]) * self.sample_rate))
        if lo < 0 or hi > self.n_samples:
            raise ValueError(f"window {window} outside epoch window {self.window}")
        return Epoch(data=self.data[:, lo:hi], sample_rate=self.sample_rate,
                     window=(float(window[0]), float(window[1])),
                     source_event=self.source_event, risk=self.risk)


@dataclass(frozen=True)
class EpochSet:
    """Epochs sharing a layout, sample rate, and window."""

    epochs: tuple[Epoch, ...]
    layout: ChannelLayout
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(self.epochs))
        nch = self.layout.n_channels
        for ep in self.epochs:
            if ep.n_channels != nch:
                raise ValueError(f"epoch has {ep.n_channels} channels, layout has {nch}")
            if ep.sample_rate != self.sample_rate:
                raise ValueError("epoch sample rate differs from set sample rate")
            if ep.window != self.epochs[0].window:
                raise ValueError("epochs have differing windows")
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return len(self.epochs)

    def __iter__(self):
        return iter(self.epochs)

    def __getitem__(self, i):
        return self.epochs[i]

    @property
    def window(self) -> tuple[float, float]:
        if not self.epochs:
            raise ValueError("empty epoch set has no window")
        return self.epochs[0].window

    def data_array(self) -> np.ndarray:
        """(n_epochs, n_channels, n_samples) stack of the epoch data."""
        return np.stack([ep.data for ep in self.epochs])

    def risks(self) -> list[RiskClass]:
        return [ep.risk for ep in self.epochs]

    def subset(self, indices) -> "EpochSet":
        return EpochSet(epochs=tuple(self.epochs[i] for i in indices),
                        layout=self.layout, sample_rate=self.sample_rate)
