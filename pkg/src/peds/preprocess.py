"""Signal conditioning: filtering, re-referencing, channel repair, artifact
suppression, epoching, safe-segment extraction, downsampling, and averaging.

Every operation is a pure function preserving channel count and layout, so a
fixed input and configuration always reproduce the same output bits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .catalog import ScenarioCatalog, classify_event, load_catalog
from .core import Epoch, EpochSet, EventAnnotation, Recording, RiskClass


class FilterDesignError(ValueError):
    """Invalid passband for the recording's sample rate."""


class ReferenceError_(ValueError):
    """A required reference channel is missing."""


class BadChannelError(ValueError):
    """Too many channels flagged bad, or a channel cannot be interpolated."""


class AsrCalibrationError(ValueError):
    """Calibration data unusable for artifact suppression."""


class EpochSkipWarning(UserWarning):
    """An event too close to the recording edge was skipped."""


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass specification; order 6 keeps 60 Hz at least 20 dB down
    under zero-phase application."""

    low_hz: float = 0.5
    high_hz: float = 50.0
    order: int = 6
    zero_phase: bool = True

    def validate(self, sample_rate: float) -> None:
        if not 0 < self.low_hz < self.high_hz:
            raise FilterDesignError(f"need 0 < low ({self.low_hz}) < high ({self.high_hz})")
        if self.high_hz >= sample_rate / 2:
            raise FilterDesignError(
                f"high edge {self.high_hz} Hz at or above Nyquist {sample_rate / 2} Hz")


@dataclass(frozen=True)
class AsrConfig:
    calib_window_s: float = 10.0
    cutoff_k: float = 20.0
    window_s: float = 0.5

    def __post_init__(self):
        if self.cutoff_k <= 0:
            raise ValueError("cutoff_k must be positive")
        if self.calib_window_s <= 0 or self.window_s <= 0:
            raise ValueError("windows must be positive")


@dataclass(frozen=True)
class BadChannelCriteria:
    variance_robust_z: float = 5.0
    flat_variance: float = 1e-12
    k_neighbors: int = 4
    max_bad_fraction: float = 0.25


def _apply_sos(data: np.ndarray, sos: np.ndarray, zero_phase: bool, order: int) -> np.ndarray:
    if zero_phase:
        padlen = min(data.shape[-1] - 1, 3 * (4 * order + 1))
        return signal.sosfiltfilt(sos, data, axis=-1, padtype="even", padlen=padlen)
    return signal.sosfilt(sos, data, axis=-1)


def bandpass_filter(recording: Recording, spec: FilterSpec = FilterSpec()) -> Recording:
    """Butterworth band-pass, forward-backward when ``spec.zero_phase``."""
    spec.validate(recording.sample_rate)
    sos = signal.butter(spec.order, [spec.low_hz, spec.high_hz], btype="bandpass",
                        fs=recording.sample_rate, output="sos")
    out = _apply_sos(recording.samples, sos, spec.zero_phase, spec.order)
    return recording.replace_samples(out)


def rereference(recording: Recording, ref_labels=("M1", "M2")) -> Recording:
    """Subtract the mean of the reference channels from every channel."""
    try:
        idx = [recording.layout.index_of(lab) for lab in ref_labels]
    except Exception as exc:
        raise ReferenceError_(str(exc)) from exc
    ref = recording.samples[idx].mean(axis=0)
    return recording.replace_samples(recording.samples - ref)


def find_bad_channels(recording: Recording,
                      criteria: BadChannelCriteria = BadChannelCriteria()) -> list[int]:
    """Channels that are flat or whose variance is a robust outlier."""
    var = recording.samples.var(axis=1)
    med = np.median(var)
    mad = np.median(np.abs(var - med))
    scale = 1.4826 * mad + 1e-30
    rz = (var - med) / scale
    bad = np.where((var < criteria.flat_variance) | (np.abs(rz) > criteria.variance_robust_z))[0]
    return [int(i) for i in bad]


def interpolate_bad_channels(recording: Recording,
                             criteria: BadChannelCriteria = BadChannelCriteria()
                             ) -> tuple[Recording, list[int]]:
    """Replace flagged channels by inverse-distance-weighted good neighbors."""
    bad = find_bad_channels(recording, criteria)
    n = recording.layout.n_channels
    if len(bad) >= criteria.max_bad_fraction * n:
        raise BadChannelError(
            f"{len(bad)} of {n} channels flagged bad (limit {criteria.max_bad_fraction:.0%})")
    if not bad:
        return recording, []
    good = [i for i in range(n) if i not in set(bad)]
    if not good:
        raise BadChannelError("no good channels left to interpolate from")
    pos = recording.layout.positions_2d
    out = np.array(recording.samples)
    for b in bad:
        d = np.linalg.norm(pos[good] - pos[b], axis=1)
        order = np.argsort(d)[:criteria.k_neighbors]
        dn = d[order]
        if dn[0] < 1e-9:
            out[b] = recording.samples[good[int(order[0])]]
            continue
        w = 1.0 / dn**2
        w /= w.sum()
        neigh = [good[int(i)] for i in order]
        out[b] = w @ recording.samples[neigh]
    return recording.replace_samples(out), bad


def asr_lite(recording: Recording, config: AsrConfig = AsrConfig()) -> Recording:
    """Window-wise principal-subspace clipping against calibration statistics.

    The leading ``calib_window_s`` seconds serve as calibration.  Each
    sliding window is projected onto the calibration covariance eigenbasis;
    components whose window RMS exceeds ``cutoff_k`` calibration standard
    deviations are attenuated down to the cutoff before reconstruction.
    Data matching the calibration statistics passes essentially unchanged.
    """
    rate = recording.sample_rate
    n_calib = int(round(config.calib_window_s * rate))
    n_win = int(round(config.window_s * rate))
    if n_calib < 10 * n_win:
        raise AsrCalibrationError(
            f"calibration window {config.calib_window_s}s shorter than "
            f"10x the sliding window {config.window_s}s")
    if n_calib > recording.n_samples:
        raise AsrCalibrationError("recording shorter than the calibration window")
    calib = recording.samples[:, :n_calib]
    calib = calib - calib.mean(axis=1, keepdims=True)

    # Calibration must itself be clean: no sliding-window RMS may exceed
    # three robust standard deviations on any channel.
    med = np.median(calib, axis=1, keepdims=True)
    robust_sd = 1.4826 * np.median(np.abs(calib - med), axis=1) + 1e-30
    n_check = n_calib - n_calib % n_win
    win_rms = np.sqrt((calib[:, :n_check]**2)
                      .reshape(calib.shape[0], -1, n_win).mean(axis=2))
    worst = (win_rms / robust_sd[:, None]).max()
    if worst > 3.0:
        raise AsrCalibrationError(
            f"calibration window is contaminated (window RMS {worst:.1f}x robust SD)")

    cov = calib @ calib.T / n_calib
    evals, vecs = np.linalg.eigh(cov)
    sigma = np.sqrt(np.clip(evals, 0.0, None))
    floor = 1e-9 * max(sigma.max(), 1e-30)
    cutoff = config.cutoff_k * np.maximum(sigma, floor)

    out = np.array(recording.samples)
    n = recording.n_samples
    for start in range(0, n, n_win):
        seg = out[:, start:start + n_win]
        y = vecs.T @ seg
        rms = np.sqrt((y**2).mean(axis=1))
        scale = np.where(rms > cutoff, cutoff / np.maximum(rms, 1e-300), 1.0)
        if np.any(scale < 1.0):
            out[:, start:start + n_win] = vecs @ (y * scale[:, None])
    return recording.replace_samples(out)


def _cut_epoch(recording: Recording, event: EventAnnotation, window, baseline,
               risk: RiskClass) -> Epoch | None:
    rate = recording.sample_rate
    rel = event.onset_s - recording.t0
    lo = int(round((rel + window[0]) * rate))
    n = int(round((window[1] - window[0]) * rate))
    if lo < 0 or lo + n > recording.n_samples:
        return None
    data = np.array(recording.samples[:, lo:lo + n])
    if baseline is not None:
        b0 = int(round((baseline[0] - window[0]) * rate))
        b1 = int(round((baseline[1] - window[0]) * rate))
        data -= data[:, b0:b1].mean(axis=1, keepdims=True)
    return Epoch(data=data, sample_rate=rate, window=(float(window[0]), float(window[1])),
                 source_event=event, risk=risk)


def segment_epochs(recording: Recording, events: list[EventAnnotation],
                   window=(-4.0, 4.0), baseline=(-4.0, -2.0),
                   catalog: ScenarioCatalog | None = None) -> EpochSet:
    """Cut one baseline-corrected epoch per event.

    Events whose window falls outside the recording are skipped with an
    :class:`EpochSkipWarning`.
    """
    if catalog is None:
        catalog = load_catalog()
    epochs = []
    for ev in events:
        risk = classify_event(catalog, ev.event_id)
        ep = _cut_epoch(recording, ev, window, baseline, risk)
        if ep is None:
            warnings.warn(f"event id {ev.event_id} at {ev.onset_s}s too close to "
                          f"the recording edge; skipped", EpochSkipWarning, stacklevel=2)
            continue
        epochs.append(ep)
    return EpochSet(epochs=tuple(epochs), layout=recording.layout,
                    sample_rate=recording.sample_rate)


def extract_safe_segments(recording: Recording, events: list[EventAnnotation],
                          min_tte: float = 5.0, epoch_len: float = 8.0,
                          post_event_margin: float = 4.0,
                          baseline=(-4.0, -2.0)) -> EpochSet:
    """Non-overlapping pseudo-epochs from intervals far from any event.

    Every sample of a returned segment lies at least ``min_tte`` seconds
    before the next event and ``post_event_margin`` seconds after the
    previous one.  Segments carry event id 0 and risk SAFE, with a nominal
    onset placed ``-window_start`` seconds into the segment so their window
    matches event epochs.
    """
    onsets = sorted(ev.onset_s for ev in events)
    rate = recording.sample_rate
    t_start = recording.t0
    t_end = recording.t0 + recording.duration_s
    bounds = [t_start] + onsets + [t_end + min_tte]
    window = (-epoch_len / 2, epoch_len / 2)
    epochs = []
    for i in range(len(bounds) - 1):
        lo = bounds[i] + (post_event_margin if i > 0 else 0.0)
        hi = bounds[i + 1] - min_tte
        hi = min(hi, t_end)
        t = lo
        while t + epoch_len <= hi + 1e-9:
            onset = t + epoch_len / 2
            ev = EventAnnotation(event_id=0, onset_s=onset, meta="safe interval")
            ep = _cut_epoch(recording, ev, window, baseline, RiskClass.SAFE)
            if ep is not None:
                epochs.append(ep)
            t += epoch_len
    return EpochSet(epochs=tuple(epochs), layout=recording.layout, sample_rate=rate)


def downsample(epochs: EpochSet, target_hz: float = 250.0) -> EpochSet:
    """Anti-aliased decimation by an integer factor."""
    rate = epochs.sample_rate
    ratio = rate / target_hz
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError(f"source rate {rate} not an integer multiple of {target_hz}")
    step = int(round(ratio))
    if step == 1:
        return epochs
    if epochs.epochs and epochs[0].n_samples % step:
        raise ValueError(f"epoch length {epochs[0].n_samples} not divisible by factor {step}")
    sos = signal.butter(8, 0.4 * target_hz, btype="lowpass", fs=rate, output="sos")
    out = []
    for ep in epochs:
        filtered = _apply_sos(ep.data, sos, zero_phase=True, order=8)
        out.append(Epoch(data=filtered[:, ::step], sample_rate=target_hz,
                         window=ep.window, source_event=ep.source_event, risk=ep.risk))
    return EpochSet(epochs=tuple(out), layout=epochs.layout, sample_rate=target_hz)


def ensemble_average(epochs: EpochSet) -> Epoch:
    """Element-wise mean over epochs (the ERP of the set)."""
    if len(epochs) == 0:
        raise ValueError("cannot average an empty epoch set")
    shapes = {ep.data.shape for ep in epochs}
    if len(shapes) != 1:
        raise ValueError(f"epochs have differing shapes: {sorted(shapes)}")
    mean = epochs.data_array().mean(axis=0)
    first = epochs[0]
    ids = {ep.source_event.event_id for ep in epochs}
    common = ids.pop() if len(ids) == 1 else 0
    ev = EventAnnotation(event_id=common, onset_s=first.source_event.onset_s,
                         meta=f"ensemble average of {len(epochs)} epochs")
    return Epoch(data=mean, sample_rate=first.sample_rate, window=first.window,
                 source_event=ev, risk=first.risk)
