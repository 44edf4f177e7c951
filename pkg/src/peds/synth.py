"""Synthetic EEG with known ground truth.

Encodes the qualitative structure the pipeline must recover: pre-event
frontal activity for risky scenarios and a parieto-occipital positive
deflection around 300 ms after onset for dangerous ones, on a 1/f noise
background with alpha rhythm.  Everything is a pure function of
(configuration, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import ScenarioCatalog, classify_event
from .core import (ChannelLayout, Epoch, EpochSet, EventAnnotation, Recording,
                   RiskClass, default_layout)

P300_REPRESENTATIVE_EVENT = 1   # Pedestrian Cross Left
LOWRISK_REPRESENTATIVE_EVENT = 3  # Pedestrian Stand Left


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters; the defaults form the reference fixture."""

    noise_sigma_uv: float = 10.0
    alpha_amp_uv: float = 3.0
    alpha_freq_hz: float = 10.0
    p300_amp_uv: float = 6.0
    p300_latency_mean_s: float = 0.30
    p300_latency_jitter_s: float = 0.05
    p300_width_s: float = 0.15          # full width at half maximum
    preevent_amp_uv: float = 3.0
    preevent_window_s: tuple[float, float] = (-2.0, -0.5)
    frontal_center: tuple[float, float] = (0.0, 0.55)    # FZ
    frontal_sigma: float = 0.40
    po_center: tuple[float, float] = (-0.2203, -0.75)    # PO3
    po_sigma: float = 0.40
    sample_rate_hz: float = 250.0
    epoch_window_s: tuple[float, float] = (-4.0, 4.0)
    baseline_s: tuple[float, float] = (-4.0, -2.0)

    def __post_init__(self):
        for name in ("noise_sigma_uv", "alpha_amp_uv", "p300_amp_uv",
                     "preevent_amp_uv", "p300_latency_jitter_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        w0, w1 = self.epoch_window_s
        p0, p1 = self.preevent_window_s
        if not (w0 <= p0 < p1 <= w1):
            raise ValueError("pre-event window must lie inside the epoch window")


def topography_weights(layout: ChannelLayout, center: tuple[float, float],
                       sigma: float) -> np.ndarray:
    """Smooth Gaussian channel weight map over scalp positions, peak 1."""
    d2 = ((layout.positions_2d - np.asarray(center))**2).sum(axis=1)
    return np.exp(-d2 / (2.0 * sigma**2))


def _pink_noise(n_channels: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-RMS noise with power spectral density falling as 1/f."""
    freqs = np.fft.rfftfreq(n_samples)
    shaping = np.zeros_like(freqs)
    shaping[1:] = freqs[1:] ** -0.5
    spectrum = (rng.standard_normal((n_channels, freqs.size))
                + 1j * rng.standard_normal((n_channels, freqs.size))) * shaping
    x = np.fft.irfft(spectrum, n=n_samples, axis=1)
    rms = np.sqrt((x**2).mean(axis=1, keepdims=True))
    return x / np.maximum(rms, 1e-30)


def _background(layout: ChannelLayout, n_samples: int, config: SynthConfig,
                rng: np.random.Generator, t: np.ndarray) -> np.ndarray:
    data = config.noise_sigma_uv * _pink_noise(layout.n_channels, n_samples, rng)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    data += config.alpha_amp_uv * np.sin(2.0 * np.pi * config.alpha_freq_hz * t + phase)
    return data


def synth_background(layout: ChannelLayout, duration_s: float, config: SynthConfig,
                     rng: np.random.Generator, sample_rate: float | None = None) -> Recording:
    """Continuous background recording: pink noise plus shared alpha rhythm."""
    rate = sample_rate if sample_rate is not None else config.sample_rate_hz
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate
    data = _background(layout, n, config, rng, t)
    return Recording(layout=layout, sample_rate=rate, samples=data, t0=0.0)


def _preevent_wave(t: np.ndarray, config: SynthConfig) -> np.ndarray:
    """Smooth positive bump spanning the pre-event window (Hann envelope)."""
    a, b = config.preevent_window_s
    env = np.zeros_like(t)
    inside = (t >= a) & (t <= b)
    env[inside] = 0.5 * (1.0 - np.cos(2.0 * np.pi * (t[inside] - a) / (b - a)))
    return config.preevent_amp_uv * env


def _p300_pulse(t: np.ndarray, latency: float, config: SynthConfig) -> np.ndarray:
    sigma = config.p300_width_s / 2.3548200450309493  # FWHM -> standard deviation
    return config.p300_amp_uv * np.exp(-((t - latency)**2) / (2.0 * sigma**2))


_DEFAULT_EVENT_ID = {RiskClass.SAFE: 0,
                     RiskClass.LOW_RISK: LOWRISK_REPRESENTATIVE_EVENT,
                     RiskClass.HIGH_RISK: P300_REPRESENTATIVE_EVENT}


def synth_event_epoch(risk_class: RiskClass, config: SynthConfig,
                      rng: np.random.Generator, layout: ChannelLayout | None = None,
                      event_id: int | None = None, onset_s: float = 0.0) -> Epoch:
    """One baseline-corrected epoch of the requested risk class."""
    if not isinstance(risk_class, RiskClass):
        raise ValueError(f"invalid risk class {risk_class!r}")
    if layout is None:
        layout = default_layout()
    rate = config.sample_rate_hz
    w0, w1 = config.epoch_window_s
    n = int(round((w1 - w0) * rate))
    t = w0 + np.arange(n) / rate
    data = _background(layout, n, config, rng, t)

    if risk_class in (RiskClass.LOW_RISK, RiskClass.HIGH_RISK):
        frontal = topography_weights(layout, config.frontal_center, config.frontal_sigma)
        data += frontal[:, None] * _preevent_wave(t, config)[None, :]
    if risk_class is RiskClass.HIGH_RISK:
        po = topography_weights(layout, config.po_center, config.po_sigma)
        latency = rng.normal(config.p300_latency_mean_s, config.p300_latency_jitter_s)
        data += po[:, None] * _p300_pulse(t, latency, config)[None, :]

    b0, b1 = config.baseline_s
    i0, i1 = int(round((b0 - w0) * rate)), int(round((b1 - w0) * rate))
    data -= data[:, i0:i1].mean(axis=1, keepdims=True)

    eid = _DEFAULT_EVENT_ID[risk_class] if event_id is None else event_id
    ev = EventAnnotation(event_id=eid, onset_s=onset_s, meta=f"synthetic {risk_class.value}")
    return Epoch(data=data, sample_rate=rate, window=(w0, w1), source_event=ev,
                 risk=risk_class)


def synth_dataset(catalog: ScenarioCatalog, config: SynthConfig,
                  counts: dict[int, int] | None, rng: np.random.Generator,
                  layout: ChannelLayout | None = None) -> tuple[EpochSet, list[RiskClass]]:
    """Epochs per event id (catalog counts unless overridden), shuffled.

    ``counts`` maps event id to epoch count; id 0 requests safe
    pseudo-epochs.  ``None`` uses the catalog occurrence counts.
    """
    if layout is None:
        layout = default_layout()
    if counts is None:
        counts = catalog.counts()
    plan: list[tuple[int, RiskClass]] = []
    for event_id in sorted(counts):
        risk = classify_event(catalog, event_id)
        plan.extend((event_id, risk) for _ in range(counts[event_id]))
    seeds = rng.integers(0, 2**63 - 1, size=len(plan))
    epochs = [synth_event_epoch(risk, config, np.random.default_rng(int(s)),
                                layout=layout, event_id=eid, onset_s=float(i))
              for i, ((eid, risk), s) in enumerate(zip(plan, seeds))]
    order = rng.permutation(len(epochs))
    shuffled = tuple(epochs[i] for i in order)
    labels = [ep.risk for ep in shuffled]
    return EpochSet(epochs=shuffled, layout=layout, sample_rate=config.sample_rate_hz), labels


def synth_class_dataset(config: SynthConfig, class_counts: dict[RiskClass, int],
                        rng: np.random.Generator,
                        layout: ChannelLayout | None = None) -> EpochSet:
    """Epochs by risk class directly (fixture helper for protocol tests)."""
    if layout is None:
        layout = default_layout()
    plan = [risk for risk in sorted(class_counts, key=lambda r: r.value)
            for _ in range(class_counts[risk])]
    seeds = rng.integers(0, 2**63 - 1, size=len(plan))
    epochs = [synth_event_epoch(risk, config, np.random.default_rng(int(s)),
                                layout=layout, onset_s=float(i))
              for i, (risk, s) in enumerate(zip(plan, seeds))]
    order = rng.permutation(len(epochs))
    return EpochSet(epochs=tuple(epochs[i] for i in order), layout=layout,
                    sample_rate=config.sample_rate_hz)


def synth_recording(catalog: ScenarioCatalog, config: SynthConfig,
                    event_ids: list[int], spacing_s: float,
                    rng: np.random.Generator, layout: ChannelLayout | None = None,
                    sample_rate: float = 1000.0
                    ) -> tuple[Recording, list[EventAnnotation]]:
    """Continuous recording with the event signatures injected at spaced onsets."""
    if layout is None:
        layout = default_layout()
    lead = spacing_s
    duration = lead + spacing_s * len(event_ids) + spacing_s
    n = int(round(duration * sample_rate))
    t_abs = np.arange(n) / sample_rate
    data = _background(layout, n, config, rng, t_abs)

    frontal = topography_weights(layout, config.frontal_center, config.frontal_sigma)
    po = topography_weights(layout, config.po_center, config.po_sigma)
    events = []
    for k, eid in enumerate(event_ids):
        onset = lead + k * spacing_s
        risk = classify_event(catalog, eid)
        events.append(EventAnnotation(event_id=eid, onset_s=onset,
                                      meta=catalog[eid].description if eid else "safe"))
        t_rel = t_abs - onset
        if risk in (RiskClass.LOW_RISK, RiskClass.HIGH_RISK):
            data += frontal[:, None] * _preevent_wave(t_rel, config)[None, :]
        if risk is RiskClass.HIGH_RISK:
            latency = rng.normal(config.p300_latency_mean_s, config.p300_latency_jitter_s)
            data += po[:, None] * _p300_pulse(t_rel, latency, config)[None, :]
    rec = Recording(layout=layout, sample_rate=sample_rate, samples=data, t0=0.0)
    return rec, events
