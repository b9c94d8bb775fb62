"""The four audio-to-vibration algorithms and shared output normalization.

Each converter maps an AudioClip to an 8 kHz VibrationSignal:

* plm       -- perceptual mapping: per-frame loudness/roughness drive the
               amplitudes of two fixed carriers at 175 and 210 Hz.
* fshift    -- the input summed with one- and two-octave down-shifted copies,
               high-passed at 10 Hz and band-passed around 250 Hz.
* pitch     -- per-window Bark-band loudness regressed onto a 50-400 Hz
               carrier frequency, amplitude-modulated by frame loudness.
* hapticgen -- per-window RMS mapped onto a 200 +/- 50 Hz carrier with
               matching amplitude modulation.

plm, pitch, and hapticgen are normalized so the loudest native analysis
segment hits the target RMS; fshift is normalized on whole-signal RMS.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path

import numpy as np

from . import psychoacoustics as psycho
from .audio_io import (
    VIBRATION_RATE,
    AudioClip,
    VibrationSignal,
    resample_samples,
    rms_normalize,
)
from .dsp import FilterSpec, butterworth_filter, frame_rms, frame_signal, nco_synthesize, pitch_shift
from .errors import DegenerateSignalError, SchemaError

CONVERTER_TAGS = ("plm", "fshift", "pitch", "hapticgen")

# Signals whose pre-normalization RMS falls below this are treated as silent.
_SILENCE_RMS = 1e-9


def _default_pitch_coeffs() -> tuple[float, ...]:
    # Placeholder regression: weights rise linearly across the 24 bands so the
    # loudness-weighted band centroid maps onto [f_min, f_max]; the published
    # perceptual coefficients can be dropped in via config.
    weights = [350.0 * b / 23.0 for b in range(24)]
    return tuple(weights) + (50.0,)


@dataclass
class PlmConfig:
    frame_size: int = 4096
    carrier_low_hz: float = 175.0
    carrier_high_hz: float = 210.0
    # intensity = a0 + a1 * log1p(loudness)
    intensity_map: tuple[float, float] = (0.0, 1.0)
    # roughness = b0 + b1 * raw_roughness ** b2
    roughness_map: tuple[float, float, float] = (0.0, 1.0, 0.5)
    # fraction of intensity routed to the high carrier per unit roughness
    carrier_mix: float = 0.5


@dataclass
class FshiftConfig:
    shifts: tuple[float, ...] = (-12.0, -24.0)
    hp_cutoff_hz: float = 10.0
    hp_order: int = 2
    bp_center_hz: float = 250.0
    bp_q: float = 1.0
    bp_order: int = 4


@dataclass
class PitchConfig:
    window_ms: float = 10.0
    overlap: float = 0.5
    f_min_hz: float = 50.0
    f_max_hz: float = 400.0
    # 24 band weights + intercept; applied to the specific-loudness profile
    regression_coeffs: tuple[float, ...] = field(default_factory=_default_pitch_coeffs)
    # regress on the unit-sum profile rather than raw band values
    normalize_features: bool = True


@dataclass
class HapticgenConfig:
    window_ms: float = 10.0
    f_center_hz: float = 200.0
    f_dev_hz: float = 50.0


@dataclass
class ConverterConfig:
    plm: PlmConfig = field(default_factory=PlmConfig)
    fshift: FshiftConfig = field(default_factory=FshiftConfig)
    pitch: PitchConfig = field(default_factory=PitchConfig)
    hapticgen: HapticgenConfig = field(default_factory=HapticgenConfig)
    output_rate: int = VIBRATION_RATE
    target_segment_rms: float = 0.15

    def __post_init__(self) -> None:
        nyquist = self.output_rate / 2.0
        if not 0 < self.pitch.f_min_hz < self.pitch.f_max_hz < nyquist:
            raise ValueError("pitch frequency range must satisfy 0 < f_min < f_max < Nyquist")
        lo = self.hapticgen.f_center_hz - self.hapticgen.f_dev_hz
        hi = self.hapticgen.f_center_hz + self.hapticgen.f_dev_hz
        if not 0 < lo <= hi < nyquist:
            raise ValueError("hapticgen frequency range must stay inside (0, Nyquist)")
        if len(self.pitch.regression_coeffs) != psycho.N_BARK_BANDS + 1:
            raise ValueError("pitch regression needs 24 band weights plus an intercept")
        if self.plm.frame_size <= 0 or self.pitch.window_ms <= 0 \
                or self.hapticgen.window_ms <= 0:
            raise ValueError("frame and window sizes must be positive")


def default_config() -> ConverterConfig:
    return ConverterConfig()


def _merge_section(section, overrides: dict, context: str):
    kwargs = {}
    known = {f.name: f for f in fields(section)}
    for key, value in overrides.items():
        if key not in known:
            raise SchemaError(f"unknown config key {context}.{key}")
        current = getattr(section, key)
        if is_dataclass(current):
            value = _merge_section(current, value, f"{context}.{key}")
        elif isinstance(current, tuple):
            value = tuple(value)
        kwargs[key] = value
    return replace(section, **kwargs)


def load_converter_config(path: str | Path, base: ConverterConfig | None = None) -> ConverterConfig:
    """Apply a JSON config file (nested by section) on top of the defaults."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read converter config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return _merge_section(base or default_config(), raw, "config")


def apply_config_overrides(cfg: ConverterConfig, overrides: dict[str, str]) -> ConverterConfig:
    """Apply dotted-path overrides like {"plm.carrier_mix": "0.4"}."""
    nested: dict = {}
    for dotted, text in overrides.items():
        parts = dotted.split(".")
        node = nested
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        try:
            node[parts[-1]] = json.loads(text)
        except json.JSONDecodeError:
            node[parts[-1]] = text
    return _merge_section(cfg, nested, "config")


def _interp_tracks(values: np.ndarray, frame_centers_s: np.ndarray, n_out: int,
                   out_rate: int) -> np.ndarray:
    """Linearly interpolate frame-rate values onto the output sample grid."""
    t = np.arange(n_out) / out_rate
    if len(values) == 1:
        return np.full(n_out, values[0])
    return np.interp(t, frame_centers_s, values)


def normalize_vibration(raw: np.ndarray, strategy: str, cfg: ConverterConfig, *,
                        algorithm_tag: str, input_rate: int | None = None,
                        segment_len: int | None = None) -> VibrationSignal:
    """Resample to the output rate, scale to the target RMS, and clamp.

    segment_max: scale so the loudest non-overlapping segment (the converter's
    native frame, in output samples) lands on cfg.target_segment_rms.
    global: scale on whole-signal RMS.
    """
    if strategy not in ("segment_max", "global"):
        raise ValueError(f"unknown normalization strategy: {strategy!r}")
    samples = np.asarray(raw, dtype=np.float64)
    if input_rate is not None and input_rate != cfg.output_rate:
        samples = resample_samples(samples, input_rate, cfg.output_rate)
    if len(samples) == 0 or float(np.sqrt(np.mean(np.square(samples)))) < _SILENCE_RMS:
        raise DegenerateSignalError("degenerate signal: silent converter output")

    if strategy == "global":
        scaled, clipped = rms_normalize(samples, cfg.target_segment_rms)
    else:
        if segment_len is None:
            segment_len = max(1, int(round(0.010 * cfg.output_rate)))
        edges = np.arange(0, len(samples), segment_len)
        seg_rms = np.array([
            np.sqrt(np.mean(np.square(samples[s:s + segment_len]))) for s in edges
        ])
        peak_rms = float(seg_rms.max())
        if peak_rms < _SILENCE_RMS:
            raise DegenerateSignalError("degenerate signal: silent converter output")
        scaled = samples * (cfg.target_segment_rms / peak_rms)
        n_clipped = int(np.count_nonzero(np.abs(scaled) > 1.0))
        clipped = n_clipped / len(scaled)
        scaled = np.clip(scaled, -1.0, 1.0)
    return VibrationSignal(samples=scaled, algorithm_tag=algorithm_tag,
                           clipped_fraction=clipped)


def _output_length(n_in: int, in_rate: int, out_rate: int) -> int:
    return int(round(n_in * out_rate / in_rate))


def _frame_centers(n_frames: int, frame_size: int, hop: int, rate: int) -> np.ndarray:
    return (np.arange(n_frames) * hop + frame_size / 2.0) / rate


def plm_feature_tracks(clip: AudioClip, cfg: ConverterConfig,
                       psycho_config: psycho.PsychoConfig = psycho.DEFAULT_PSYCHO_CONFIG,
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame (intensity, roughness) tracks for the perceptual mapping."""
    frame_size = cfg.plm.frame_size
    frames = frame_signal(clip.samples, frame_size, frame_size)
    a0, a1 = cfg.plm.intensity_map
    b0, b1, b2 = cfg.plm.roughness_map
    intensity = np.empty(len(frames))
    vib_rough = np.empty(len(frames))
    for i, frame in enumerate(frames):
        loudness = psycho.frame_loudness(frame, clip.sample_rate, psycho_config)
        raw_rough = psycho.frame_roughness(frame, clip.sample_rate, psycho_config)
        intensity[i] = max(0.0, a0 + a1 * np.log1p(loudness))
        vib_rough[i] = max(0.0, b0 + b1 * raw_rough ** b2)
    return intensity, vib_rough


def convert_plm(clip: AudioClip, cfg: ConverterConfig | None = None) -> VibrationSignal:
    """Loudness/roughness mapping onto two fixed sinusoidal carriers."""
    cfg = cfg or default_config()
    intensity, vib_rough = plm_feature_tracks(clip, cfg)

    # carrier split: the high carrier takes a roughness-controlled share
    mix = np.clip(vib_rough * cfg.plm.carrier_mix, 0.0, 1.0)
    amp_low = intensity * (1.0 - mix)
    amp_high = intensity * mix

    n_out = _output_length(len(clip.samples), clip.sample_rate, cfg.output_rate)
    centers = _frame_centers(len(intensity), cfg.plm.frame_size, cfg.plm.frame_size,
                             clip.sample_rate)
    env_low = _interp_tracks(amp_low, centers, n_out, cfg.output_rate)
    env_high = _interp_tracks(amp_high, centers, n_out, cfg.output_rate)

    t = np.arange(n_out) / cfg.output_rate
    raw = env_low * np.sin(2.0 * np.pi * cfg.plm.carrier_low_hz * t) \
        + env_high * np.sin(2.0 * np.pi * cfg.plm.carrier_high_hz * t)

    segment = _output_length(cfg.plm.frame_size, clip.sample_rate, cfg.output_rate)
    return normalize_vibration(raw, "segment_max", cfg, algorithm_tag="plm",
                               segment_len=segment)


def fshift_raw(clip: AudioClip, cfg: ConverterConfig | None = None) -> np.ndarray:
    """Frequency-shift pipeline before normalization, at the output rate."""
    cfg = cfg or default_config()
    if len(clip.samples) == 0:
        raise ValueError("cannot convert an empty clip")
    mixed = clip.samples.astype(np.float64)
    for semitones in cfg.fshift.shifts:
        mixed = mixed + pitch_shift(clip, semitones).samples
    hp = FilterSpec("highpass", cfg.fshift.hp_cutoff_hz, order=cfg.fshift.hp_order)
    bp = FilterSpec("bandpass", cfg.fshift.bp_center_hz, q=cfg.fshift.bp_q,
                    order=cfg.fshift.bp_order)
    filtered = butterworth_filter(mixed, hp, clip.sample_rate)
    filtered = butterworth_filter(filtered, bp, clip.sample_rate)
    return resample_samples(filtered, clip.sample_rate, cfg.output_rate)


def convert_fshift(clip: AudioClip, cfg: ConverterConfig | None = None) -> VibrationSignal:
    """Octave down-shift summation with band-pass shaping."""
    cfg = cfg or default_config()
    return normalize_vibration(fshift_raw(clip, cfg), "global", cfg, algorithm_tag="fshift")


def pitch_frequency_track(clip: AudioClip, cfg: ConverterConfig,
                          psycho_config: psycho.PsychoConfig = psycho.DEFAULT_PSYCHO_CONFIG,
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Per-window (frequency, amplitude) tracks for the pitch converter."""
    pc = cfg.pitch
    window = max(1, int(round(pc.window_ms * clip.sample_rate / 1000.0)))
    hop = max(1, int(round(window * (1.0 - pc.overlap))))
    frames = frame_signal(clip.samples, window, hop)

    coeffs = np.asarray(pc.regression_coeffs[:-1])
    intercept = pc.regression_coeffs[-1]
    freqs = np.empty(len(frames))
    amps = np.empty(len(frames))
    for i, frame in enumerate(frames):
        specific = psycho.specific_loudness_bark(frame, clip.sample_rate, psycho_config)
        total = float(specific.sum())
        features = specific / total if (pc.normalize_features and total > 0) else specific
        freqs[i] = float(np.clip(intercept + features @ coeffs, pc.f_min_hz, pc.f_max_hz))
        amps[i] = total
    return freqs, amps


def convert_pitch(clip: AudioClip, cfg: ConverterConfig | None = None) -> VibrationSignal:
    """Bark-profile regression to a single time-varying carrier frequency."""
    cfg = cfg or default_config()
    freqs, amps = pitch_frequency_track(clip, cfg)

    window = max(1, int(round(cfg.pitch.window_ms * clip.sample_rate / 1000.0)))
    hop = max(1, int(round(window * (1.0 - cfg.pitch.overlap))))
    centers = _frame_centers(len(freqs), window, hop, clip.sample_rate)
    n_out = _output_length(len(clip.samples), clip.sample_rate, cfg.output_rate)
    freq_track = _interp_tracks(freqs, centers, n_out, cfg.output_rate)
    amp_track = _interp_tracks(amps, centers, n_out, cfg.output_rate)

    raw = nco_synthesize(freq_track, amp_track, cfg.output_rate)
    segment = max(1, int(round(cfg.pitch.window_ms * cfg.output_rate / 1000.0)))
    return normalize_vibration(raw, "segment_max", cfg, algorithm_tag="pitch",
                               segment_len=segment)


def convert_hapticgen(clip: AudioClip, cfg: ConverterConfig | None = None) -> VibrationSignal:
    """RMS-envelope mapping onto a 200 Hz carrier with +/-50 Hz modulation."""
    cfg = cfg or default_config()
    hc = cfg.hapticgen
    rms = frame_rms(clip.samples, hc.window_ms, hc.window_ms, clip.sample_rate)
    peak = float(rms.max())
    if peak <= 0.0:
        raise DegenerateSignalError("degenerate signal: silent input")
    r_norm = rms / peak

    freqs = hc.f_center_hz - hc.f_dev_hz + 2.0 * hc.f_dev_hz * r_norm
    window = max(1, int(round(hc.window_ms * clip.sample_rate / 1000.0)))
    centers = _frame_centers(len(rms), window, window, clip.sample_rate)
    n_out = _output_length(len(clip.samples), clip.sample_rate, cfg.output_rate)
    freq_track = _interp_tracks(freqs, centers, n_out, cfg.output_rate)
    amp_track = _interp_tracks(r_norm, centers, n_out, cfg.output_rate)

    raw = nco_synthesize(freq_track, amp_track, cfg.output_rate)
    segment = max(1, int(round(hc.window_ms * cfg.output_rate / 1000.0)))
    return normalize_vibration(raw, "segment_max", cfg, algorithm_tag="hapticgen",
                               segment_len=segment)


_CONVERTERS = {
    "plm": convert_plm,
    "fshift": convert_fshift,
    "pitch": convert_pitch,
    "hapticgen": convert_hapticgen,
}


def convert(clip: AudioClip, algorithm: str, cfg: ConverterConfig | None = None) -> VibrationSignal:
    """Dispatch to one of the four converters by tag."""
    try:
        converter = _CONVERTERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm tag: {algorithm!r}") from None
    return converter(clip, cfg or default_config())
