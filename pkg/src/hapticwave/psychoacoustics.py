"""Frame-level perceptual audio features: loudness, roughness, Bark-band loudness.

The loudness model is a Zwicker-style approximation, not a certified
implementation: an equal-loudness frequency weighting (embedded contour
table) is applied to the power spectrum, power is pooled into 24 critical
bands, and each band is compressed with a Stevens power law before summing.
It is monotone in input level and contour-weighted, which is what the
converters rely on. Roughness follows the Vassilakis pairwise spectral-peak
model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp import hann_window
from .errors import SchemaError

N_BARK_BANDS = 24

# Relative sensitivity vs. frequency (dB re 1 kHz), a smoothed inverse of a
# mid-level equal-loudness contour. Interpolated in log-frequency.
_CONTOUR_FREQS = (
    20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0, 100.0, 125.0, 160.0, 200.0,
    250.0, 315.0, 400.0, 500.0, 630.0, 800.0, 1000.0, 1250.0, 1600.0, 2000.0,
    2500.0, 3150.0, 4000.0, 5000.0, 6300.0, 8000.0, 10000.0, 12500.0,
    16000.0, 20000.0,
)
_CONTOUR_GAINS_DB = (
    -50.0, -45.0, -41.0, -36.5, -32.5, -28.5, -24.5, -21.0, -18.0, -15.0,
    -12.0, -9.5, -7.5, -5.5, -4.5, -3.0, -1.5, 0.0, 0.5, 1.0, 2.0, 4.0,
    6.0, 6.5, 4.0, 0.0, -4.0, -8.0, -12.0, -17.0, -25.0,
)


@dataclass
class PsychoConfig:
    """Tunable constants; defaults are embedded, a JSON file may override."""

    contour_freqs: tuple = _CONTOUR_FREQS
    contour_gains_db: tuple = _CONTOUR_GAINS_DB
    loudness_exponent: float = 0.23
    loudness_scale: float = 1.0
    # Vassilakis roughness model
    amplitude_exponent: float = 0.1
    fluctuation_exponent: float = 3.11
    kernel_b1: float = -3.5
    kernel_b2: float = -5.75
    kernel_s1: float = 0.0207
    kernel_s2: float = 18.96
    kernel_scale: float = 0.24
    # spectral peak picking
    max_peaks: int = 10
    peak_floor_db: float = -40.0


DEFAULT_PSYCHO_CONFIG = PsychoConfig()


def load_psycho_config(path: str | Path) -> PsychoConfig:
    """Load constant overrides from a JSON object keyed by field name."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read psychoacoustics config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    known = {f for f in PsychoConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise SchemaError(f"{path}: unknown config keys {sorted(unknown)}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
    return PsychoConfig(**kwargs)


@dataclass
class PsychoFrame:
    """Loudness, roughness, and per-band specific loudness for one frame."""

    loudness: float
    roughness: float
    specific_loudness: np.ndarray  # 24 Bark-band values

    def __post_init__(self) -> None:
        if len(self.specific_loudness) != N_BARK_BANDS:
            raise ValueError(f"specific loudness must have {N_BARK_BANDS} entries")


def hz_to_bark(freq_hz: np.ndarray | float) -> np.ndarray | float:
    """Analytic critical-band rate (Terhardt-style arctangent form)."""
    f = np.asarray(freq_hz, dtype=np.float64)
    return 13.0 * np.arctan(0.00076 * f) + 3.5 * np.arctan((f / 7500.0) ** 2)


def bark_band_index(freq_hz: np.ndarray) -> np.ndarray:
    """Map frequencies to 1-based Bark band numbers, clipped to [1, 24].

    Assigns every bin from DC to Nyquist to exactly one band, so band powers
    partition total power.
    """
    z = hz_to_bark(freq_hz)
    return np.clip(np.ceil(z).astype(int), 1, N_BARK_BANDS)


def _power_spectrum(frame: np.ndarray, sample_rate: int, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(frame, dtype=np.float64)
    if len(x) < min_len:
        raise ValueError(f"frame of {len(x)} samples is too short (need >= {min_len})")
    windowed = x * hann_window(len(x))
    spectrum = np.abs(np.fft.rfft(windowed)) ** 2
    freqs = np.fft.rfftfreq(len(x), 1.0 / sample_rate)
    return spectrum, freqs


def equal_loudness_weight(freqs: np.ndarray, config: PsychoConfig = DEFAULT_PSYCHO_CONFIG) -> np.ndarray:
    """Power-domain sensitivity weights from the contour table."""
    safe = np.maximum(np.asarray(freqs, dtype=np.float64), 1.0)
    gains_db = np.interp(
        np.log10(safe),
        np.log10(np.asarray(config.contour_freqs)),
        np.asarray(config.contour_gains_db),
    )
    return 10.0 ** (gains_db / 10.0)


def bark_band_powers(power: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Pool a power spectrum into the 24 critical bands (pure partition)."""
    bands = bark_band_index(freqs)
    out = np.zeros(N_BARK_BANDS)
    np.add.at(out, bands - 1, power)
    return out


def specific_loudness_bark(frame: np.ndarray, sample_rate: int,
                           config: PsychoConfig = DEFAULT_PSYCHO_CONFIG) -> np.ndarray:
    """Per-band specific loudness over the 24 Bark bands."""
    power, freqs = _power_spectrum(frame, sample_rate, min_len=256)
    weighted = power * equal_loudness_weight(freqs, config)
    band_power = bark_band_powers(weighted, freqs)
    return config.loudness_scale * band_power ** config.loudness_exponent


def frame_loudness(frame: np.ndarray, sample_rate: int,
                   config: PsychoConfig = DEFAULT_PSYCHO_CONFIG) -> float:
    """Total loudness (model sones): sum of the specific loudness bands."""
    return float(np.sum(specific_loudness_bark(frame, sample_rate, config)))


def spectral_peaks(frame: np.ndarray, sample_rate: int,
                   config: PsychoConfig = DEFAULT_PSYCHO_CONFIG) -> list[tuple[float, float]]:
    """Strongest local spectral maxima as (frequency_hz, amplitude) pairs.

    Keeps at most config.max_peaks peaks above config.peak_floor_db relative
    to the frame maximum; each is refined by parabolic interpolation.
    """
    x = np.asarray(frame, dtype=np.float64)
    if len(x) < 1024:
        raise ValueError(f"frame of {len(x)} samples is too short (need >= 1024)")
    mag = np.abs(np.fft.rfft(x * hann_window(len(x))))
    top = mag.max()
    if top <= 0.0:
        return []
    threshold = top * 10.0 ** (config.peak_floor_db / 20.0)
    candidates = np.flatnonzero((mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])) + 1
    candidates = candidates[mag[candidates] >= threshold]
    candidates = candidates[np.argsort(mag[candidates])[::-1][:config.max_peaks]]

    bin_hz = sample_rate / len(x)
    peaks = []
    for i in sorted(candidates):
        a, b, c = np.log(mag[i - 1 : i + 2] + 1e-30)
        denom = a - 2.0 * b + c
        delta = 0.5 * (a - c) / denom if abs(denom) > 1e-12 else 0.0
        freq = (i + delta) * bin_hz
        amp = float(np.exp(b - 0.25 * (a - c) * delta))
        peaks.append((freq, amp))
    return peaks


def _pair_roughness(f1: float, a1: float, f2: float, a2: float, config: PsychoConfig) -> float:
    amplitude = (a1 * a2) ** config.amplitude_exponent
    fluctuation = 0.5 * (2.0 * min(a1, a2) / (a1 + a2)) ** config.fluctuation_exponent
    s = config.kernel_scale / (config.kernel_s1 * min(f1, f2) + config.kernel_s2)
    df = abs(f1 - f2)
    separation = np.exp(config.kernel_b1 * s * df) - np.exp(config.kernel_b2 * s * df)
    return amplitude * fluctuation * separation


def frame_roughness(frame: np.ndarray, sample_rate: int,
                    config: PsychoConfig = DEFAULT_PSYCHO_CONFIG) -> float:
    """Roughness as the sum of pairwise peak interactions; 0 below two peaks."""
    peaks = spectral_peaks(frame, sample_rate, config)
    total = 0.0
    for i in range(len(peaks)):
        for j in range(i + 1, len(peaks)):
            total += _pair_roughness(*peaks[i], *peaks[j], config=config)
    return float(total)


def analyze_frame(frame: np.ndarray, sample_rate: int,
                  config: PsychoConfig = DEFAULT_PSYCHO_CONFIG) -> PsychoFrame:
    """Convenience bundle of all three frame features."""
    specific = specific_loudness_bark(frame, sample_rate, config)
    return PsychoFrame(
        loudness=float(np.sum(specific)),
        roughness=frame_roughness(frame, sample_rate, config),
        specific_loudness=specific,
    )
