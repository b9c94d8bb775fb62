"""Mono PCM16 WAV I/O, band-limited resampling, and amplitude normalization.

Audio is held as float64 numpy arrays in [-1, 1]. Vibration waveforms are a
dedicated type pinned to the 8 kHz output rate.
"""

from __future__ import annotations

import warnings
import wave
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import AudioFormatError, DegenerateSignalError

VIBRATION_RATE = 8000
ALGORITHM_TAGS = ("plm", "fshift", "pitch", "hapticgen", "blended")

# Kaiser beta for the polyphase anti-aliasing filter; beta 7.0 keeps stopband
# rejection comfortably past the 60 dB bound.
_KAISER_BETA = 7.0

# Scaling a signal to a target RMS may push samples past full scale; they are
# clamped and the affected fraction is reported. Warn when it stops being rare.
CLIP_WARN_FRACTION = 1e-3


@dataclass
class AudioClip:
    """Mono audio: samples in [-1, 1] at an arbitrary sample rate."""

    samples: np.ndarray
    sample_rate: int
    source_id: str | None = None

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class VibrationSignal:
    """Mono vibrotactile waveform at the fixed 8 kHz output rate."""

    samples: np.ndarray
    algorithm_tag: str
    clipped_fraction: float = 0.0
    sample_rate: int = VIBRATION_RATE

    def __post_init__(self) -> None:
        if self.sample_rate != VIBRATION_RATE:
            raise ValueError(f"vibration sample rate must be {VIBRATION_RATE}")
        if self.algorithm_tag not in ALGORITHM_TAGS:
            raise ValueError(f"unknown algorithm tag: {self.algorithm_tag!r}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def load_wav(path: str | Path) -> AudioClip:
    """Load a PCM16 WAV file as a mono AudioClip scaled to [-1, 1].

    Multi-channel input is mixed down by arithmetic mean over channels.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        with wave.open(str(path), "rb") as wav:
            n_channels = wav.getnchannels()
            width = wav.getsampwidth()
            rate = wav.getframerate()
            n_frames = wav.getnframes()
            raw = wav.readframes(n_frames)
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: {exc}") from exc
    if width != 2:
        raise AudioFormatError(f"{path}: expected 16-bit PCM, got {8 * width}-bit")
    if n_frames == 0 or not raw:
        raise AudioFormatError(f"{path}: empty data chunk")

    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return AudioClip(samples=data, sample_rate=rate, source_id=path.stem)


def save_wav(signal: AudioClip | VibrationSignal, path: str | Path) -> None:
    """Write a signal as mono 16-bit PCM at its own sample rate.

    Values are quantized with saturation, so a sample at exactly +1.0 is
    stored as 32767 and round-trips within 1/32768.
    """
    quantized = np.clip(np.rint(signal.samples * 32768.0), -32768, 32767)
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(signal.sample_rate)
        wav.writeframes(quantized.astype("<i2").tobytes())


def resample_samples(samples: np.ndarray, source_rate: int, target_rate: int) -> np.ndarray:
    """Band-limited polyphase resampling of a raw sample array.

    Output length is round(len * target / source); identical rates return the
    input unchanged.
    """
    if len(samples) == 0:
        raise ValueError("cannot resample an empty signal")
    if target_rate <= 0 or source_rate <= 0:
        raise ValueError("sample rates must be positive")
    if target_rate == source_rate:
        return samples

    g = gcd(source_rate, target_rate)
    up, down = target_rate // g, source_rate // g
    out = resample_poly(samples, up, down, window=("kaiser", _KAISER_BETA))
    want = int(round(len(samples) * target_rate / source_rate))
    if len(out) > want:
        out = out[:want]
    elif len(out) < want:
        out = np.pad(out, (0, want - len(out)))
    return out


def resample_by_ratio(samples: np.ndarray, ratio: float, max_denominator: int = 1000) -> np.ndarray:
    """Resample by an arbitrary length ratio via a rational approximation."""
    frac = Fraction(ratio).limit_denominator(max_denominator)
    out = resample_poly(samples, frac.numerator, frac.denominator, window=("kaiser", _KAISER_BETA))
    want = int(round(len(samples) * ratio))
    if len(out) > want:
        out = out[:want]
    elif len(out) < want:
        out = np.pad(out, (0, want - len(out)))
    return out


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """Resample a clip to a new rate (see resample_samples)."""
    out = resample_samples(clip.samples, clip.sample_rate, target_rate)
    return AudioClip(samples=out, sample_rate=target_rate, source_id=clip.source_id)


def peak_normalize(clip: AudioClip) -> AudioClip:
    """Scale so the largest absolute sample is exactly 1 (0 dB headroom)."""
    peak = float(np.max(np.abs(clip.samples))) if len(clip.samples) else 0.0
    if peak == 0.0:
        raise DegenerateSignalError("degenerate signal: all samples are zero")
    return AudioClip(
        samples=clip.samples / peak,
        sample_rate=clip.sample_rate,
        source_id=clip.source_id,
    )


def rms_normalize(samples: np.ndarray, target_rms: float) -> tuple[np.ndarray, float]:
    """Scale a waveform to a target RMS, clamping to [-1, 1].

    Returns (waveform, clipped_fraction). The clipped fraction is the share of
    samples that hit the clamp; a warning is emitted when it exceeds
    CLIP_WARN_FRACTION.
    """
    if target_rms <= 0:
        raise ValueError("target_rms must be positive")
    rms = float(np.sqrt(np.mean(np.square(samples)))) if len(samples) else 0.0
    if rms < 1e-12:
        raise DegenerateSignalError("degenerate signal: RMS is zero")
    scaled = samples * (target_rms / rms)
    clipped = np.count_nonzero(np.abs(scaled) > 1.0)
    fraction = clipped / len(scaled)
    if fraction > CLIP_WARN_FRACTION:
        warnings.warn(
            f"rms_normalize clamped {fraction:.2%} of samples", RuntimeWarning, stacklevel=2
        )
    return np.clip(scaled, -1.0, 1.0), fraction
