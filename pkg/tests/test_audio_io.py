"""Tests for WAV I/O, resampling, and normalization."""

from __future__ import annotations

import struct
import wave

import numpy as np
import pytest

from hapticwave.audio_io import (
    AudioClip,
    VibrationSignal,
    load_wav,
    peak_normalize,
    resample,
    resample_samples,
    rms_normalize,
    save_wav,
)
from hapticwave.errors import AudioFormatError, DegenerateSignalError

from conftest import SR, dominant_frequency, sine_clip


class TestLoadSave:
    def test_round_trip_error_bound(self, tmp_path):
        clip = sine_clip(200.0, duration=0.5)
        path = tmp_path / "sine.wav"
        save_wav(clip, path)
        loaded = load_wav(path)
        assert loaded.sample_rate == SR
        assert np.max(np.abs(loaded.samples - clip.samples)) <= 1.0 / 32768.0

    def test_duration_sample_count(self, tmp_path):
        clip = sine_clip(100.0, duration=5.0)
        path = tmp_path / "five.wav"
        save_wav(clip, path)
        assert len(load_wav(path).samples) == 220500

    def test_stereo_mean_mixdown(self, tmp_path):
        path = tmp_path / "stereo.wav"
        frames = 100
        with wave.open(str(path), "wb") as wav:
            wav.setnchannels(2)
            wav.setsampwidth(2)
            wav.setframerate(8000)
            left = int(0.5 * 32768)
            right = int(-0.5 * 32768)
            wav.writeframes(struct.pack(f"<{2 * frames}h", *([left, right] * frames)))
        loaded = load_wav(path)
        assert len(loaded.samples) == frames
        assert np.allclose(loaded.samples, 0.0, atol=1.0 / 32768.0)

    def test_full_scale_negative(self, tmp_path):
        path = tmp_path / "neg.wav"
        with wave.open(str(path), "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(8000)
            wav.writeframes(struct.pack("<h", -32768))
        assert load_wav(path).samples[0] == -1.0

    def test_positive_full_scale_saturates(self, tmp_path):
        path = tmp_path / "pos.wav"
        save_wav(AudioClip(np.array([1.0]), 8000), path)
        with wave.open(str(path), "rb") as wav:
            raw = wav.readframes(1)
        assert struct.unpack("<h", raw)[0] == 32767

    def test_vibration_header_contract(self, tmp_path):
        sig = VibrationSignal(samples=np.zeros(40000) + 0.1, algorithm_tag="hapticgen")
        path = tmp_path / "vib.wav"
        save_wav(sig, path)
        with wave.open(str(path), "rb") as wav:
            assert wav.getframerate() == 8000
            assert wav.getnframes() == 40000
            assert wav.getnchannels() == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wav(tmp_path / "nope.wav")

    def test_non_pcm_rejected(self, tmp_path):
        # hand-rolled RIFF header with format tag 3 (IEEE float)
        path = tmp_path / "float.wav"
        data = struct.pack("<4f", 0.0, 0.1, 0.2, 0.3)
        fmt = struct.pack("<HHIIHH", 3, 1, 8000, 32000, 4, 32)
        body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt \
            + b"data" + struct.pack("<I", len(data)) + data
        path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
        with pytest.raises(AudioFormatError):
            load_wav(path)

    def test_zero_length_rejected(self, tmp_path):
        path = tmp_path / "empty.wav"
        with wave.open(str(path), "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(8000)
        with pytest.raises(AudioFormatError):
            load_wav(path)

    def test_save_is_deterministic(self, tmp_path):
        clip = sine_clip(333.0, duration=0.3)
        p1, p2 = tmp_path / "a.wav", tmp_path / "b.wav"
        save_wav(clip, p1)
        save_wav(clip, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestResample:
    def test_length_ratio(self):
        clip = sine_clip(100.0, duration=5.0)
        out = resample(clip, 24000)
        assert len(out.samples) == 120000
        assert out.sample_rate == 24000

    def test_identity_rate(self):
        clip = sine_clip(100.0, duration=0.2)
        out = resample(clip, SR)
        assert np.array_equal(out.samples, clip.samples)

    def test_tone_survives(self):
        clip = sine_clip(1000.0, duration=1.0)
        out = resample(clip, 8000)
        bin_hz = 8000 / len(out.samples)
        assert abs(dominant_frequency(out.samples, 8000) - 1000.0) <= bin_hz

    def test_linearity(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(4410)
        a = 2.7
        y1 = resample_samples(a * x, SR, 8000)
        y2 = a * resample_samples(x, SR, 8000)
        assert np.max(np.abs(y1 - y2)) <= 1e-9 * max(1.0, np.max(np.abs(y2)))

    def test_alias_rejection_60db(self):
        # a 5 kHz tone is above the 4 kHz target Nyquist; whatever leaks
        # through must sit >= 60 dB below a passband tone of equal level
        n = SR
        t = np.arange(n) / SR
        alias = resample_samples(np.sin(2 * np.pi * 5000 * t), SR, 8000)
        passband = resample_samples(np.sin(2 * np.pi * 1000 * t), SR, 8000)
        w = np.hanning(len(alias))
        leak = np.max(np.abs(np.fft.rfft(alias * w)))
        ref = np.max(np.abs(np.fft.rfft(passband * w)))
        assert 20 * np.log10(leak / ref) <= -60.0

    def test_empty_input(self):
        with pytest.raises(ValueError):
            resample_samples(np.array([]), SR, 8000)


class TestNormalize:
    def test_peak_normalize_scales(self):
        clip = AudioClip(np.array([0.0, 0.25, -0.5]), 8000)
        out = peak_normalize(clip)
        assert np.allclose(out.samples, [0.0, 0.5, -1.0])

    def test_peak_normalize_identity(self):
        clip = AudioClip(np.array([0.5, -1.0, 0.25]), 8000)
        assert np.allclose(peak_normalize(clip).samples, clip.samples)

    def test_peak_normalize_rejects_silence(self):
        with pytest.raises(DegenerateSignalError):
            peak_normalize(AudioClip(np.zeros(100), 8000))

    def test_rms_constant(self):
        out, clipped = rms_normalize(np.full(1000, 0.2), 0.1)
        assert np.allclose(out, 0.1)
        assert clipped == 0.0

    def test_rms_idempotent(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(5000) * 0.1
        once, _ = rms_normalize(x, 0.15)
        twice, _ = rms_normalize(once, 0.15)
        assert np.max(np.abs(twice - once)) < 1e-6

    def test_rms_sine_scale_factor(self):
        # unit sine has RMS 1/sqrt(2); hitting 0.15 needs a 0.15*sqrt(2) gain
        clip = sine_clip(50.0, duration=1.0, amp=1.0)
        out, _ = rms_normalize(clip.samples, 0.15)
        measured = np.max(np.abs(out)) / np.max(np.abs(clip.samples))
        assert abs(measured - 0.15 * np.sqrt(2)) < 1e-3
        assert abs(np.sqrt(np.mean(out**2)) - 0.15) < 1e-6

    def test_rms_rejects_silence(self):
        with pytest.raises(DegenerateSignalError):
            rms_normalize(np.zeros(100), 0.15)

    def test_zero_crossings_preserved(self):
        clip = sine_clip(97.0, duration=0.5, amp=0.3)
        out, _ = rms_normalize(clip.samples, 0.1)
        before = np.flatnonzero(np.diff(np.signbit(clip.samples)))
        after = np.flatnonzero(np.diff(np.signbit(out)))
        assert np.array_equal(before, after)
        scaled = peak_normalize(AudioClip(clip.samples, SR)).samples
        assert np.array_equal(before, np.flatnonzero(np.diff(np.signbit(scaled))))
