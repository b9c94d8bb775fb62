"""End-to-end tests of the command-line surface and its exit-code contract."""

from __future__ import annotations

import json
import wave

import numpy as np
import pytest

from hapticwave.audio_io import AudioClip, save_wav
from hapticwave.cli import run
from hapticwave.curation import DatasetManifest, ManifestEntry, write_manifest
from hapticwave.fixtures import manifest_fixture_path, ratings_fixture_path

from conftest import SR, sine_clip


@pytest.fixture
def tone_wav(tmp_path):
    path = tmp_path / "tone.wav"
    save_wav(sine_clip(300.0, duration=1.0), path)
    return path


def small_audio_set(tmp_path, n_classes=2, per_class=6, sr=22050):
    """Tiny labeled WAV collection plus its manifest, for curate/batch."""
    entries = []
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir(exist_ok=True)
    for class_id in range(n_classes):
        for k in range(per_class):
            rng = np.random.default_rng(100 * class_id + k)
            t = np.arange(sr) / sr
            freq = 150.0 + 90.0 * class_id + 15.0 * k
            x = 0.5 * np.sin(2 * np.pi * freq * t) + 0.05 * rng.standard_normal(sr)
            clip_id = f"{class_id:02d}-{k:02d}"
            path = audio_dir / f"{clip_id}.wav"
            save_wav(AudioClip(0.8 * x / np.max(np.abs(x)), sr), path)
            entries.append(ManifestEntry(clip_id, str(path), class_id,
                                         f"class{class_id}", class_id // 10 + 1))
    manifest_path = tmp_path / "manifest.csv"
    write_manifest(DatasetManifest(entries), manifest_path)
    return manifest_path


class TestConvert:
    def test_produces_vibration_wav(self, tone_wav, tmp_path):
        out = tmp_path / "vib.wav"
        assert run(["convert", "--algo", "hapticgen", "--in", str(tone_wav),
                    "--out", str(out)]) == 0
        with wave.open(str(out), "rb") as wav:
            assert wav.getframerate() == 8000
            assert wav.getnchannels() == 1
            assert wav.getsampwidth() == 2
            assert wav.getnframes() == 8000

    def test_config_override(self, tone_wav, tmp_path):
        out = tmp_path / "vib.wav"
        code = run(["convert", "--algo", "hapticgen", "--in", str(tone_wav),
                    "--out", str(out), "--set", "target_segment_rms=0.05"])
        assert code == 0
        with wave.open(str(out), "rb") as wav:
            data = np.frombuffer(wav.readframes(wav.getnframes()), dtype="<i2")
        rms = np.sqrt(np.mean((data / 32768.0) ** 2))
        assert rms < 0.1

    def test_missing_input_is_validation_error(self, tmp_path):
        assert run(["convert", "--algo", "plm", "--in", str(tmp_path / "no.wav"),
                    "--out", str(tmp_path / "o.wav")]) == 1

    def test_silent_input_is_runtime_error(self, tmp_path):
        silent = tmp_path / "silent.wav"
        save_wav(AudioClip(np.zeros(SR), SR), silent)
        assert run(["convert", "--algo", "hapticgen", "--in", str(silent),
                    "--out", str(tmp_path / "o.wav")]) == 2

    def test_unknown_flag_rejected(self, tone_wav, tmp_path):
        assert run(["convert", "--algo", "plm", "--in", str(tone_wav),
                    "--out", str(tmp_path / "o.wav"), "--frobnicate"]) == 1


class TestBatch:
    def test_emits_n_times_k_files(self, tmp_path):
        manifest = small_audio_set(tmp_path, n_classes=1, per_class=2)
        out_dir = tmp_path / "out"
        code = run(["batch", "--manifest", str(manifest),
                    "--algos", "hapticgen,fshift", "--out-dir", str(out_dir),
                    "--workers", "1"])
        assert code == 0
        produced = sorted(p.name for p in out_dir.glob("*.wav"))
        assert produced == ["00-00.fshift.wav", "00-00.hapticgen.wav",
                            "00-01.fshift.wav", "00-01.hapticgen.wav"]


class TestFeatures:
    def test_writes_feature_json(self, tone_wav, tmp_path):
        out = tmp_path / "features.json"
        assert run(["features", "--in", str(tone_wav), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        vec = payload["tone"]
        assert len(vec["mfcc"]) == 13
        assert len(vec["chroma"]) == 12
        assert abs(vec["centroid"] - 300.0) < 10.0


class TestCurate:
    def test_seeded_runs_are_byte_identical(self, tmp_path):
        manifest = small_audio_set(tmp_path)
        out1, out2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
        base = ["curate", "--manifest", str(manifest), "--per-class", "4",
                "--k", "3", "--seed", "42"]
        assert run(base + ["--out", str(out1)]) == 0
        assert run(base + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_selects_per_class_count(self, tmp_path):
        manifest = small_audio_set(tmp_path)
        out = tmp_path / "curated.csv"
        assert run(["curate", "--manifest", str(manifest), "--per-class", "4",
                    "--k", "3", "--seed", "7", "--out", str(out)]) == 0
        rows = out.read_text().strip().splitlines()[1:]
        assert len(rows) == 8  # 2 classes x 4


class TestAugment:
    def test_seeded_determinism(self, tone_wav, tmp_path):
        out1, out2 = tmp_path / "a1.wav", tmp_path / "a2.wav"
        assert run(["augment", "--in", str(tone_wav), "--seed", "5",
                    "--out", str(out1)]) == 0
        assert run(["augment", "--in", str(tone_wav), "--seed", "5",
                    "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestBlend:
    def test_one_hot_blend(self, tmp_path):
        rng = np.random.default_rng(3)
        paths = []
        for i in range(4):
            sig = AudioClip(rng.uniform(-0.5, 0.5, 8000), 8000)
            path = tmp_path / f"ref{i}.wav"
            save_wav(sig, path)
            paths.append(str(path))
        out = tmp_path / "blend.wav"
        code = run(["blend", "--refs", *paths, "--ratings", "100", "0", "0", "0",
                    "--out", str(out)])
        assert code == 0
        with wave.open(str(out), "rb") as wav, wave.open(paths[0], "rb") as ref:
            assert wav.readframes(8000) == ref.readframes(8000)


class TestMetrics:
    def test_report_json(self, tmp_path):
        rng = np.random.default_rng(4)
        a = AudioClip(rng.uniform(-0.5, 0.5, 8000), 8000)
        pa, pt, out = tmp_path / "p.wav", tmp_path / "t.wav", tmp_path / "m.json"
        save_wav(a, pa)
        save_wav(a, pt)
        assert run(["metrics", "--pred", str(pa), "--target", str(pt),
                    "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert set(report) == {"mse", "stft_loss", "mel_l1", "amp_loss", "rmse"}
        assert report["mse"] <= 1e-8


class TestReport:
    def test_class_level_on_bundled_fixture(self, capsys, tmp_path):
        json_out = tmp_path / "report.json"
        code = run(["report", "--ratings", str(ratings_fixture_path()),
                    "--manifest", str(manifest_fixture_path()),
                    "--level", "class", "--json", str(json_out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "ties=8" in printed
        payload = json.loads(json_out.read_text())
        assert payload["groups"]["0"]["winners"] == ["pitch"]
        assert payload["groups"]["10"]["winners"] == ["fshift"]
        assert payload["groups"]["11"]["winners"] == ["hapticgen"]

    def test_bad_schema_is_validation_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("clip_id,algorithm,rater_id,rating\nc1,pitch,r1,140\n")
        assert run(["report", "--ratings", str(bad),
                    "--manifest", str(manifest_fixture_path()),
                    "--level", "class"]) == 1


class TestBench:
    def test_validation_on_wrong_corpus(self, tmp_path):
        clip_dir = tmp_path / "clips"
        clip_dir.mkdir()
        save_wav(sine_clip(200.0, duration=5.0, sr=32000), clip_dir / "only.wav")
        assert run(["bench", "--clips", str(clip_dir), "--durations", "1",
                    "--algos", "hapticgen"]) == 1
