"""Tests for the benchmark corpus protocol and timing harness."""

from __future__ import annotations

import numpy as np
import pytest

from hapticwave.audio_io import AudioClip
from hapticwave.bench import BenchRunError, build_bench_corpus, run_bench
from hapticwave.errors import ProtocolError

BENCH_SR = 32000  # keeps 10 ms windows above the psychoacoustic frame minimum


def make_bench_clips(count: int = 50, sr: int = BENCH_SR) -> list[AudioClip]:
    clips = []
    for i in range(count):
        rng = np.random.default_rng(7000 + i)
        t = np.arange(5 * sr) / sr
        x = (0.5 + 0.4 * np.sin(2 * np.pi * (1 + i % 4) * t)) \
            * np.sin(2 * np.pi * (200 + 37 * (i % 7)) * t)
        x += 0.002 * rng.standard_normal(len(t))
        clips.append(AudioClip(0.8 * x / np.max(np.abs(x)), sr, f"bench{i:02d}"))
    return clips


@pytest.fixture(scope="module")
def bench_clips() -> list[AudioClip]:
    return make_bench_clips()


class TestCorpus:
    def test_set_sizes(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        sizes = {d: len(v) for d, v in corpus.items()}
        assert sizes == {1: 250, 2: 100, 5: 50, 10: 50, 20: 50}

    def test_one_second_segments_concatenate_losslessly(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        source = bench_clips[0]
        segments = [c for c in corpus[1] if c.source_id.startswith("bench00#")]
        joined = np.concatenate([c.samples for c in segments])
        assert np.array_equal(joined, source.samples)

    def test_two_second_segments_drop_last_second(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        segs = [c for c in corpus[2] if c.source_id.startswith("bench00#")]
        assert len(segs) == 2
        assert all(len(c.samples) == 2 * BENCH_SR for c in segs)

    def test_repeated_clip_halves_identical(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        ten = corpus[10][0].samples
        half = len(ten) // 2
        assert np.array_equal(ten[:half], ten[half:])

    def test_wrong_count_rejected(self, bench_clips):
        with pytest.raises(ProtocolError):
            build_bench_corpus(bench_clips[:49])

    def test_wrong_duration_rejected(self, bench_clips):
        short = AudioClip(np.ones(BENCH_SR), BENCH_SR, "short")
        with pytest.raises(ProtocolError):
            build_bench_corpus(bench_clips[:49] + [short])


class TestRunBench:
    def test_result_grid(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        subset = {1: corpus[1]}
        results = run_bench(subset, algorithms=("hapticgen",), warmup=1)
        assert len(results) == 1
        row = results[0]
        assert row.clip_count == 250
        assert row.mean_latency_s > 0.0
        assert row.sd_latency_s >= 0.0

    def test_latency_monotone_in_duration(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        subset = {1: corpus[1], 2: corpus[2], 5: corpus[5]}
        results = run_bench(subset, algorithms=("hapticgen",), warmup=1)
        latencies = [r.mean_latency_s for r in sorted(results, key=lambda r: r.duration_s)]
        assert latencies == sorted(latencies)

    def test_failure_reports_clip_id(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        silent = AudioClip(np.zeros(BENCH_SR), BENCH_SR, "dead-clip")
        broken = {1: [silent] + corpus[1][:249]}
        with pytest.raises(BenchRunError) as err:
            run_bench(broken, algorithms=("hapticgen",), warmup=1)
        assert "dead-clip" in str(err.value)

    def test_warmup_validated(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        with pytest.raises(ValueError):
            run_bench({1: corpus[1]}, algorithms=("hapticgen",), warmup=0)

    def test_unknown_algorithm(self, bench_clips):
        corpus = build_bench_corpus(bench_clips)
        with pytest.raises(ValueError):
            run_bench({1: corpus[1]}, algorithms=("nope",), warmup=1)
