"""Human-rating ingestion and aggregation, target blending, reconstruction metrics.

Ratings arrive as one row per (clip, algorithm, rater); a clip's rating for an
algorithm is the mean over its raters. Aggregation reports per-algorithm means
and SDs at the category, class, or clip level, plus winners and clip-level
winner tallies (ties are reported, never broken).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .audio_io import VibrationSignal
from .curation import DatasetManifest
from .dsp import mel_filterbank, stft
from .errors import SchemaError

RATING_ALGORITHMS = ("plm", "fshift", "pitch", "hapticgen")
RATINGS_HEADER = ["clip_id", "algorithm", "rater_id", "rating"]

_LOG_EPS = 1e-7
STFT_LOSS_FFT_SIZES = (1024, 512, 256)


@dataclass
class RatingRecord:
    clip_id: str
    algorithm: str
    rater_id: str
    rating: float


@dataclass
class RatingsTable:
    records: list[RatingRecord]

    def __len__(self) -> int:
        return len(self.records)

    def clip_means(self) -> dict[tuple[str, str], float]:
        """Mean rating per (clip_id, algorithm) over raters."""
        sums: dict[tuple[str, str], list[float]] = {}
        for r in self.records:
            sums.setdefault((r.clip_id, r.algorithm), []).append(r.rating)
        return {key: float(np.mean(vals)) for key, vals in sums.items()}

    def clip_ids(self) -> list[str]:
        return sorted({r.clip_id for r in self.records})


def load_ratings(path: str | Path, column_map: Mapping[str, str] | None = None) -> RatingsTable:
    """Read a ratings CSV; column_map maps canonical names to actual headers.

    The canonical schema is clip_id,algorithm,rater_id,rating. An external
    export with different column names can be ingested by supplying e.g.
    {"clip_id": "sound", "rating": "score"}.
    """
    path = Path(path)
    resolve = dict(zip(RATINGS_HEADER, RATINGS_HEADER))
    if column_map:
        resolve.update(column_map)
    records: list[RatingRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [resolve[c] for c in RATINGS_HEADER
                   if resolve[c] not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        for row_no, row in enumerate(reader, start=2):
            algorithm = row[resolve["algorithm"]]
            if algorithm not in RATING_ALGORITHMS:
                raise SchemaError(f"{path}:{row_no}: unknown algorithm {algorithm!r}")
            try:
                rating = float(row[resolve["rating"]])
            except ValueError as exc:
                raise SchemaError(f"{path}:{row_no}: {exc}") from exc
            if not 0.0 <= rating <= 100.0:
                raise SchemaError(f"{path}:{row_no}: rating {rating} outside [0, 100]")
            records.append(RatingRecord(row[resolve["clip_id"]], algorithm,
                                        row[resolve["rater_id"]], rating))
    if not records:
        raise SchemaError(f"{path}: no rating rows")
    return RatingsTable(records)


@dataclass
class GroupStats:
    mean: dict[str, float]   # algorithm -> mean rating
    sd: dict[str, float]     # algorithm -> SD over clips (0 when n < 2)
    winners: tuple[str, ...]  # all algorithms sharing the top mean
    n_clips: int


@dataclass
class AggregateReport:
    level: str  # "category" | "class" | "clip"
    groups: dict[str | int, GroupStats]
    overall: GroupStats
    winner_counts: dict[str, int]  # clip-level winner tallies (ties count both)
    tie_count: int

    def to_json(self) -> str:
        payload = {
            "level": self.level,
            "overall": _group_to_dict(self.overall),
            "groups": {str(k): _group_to_dict(g) for k, g in self.groups.items()},
            "winner_counts": self.winner_counts,
            "tie_count": self.tie_count,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def format_table(self) -> str:
        lines = []
        header = f"{'group':>12} " + " ".join(f"{a:>12}" for a in RATING_ALGORITHMS) + "   winner"
        lines.append(header)
        for key in sorted(self.groups, key=str):
            g = self.groups[key]
            cells = " ".join(f"{g.mean[a]:>7.2f}({g.sd[a]:4.1f})" for a in RATING_ALGORITHMS)
            lines.append(f"{str(key):>12} {cells}   {'/'.join(g.winners)}")
        o = self.overall
        cells = " ".join(f"{o.mean[a]:>7.2f}({o.sd[a]:4.1f})" for a in RATING_ALGORITHMS)
        lines.append(f"{'overall':>12} {cells}   {'/'.join(o.winners)}")
        counts = ", ".join(f"{a}={self.winner_counts[a]}" for a in RATING_ALGORITHMS)
        lines.append(f"clip-level winners: {counts}, ties={self.tie_count}")
        return "\n".join(lines)


def _group_to_dict(g: GroupStats) -> dict:
    return {"mean": g.mean, "sd": g.sd, "winners": list(g.winners), "n_clips": g.n_clips}


def _stats_for(clip_matrix: np.ndarray) -> GroupStats:
    """clip_matrix: (n_clips, n_algorithms) of clip-level ratings."""
    means = clip_matrix.mean(axis=0)
    if clip_matrix.shape[0] > 1:
        sds = clip_matrix.std(axis=0, ddof=1)
    else:
        sds = np.zeros(clip_matrix.shape[1])
    top = means.max()
    winners = tuple(a for a, m in zip(RATING_ALGORITHMS, means) if m == top)
    return GroupStats(
        mean=dict(zip(RATING_ALGORITHMS, means.tolist())),
        sd=dict(zip(RATING_ALGORITHMS, sds.tolist())),
        winners=winners,
        n_clips=clip_matrix.shape[0],
    )


def aggregate(table: RatingsTable, manifest: DatasetManifest, level: str) -> AggregateReport:
    """Aggregate clip ratings at the category, class, or clip level."""
    if level not in ("category", "class", "clip"):
        raise ValueError(f"unknown aggregation level: {level!r}")
    by_id = manifest.by_id()
    clip_means = table.clip_means()
    clip_ids = table.clip_ids()
    for cid in clip_ids:
        if cid not in by_id:
            raise SchemaError(f"clip_id {cid!r} from ratings is not in the manifest")

    matrix = np.empty((len(clip_ids), len(RATING_ALGORITHMS)))
    for i, cid in enumerate(clip_ids):
        for j, algo in enumerate(RATING_ALGORITHMS):
            try:
                matrix[i, j] = clip_means[(cid, algo)]
            except KeyError:
                raise SchemaError(f"clip {cid!r} has no rating for {algo!r}") from None

    winner_counts = {a: 0 for a in RATING_ALGORITHMS}
    tie_count = 0
    for i in range(len(clip_ids)):
        top = matrix[i].max()
        winners = [a for a, v in zip(RATING_ALGORITHMS, matrix[i]) if v == top]
        if len(winners) > 1:
            tie_count += 1
        for a in winners:
            winner_counts[a] += 1

    def group_key(cid: str):
        entry = by_id[cid]
        if level == "category":
            return entry.category_id
        if level == "class":
            return entry.class_id
        return cid

    group_rows: dict[str | int, list[int]] = {}
    for i, cid in enumerate(clip_ids):
        group_rows.setdefault(group_key(cid), []).append(i)
    groups = {key: _stats_for(matrix[rows]) for key, rows in sorted(
        group_rows.items(), key=lambda kv: str(kv[0]))}

    return AggregateReport(
        level=level,
        groups=groups,
        overall=_stats_for(matrix),
        winner_counts=winner_counts,
        tie_count=tie_count,
    )


# ---------------------------------------------------------------------------
# preference-weighted blending
# ---------------------------------------------------------------------------

def blend_targets(refs: Sequence[VibrationSignal], ratings: Sequence[float]) -> VibrationSignal:
    """Rating-weighted average of reference vibrations.

    Weights are the ratings normalized to sum to one, so the output is a
    sample-wise convex combination of the references.
    """
    if len(refs) != 4 or len(ratings) != 4:
        raise ValueError("expected exactly four references and four ratings")
    lengths = {len(r.samples) for r in refs}
    if len(lengths) != 1:
        raise ValueError("reference vibrations must have equal length")
    rates = {r.sample_rate for r in refs}
    if len(rates) != 1:
        raise ValueError("reference vibrations must share a sample rate")
    weights = np.asarray(ratings, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("ratings must be non-negative")
    total = weights.sum()
    if total <= 0:
        raise ValueError("ratings must not all be zero")
    weights = weights / total
    out = np.zeros(lengths.pop())
    for w, ref in zip(weights, refs):
        out += w * ref.samples
    return VibrationSignal(samples=out, algorithm_tag="blended")


# ---------------------------------------------------------------------------
# reconstruction metrics
# ---------------------------------------------------------------------------

@dataclass
class MetricReport:
    mse: float
    stft_loss: float
    mel_l1: float
    amp_loss: float
    rmse: float

    def to_dict(self) -> dict[str, float]:
        return {"mse": self.mse, "stft_loss": self.stft_loss, "mel_l1": self.mel_l1,
                "amp_loss": self.amp_loss, "rmse": self.rmse}


def _as_samples(signal) -> np.ndarray:
    if isinstance(signal, VibrationSignal):
        return signal.samples
    return np.asarray(signal, dtype=np.float64)


def _padded_stft_mag(x: np.ndarray, fft_size: int, sample_rate: int) -> np.ndarray:
    if len(x) < fft_size:
        x = np.pad(x, (0, fft_size - len(x)))
    return stft(x, fft_size, fft_size // 4, sample_rate).magnitudes


def _stft_resolution_loss(pred: np.ndarray, target: np.ndarray, fft_size: int,
                          sample_rate: int) -> float:
    mag_p = _padded_stft_mag(pred, fft_size, sample_rate)
    mag_t = _padded_stft_mag(target, fft_size, sample_rate)
    norm_t = np.linalg.norm(mag_t)
    convergence = np.linalg.norm(mag_t - mag_p) / max(norm_t, _LOG_EPS)
    log_l1 = float(np.mean(np.abs(np.log(mag_t + _LOG_EPS) - np.log(mag_p + _LOG_EPS))))
    return float(convergence) + log_l1


def reconstruction_metrics(pred, target, sample_rate: int = 8000,
                           n_mels: int = 64) -> MetricReport:
    """Distance components between a predicted and a target waveform.

    mse/rmse are plain time-domain errors; stft_loss averages spectral
    convergence plus log-magnitude L1 over FFT sizes 1024/512/256; mel_l1 is
    the mean absolute log-mel difference (64 bands to Nyquist); amp_loss is
    the absolute RMS difference.
    """
    p = _as_samples(pred)
    t = _as_samples(target)
    if isinstance(pred, VibrationSignal) and isinstance(target, VibrationSignal):
        if pred.sample_rate != target.sample_rate:
            raise ValueError("sample rates differ")
        sample_rate = pred.sample_rate
    if len(p) != len(t):
        raise ValueError(f"length mismatch: {len(p)} vs {len(t)}")
    if len(p) == 0:
        raise ValueError("empty signals")

    diff = p - t
    mse = float(np.mean(diff * diff))
    rmse = float(np.sqrt(mse))
    amp_loss = float(abs(np.sqrt(np.mean(p * p)) - np.sqrt(np.mean(t * t))))

    stft_loss = float(np.mean([
        _stft_resolution_loss(p, t, n, sample_rate) for n in STFT_LOSS_FFT_SIZES
    ]))

    fft_size = 1024
    bank = mel_filterbank(n_mels, fft_size, sample_rate)
    mel_p = np.log(_padded_stft_mag(p, fft_size, sample_rate) ** 2 @ bank.T + _LOG_EPS)
    mel_t = np.log(_padded_stft_mag(t, fft_size, sample_rate) ** 2 @ bank.T + _LOG_EPS)
    mel_l1 = float(np.mean(np.abs(mel_p - mel_t)))

    return MetricReport(mse=mse, stft_loss=stft_loss, mel_l1=mel_l1,
                        amp_loss=amp_loss, rmse=rmse)


@dataclass
class RmseComparison:
    rmse: dict[str, float]
    best: str  # label with the smallest RMSE

    def to_json(self) -> str:
        return json.dumps({"rmse": self.rmse, "best": self.best},
                          indent=2, sort_keys=True)


def compare_to_references(generated, refs: Mapping[str, VibrationSignal | np.ndarray],
                          ) -> RmseComparison:
    """RMSE of a generated waveform against each labeled reference.

    Mismatched lengths are reconciled by zero-padding the shorter signal.
    """
    if not refs:
        raise ValueError("empty reference set")
    gen = _as_samples(generated)
    out: dict[str, float] = {}
    for label in sorted(refs):
        ref = _as_samples(refs[label])
        n = max(len(gen), len(ref))
        a = np.pad(gen, (0, n - len(gen)))
        b = np.pad(ref, (0, n - len(ref)))
        out[label] = float(np.sqrt(np.mean((a - b) ** 2)))
    best = min(out, key=lambda k: (out[k], k))
    return RmseComparison(rmse=out, best=best)
