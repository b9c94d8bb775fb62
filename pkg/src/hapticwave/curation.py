"""Acoustic feature vectors, seeded k-means sampling, augmentation, manifests.

Supports picking an acoustically diverse subset of a labeled clip collection:
31-dimensional per-clip descriptors, per-class k-means clustering, and
proportional stratified sampling from the clusters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .audio_io import AudioClip
from .dsp import hann_window, mel_filterbank, pitch_shift
from .errors import SchemaError

N_FEATURES = 31
TEMPO_MIN_BPM = 30.0
TEMPO_MAX_BPM = 300.0

FEATURE_NAMES = (
    ["centroid", "rolloff", "bandwidth", "rms_energy", "zcr", "tempo"]
    + [f"mfcc_{i}" for i in range(1, 14)]
    + [f"chroma_{i}" for i in range(12)]
)


@dataclass
class FeatureVector:
    """Temporally averaged acoustic descriptor of one clip (31 dimensions)."""

    centroid: float
    rolloff: float
    bandwidth: float
    rms_energy: float
    zcr: float
    tempo: float
    mfcc: np.ndarray    # 13 coefficients
    chroma: np.ndarray  # 12 pitch classes, L2-normalized

    def as_array(self) -> np.ndarray:
        return np.concatenate([
            [self.centroid, self.rolloff, self.bandwidth,
             self.rms_energy, self.zcr, self.tempo],
            self.mfcc, self.chroma,
        ])

    def to_dict(self) -> dict:
        return {
            "centroid": self.centroid, "rolloff": self.rolloff,
            "bandwidth": self.bandwidth, "rms_energy": self.rms_energy,
            "zcr": self.zcr, "tempo": self.tempo,
            "mfcc": [float(v) for v in self.mfcc],
            "chroma": [float(v) for v in self.chroma],
        }


def _spectra(samples: np.ndarray, fft_size: int, hop: int) -> np.ndarray:
    n_frames = 1 + (len(samples) - fft_size) // hop
    idx = np.arange(fft_size)[None, :] + hop * np.arange(n_frames)[:, None]
    return np.abs(np.fft.rfft(samples[idx] * hann_window(fft_size)[None, :], axis=1))


def _tempo_bpm(onset_env: np.ndarray, frame_rate: float) -> float:
    """Tempo from the autocorrelation of the onset envelope, clamped to range."""
    env = onset_env - onset_env.mean()
    if len(env) < 4 or not np.any(env):
        return 120.0
    ac = np.correlate(env, env, mode="full")[len(env) - 1:]
    lag_min = max(1, int(np.ceil(frame_rate * 60.0 / TEMPO_MAX_BPM)))
    lag_max = min(len(ac) - 1, int(np.floor(frame_rate * 60.0 / TEMPO_MIN_BPM)))
    if lag_max <= lag_min:
        return 120.0
    window = ac[lag_min:lag_max + 1]
    if window.max() <= 0:
        return 120.0
    lag = lag_min + int(np.argmax(window))
    return float(np.clip(frame_rate * 60.0 / lag, TEMPO_MIN_BPM, TEMPO_MAX_BPM))


def _pitch_class_map(freqs: np.ndarray) -> np.ndarray:
    """Map bin frequencies to pitch classes 0..11 (C = 0); DC and near-DC -> -1."""
    classes = np.full(len(freqs), -1, dtype=int)
    valid = freqs > 26.0  # below ~A0 the class assignment is meaningless
    semis = 12.0 * np.log2(freqs[valid] / 440.0)
    classes[valid] = (np.round(semis).astype(int) + 9) % 12
    return classes


def extract_features(clip: AudioClip, fft_size: int = 2048, hop: int = 512) -> FeatureVector:
    """Compute the 31-dimensional averaged descriptor for one clip."""
    if clip.duration < 1.0:
        raise ValueError("feature extraction needs at least 1 s of audio")
    samples = np.asarray(clip.samples, dtype=np.float64)
    spectra = _spectra(samples, fft_size, hop)
    freqs = np.fft.rfftfreq(fft_size, 1.0 / clip.sample_rate)
    mag_sum = np.maximum(spectra.sum(axis=1), 1e-12)

    centroid_t = (spectra @ freqs) / mag_sum
    cumulative = np.cumsum(spectra, axis=1)
    rolloff_idx = np.argmax(cumulative >= 0.85 * mag_sum[:, None], axis=1)
    rolloff_t = freqs[rolloff_idx]
    spread = (freqs[None, :] - centroid_t[:, None]) ** 2
    bandwidth_t = np.sqrt(np.sum(spectra * spread, axis=1) / mag_sum)

    n_frames = spectra.shape[0]
    idx = np.arange(fft_size)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = samples[idx]
    rms_t = np.sqrt(np.mean(frames * frames, axis=1))
    zcr_t = np.mean(np.abs(np.diff(np.signbit(frames), axis=1)), axis=1)

    flux = np.sum(np.maximum(spectra[1:] - spectra[:-1], 0.0), axis=1)
    tempo = _tempo_bpm(flux, clip.sample_rate / hop)

    bank = mel_filterbank(26, fft_size, clip.sample_rate)
    mel_energy = np.log(spectra ** 2 @ bank.T + 1e-10)
    # orthonormal DCT-II over the 26 log-mel energies; keep coefficients 1..13
    m = np.arange(26)
    basis = np.cos(np.pi * (m[None, :] + 0.5) * np.arange(26)[:, None] / 26.0)
    basis *= np.sqrt(2.0 / 26.0)
    basis[0] /= np.sqrt(2.0)
    mfcc_t = mel_energy @ basis.T
    mfcc = mfcc_t[:, 1:14].mean(axis=0)

    classes = _pitch_class_map(freqs)
    chroma = np.zeros(12)
    for pc in range(12):
        cols = classes == pc
        if np.any(cols):
            chroma[pc] = spectra[:, cols].sum(axis=1).mean()
    norm = np.linalg.norm(chroma)
    if norm > 0:
        chroma = chroma / norm

    return FeatureVector(
        centroid=float(centroid_t.mean()),
        rolloff=float(rolloff_t.mean()),
        bandwidth=float(bandwidth_t.mean()),
        rms_energy=float(rms_t.mean()),
        zcr=float(zcr_t.mean()),
        tempo=tempo,
        mfcc=mfcc,
        chroma=chroma,
    )


# ---------------------------------------------------------------------------
# k-means clustering and stratified sampling
# ---------------------------------------------------------------------------

@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray  # in the original (unstandardized) feature space
    inertia_history: list[float]
    ids: list[str] | None = None

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]

    def assignment(self) -> dict[str, int]:
        if self.ids is None:
            raise ValueError("this clustering was built from a bare matrix, not ids")
        return {cid: int(lab) for cid, lab in zip(self.ids, self.labels)}


def _standardize(points: np.ndarray) -> np.ndarray:
    mean = points.mean(axis=0)
    std = points.std(axis=0)
    std[std == 0] = 1.0
    return (points - mean) / std


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    dist2 = np.sum((points - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = dist2.sum()
        if total <= 0:
            centers[i] = points[rng.integers(n)]
            continue
        probs = dist2 / total
        centers[i] = points[rng.choice(n, p=probs)]
        dist2 = np.minimum(dist2, np.sum((points - centers[i]) ** 2, axis=1))
    return centers


def kmeans(vectors: np.ndarray | Mapping[str, FeatureVector | np.ndarray],
           k: int, seed: int, max_iter: int = 300) -> KMeansResult:
    """Seeded Lloyd's algorithm with k-means++ initialization.

    Features are z-score standardized per dimension before clustering; the
    returned centroids are mapped back to the original feature space. The
    recorded inertia history is non-increasing.
    """
    ids: list[str] | None = None
    if isinstance(vectors, Mapping):
        ids = sorted(vectors)
        rows = []
        for cid in ids:
            v = vectors[cid]
            rows.append(v.as_array() if isinstance(v, FeatureVector) else np.asarray(v))
        points = np.asarray(rows, dtype=np.float64)
    else:
        points = np.asarray(vectors, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("expected a 2-D matrix of feature vectors")
    n = len(points)
    if n < k:
        raise ValueError(f"cannot form {k} clusters from {n} points")

    std_points = _standardize(points)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(std_points, k, rng)

    labels = np.zeros(n, dtype=int)
    history: list[float] = []
    for _ in range(max_iter):
        d2 = np.sum((std_points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(n), new_labels].sum()))
        for c in range(k):
            members = std_points[new_labels == c]
            if len(members):
                centers[c] = members.mean(axis=0)
        if np.array_equal(new_labels, labels) and len(history) > 1:
            labels = new_labels
            break
        labels = new_labels

    mean = points.mean(axis=0)
    std = points.std(axis=0)
    std[std == 0] = 1.0
    return KMeansResult(labels=labels, centroids=centers * std + mean,
                        inertia_history=history, ids=ids)


def stratified_sample(assignment: Mapping[str, int], per_class_target: int,
                      seed: int) -> list[str]:
    """Pick clips proportionally to cluster sizes (largest-remainder rounding).

    Any shortfall is topped up by a seeded uniform draw from the unselected
    clips. Returns exactly per_class_target unique clip ids, sorted.
    """
    ids = sorted(assignment)
    n = len(ids)
    if per_class_target > n:
        raise ValueError(f"target {per_class_target} exceeds population {n}")
    clusters: dict[int, list[str]] = {}
    for cid in ids:
        clusters.setdefault(assignment[cid], []).append(cid)

    cluster_keys = sorted(clusters)
    sizes = np.array([len(clusters[c]) for c in cluster_keys], dtype=float)
    quotas = per_class_target * sizes / sizes.sum()
    alloc = np.floor(quotas).astype(int)
    shortfall = per_class_target - alloc.sum()
    # distribute the remainder by largest fractional part, ties to lower index
    order = np.lexsort((np.arange(len(quotas)), -(quotas - np.floor(quotas))))
    for i in order[:shortfall]:
        alloc[i] += 1

    rng = np.random.default_rng(seed)
    selected: list[str] = []
    for key, count in zip(cluster_keys, alloc):
        members = clusters[key]
        take = min(count, len(members))
        picked = rng.choice(len(members), size=take, replace=False)
        selected.extend(members[i] for i in sorted(picked))
    if len(selected) < per_class_target:
        rest = sorted(set(ids) - set(selected))
        extra = rng.choice(len(rest), size=per_class_target - len(selected), replace=False)
        selected.extend(rest[i] for i in sorted(extra))
    return sorted(selected)


# ---------------------------------------------------------------------------
# augmentation
# ---------------------------------------------------------------------------

@dataclass
class AugmentPlan:
    """The randomized choices behind one augmentation, fixed by the seed."""

    shift_applied: bool
    semitones: float
    noise_applied: bool
    noise_level: float  # noise sigma as a fraction of the clip peak


def _draw_plan(rng: np.random.Generator) -> AugmentPlan:
    # all four values are always drawn so the stream position is fixed
    shift_applied = rng.random() < 0.5
    semitones = float(rng.uniform(-2.0, 2.0))
    noise_applied = rng.random() < 0.5
    noise_level = float((1.0 - rng.random()) * 0.005)  # uniform in (0, 0.005]
    return AugmentPlan(shift_applied, semitones, noise_applied, noise_level)


def augment_plan(seed: int) -> AugmentPlan:
    """Draw the augmentation plan for a seed (same stream as augment)."""
    return _draw_plan(np.random.default_rng(seed))


def augment(clip: AudioClip, seed: int) -> AudioClip:
    """Randomly pitch-shift within +/-2 semitones and/or add Gaussian noise.

    Each transform fires independently with probability 0.5; noise sigma is
    uniform in (0, 0.5%] of the clip peak. Deterministic for a given seed.
    """
    if len(clip.samples) == 0:
        raise ValueError("cannot augment an empty clip")
    rng = np.random.default_rng(seed)
    plan = _draw_plan(rng)

    out = clip
    if plan.shift_applied:
        out = pitch_shift(out, plan.semitones)
    if plan.noise_applied:
        peak = float(np.max(np.abs(clip.samples)))
        noise = rng.normal(0.0, plan.noise_level * peak, size=len(out.samples))
        out = AudioClip(np.clip(out.samples + noise, -1.0, 1.0),
                        out.sample_rate, out.source_id)
    if out is clip:
        out = AudioClip(clip.samples.copy(), clip.sample_rate, clip.source_id)
    return out


# ---------------------------------------------------------------------------
# dataset manifest
# ---------------------------------------------------------------------------

MANIFEST_HEADER = ["clip_id", "path", "class_id", "class_name", "category_id"]


@dataclass
class ManifestEntry:
    clip_id: str
    path: str
    class_id: int
    class_name: str
    category_id: int


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def by_id(self) -> dict[str, ManifestEntry]:
        return {e.clip_id: e for e in self.entries}

    def class_ids(self) -> list[int]:
        return sorted({e.class_id for e in self.entries})


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read and validate a manifest CSV."""
    path = Path(path)
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != MANIFEST_HEADER:
            raise SchemaError(
                f"{path}: expected header {','.join(MANIFEST_HEADER)}, "
                f"got {reader.fieldnames}")
        for row_no, row in enumerate(reader, start=2):
            clip_id = row["clip_id"]
            if clip_id in seen:
                raise SchemaError(f"{path}:{row_no}: duplicate clip_id {clip_id!r}")
            seen.add(clip_id)
            try:
                class_id = int(row["class_id"])
                category_id = int(row["category_id"])
            except ValueError as exc:
                raise SchemaError(f"{path}:{row_no}: {exc}") from exc
            if not 0 <= class_id <= 49:
                raise SchemaError(f"{path}:{row_no}: class_id {class_id} outside 0-49")
            if not 1 <= category_id <= 5:
                raise SchemaError(f"{path}:{row_no}: category_id {category_id} outside 1-5")
            entries.append(ManifestEntry(clip_id, row["path"], class_id,
                                         row["class_name"], category_id))
    if not entries:
        raise SchemaError(f"{path}: empty manifest")
    return DatasetManifest(entries)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write a manifest CSV (round-trips losslessly through load_manifest)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for e in manifest.entries:
            writer.writerow([e.clip_id, e.path, e.class_id, e.class_name, e.category_id])
