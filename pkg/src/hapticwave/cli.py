"""Batch-oriented command-line interface.

Exit codes: 0 success, 1 validation failure (bad flags, files, or schemas),
2 runtime failure. Stochastic commands (curate, augment) require an explicit
seed so every run is reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import analysis, bench, converters, curation
from .audio_io import VibrationSignal, load_wav, save_wav
from .errors import (
    AudioFormatError,
    DegenerateSignalError,
    HapticwaveError,
    ProtocolError,
    SchemaError,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class _CliValidationError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; remap to the validation code
    def error(self, message):
        raise _CliValidationError(message)


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON converter config file")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE",
                     help="override a config field, e.g. --set plm.carrier_mix=0.4")


def _resolve_config(args) -> converters.ConverterConfig:
    cfg = converters.default_config()
    if getattr(args, "config", None):
        cfg = converters.load_converter_config(args.config, base=cfg)
    overrides = {}
    for item in getattr(args, "overrides", []):
        if "=" not in item:
            raise _CliValidationError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = value
    if overrides:
        cfg = converters.apply_config_overrides(cfg, overrides)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hapticwave",
                     description="Audio-to-vibrotactile conversion toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", parents=[], help="convert one WAV to a vibration WAV")
    p.add_argument("--algo", required=True, choices=converters.CONVERTER_TAGS)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)

    p = sub.add_parser("batch", help="convert every manifest clip with each algorithm")
    p.add_argument("--manifest", required=True)
    p.add_argument("--algos", default=",".join(converters.CONVERTER_TAGS),
                   help="comma-separated algorithm tags")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=0,
                   help="parallel workers; 0 = available parallelism")
    _add_config_flags(p)

    p = sub.add_parser("features", help="extract the 31-dim feature vector")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("curate", help="k-means diversity sampling per class")
    p.add_argument("--manifest", required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("augment", help="seeded pitch-shift/noise augmentation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("blend", help="rating-weighted blend of four vibrations")
    p.add_argument("--refs", nargs=4, required=True, metavar="WAV")
    p.add_argument("--ratings", nargs=4, type=float, required=True, metavar="R")
    p.add_argument("--out", required=True)

    p = sub.add_parser("metrics", help="reconstruction metrics between two WAVs")
    p.add_argument("--pred", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", help="write the report as JSON here")

    p = sub.add_parser("report", help="aggregate a ratings table")
    p.add_argument("--ratings", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--level", required=True, choices=["category", "class", "clip"])
    p.add_argument("--json", dest="json_out", help="also write the report as JSON")
    p.add_argument("--column-map", help="JSON object mapping canonical->actual columns")

    p = sub.add_parser("bench", help="latency benchmark on a 50-clip directory")
    p.add_argument("--clips", required=True, help="directory of 50 five-second WAVs")
    p.add_argument("--durations", default="1,2,5,10,20")
    p.add_argument("--algos", default=",".join(converters.CONVERTER_TAGS))
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--json", dest="json_out", help="write results as JSON")

    return parser


def _parse_algos(text: str) -> tuple[str, ...]:
    algos = tuple(a.strip() for a in text.split(",") if a.strip())
    for a in algos:
        if a not in converters.CONVERTER_TAGS:
            raise _CliValidationError(f"unknown algorithm tag: {a!r}")
    if not algos:
        raise _CliValidationError("no algorithms given")
    return algos


def _cmd_convert(args) -> int:
    cfg = _resolve_config(args)
    clip = load_wav(args.input)
    save_wav(converters.convert(clip, args.algo, cfg), args.out)
    return EXIT_OK


def _batch_one(task):
    clip_path, clip_id, algo, cfg, out_dir = task
    clip = load_wav(clip_path)
    out_path = Path(out_dir) / f"{clip_id}.{algo}.wav"
    save_wav(converters.convert(clip, algo, cfg), out_path)
    return str(out_path)


def _cmd_batch(args) -> int:
    cfg = _resolve_config(args)
    algos = _parse_algos(args.algos)
    manifest = curation.load_manifest(args.manifest)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(e.path, e.clip_id, algo, cfg, str(out_dir))
             for e in manifest.entries for algo in algos]
    workers = args.workers if args.workers > 0 else None
    if args.workers == 1:
        produced = [_batch_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            produced = list(pool.map(_batch_one, tasks))
    print(f"wrote {len(produced)} files to {out_dir}")
    return EXIT_OK


def _cmd_features(args) -> int:
    clip = load_wav(args.input)
    vec = curation.extract_features(clip)
    payload = {clip.source_id or Path(args.input).stem: vec.to_dict()}
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_curate(args) -> int:
    manifest = curation.load_manifest(args.manifest)
    selected: list[str] = []
    for class_id in manifest.class_ids():
        entries = [e for e in manifest.entries if e.class_id == class_id]
        features = {e.clip_id: curation.extract_features(load_wav(e.path))
                    for e in entries}
        k = min(args.k, len(features))
        result = curation.kmeans(features, k=k, seed=args.seed)
        selected.extend(curation.stratified_sample(
            result.assignment(), args.per_class, seed=args.seed))
    keep = set(selected)
    curated = curation.DatasetManifest(
        [e for e in manifest.entries if e.clip_id in keep])
    curation.write_manifest(curated, args.out)
    print(f"selected {len(curated)} of {len(manifest)} clips")
    return EXIT_OK


def _cmd_augment(args) -> int:
    clip = load_wav(args.input)
    save_wav(curation.augment(clip, seed=args.seed), args.out)
    return EXIT_OK


def _cmd_blend(args) -> int:
    refs = []
    for path in args.refs:
        clip = load_wav(path)
        refs.append(VibrationSignal(samples=clip.samples, algorithm_tag="blended",
                                    sample_rate=clip.sample_rate))
    blended = analysis.blend_targets(refs, args.ratings)
    save_wav(blended, args.out)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    pred = load_wav(args.pred)
    target = load_wav(args.target)
    if pred.sample_rate != target.sample_rate:
        raise _CliValidationError("pred and target sample rates differ")
    report = analysis.reconstruction_metrics(pred.samples, target.samples,
                                             sample_rate=pred.sample_rate)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def _cmd_report(args) -> int:
    column_map = json.loads(args.column_map) if args.column_map else None
    table = analysis.load_ratings(args.ratings, column_map=column_map)
    manifest = curation.load_manifest(args.manifest)
    report = analysis.aggregate(table, manifest, args.level)
    print(report.format_table())
    if args.json_out:
        Path(args.json_out).write_text(report.to_json())
    return EXIT_OK


def _cmd_bench(args) -> int:
    durations = []
    for part in args.durations.split(","):
        try:
            durations.append(int(part))
        except ValueError:
            raise _CliValidationError(f"bad duration: {part!r}") from None
        if durations[-1] not in bench.BENCH_DURATIONS:
            raise _CliValidationError(f"duration must be one of {bench.BENCH_DURATIONS}")
    algos = _parse_algos(args.algos)
    clip_dir = Path(args.clips)
    if not clip_dir.is_dir():
        raise _CliValidationError(f"not a directory: {clip_dir}")
    clips = [load_wav(p) for p in sorted(clip_dir.glob("*.wav"))]
    corpus = bench.build_bench_corpus(clips)
    corpus = {d: corpus[d] for d in durations}
    results = bench.run_bench(corpus, algorithms=algos, warmup=args.warmup)
    print(bench.format_results(results))
    if args.json_out:
        Path(args.json_out).write_text(bench.results_to_json(results))
    return EXIT_OK


_COMMANDS = {
    "convert": _cmd_convert,
    "batch": _cmd_batch,
    "features": _cmd_features,
    "curate": _cmd_curate,
    "augment": _cmd_augment,
    "blend": _cmd_blend,
    "metrics": _cmd_metrics,
    "report": _cmd_report,
    "bench": _cmd_bench,
}

_VALIDATION_ERRORS = (
    _CliValidationError,
    SchemaError,
    AudioFormatError,
    ProtocolError,
    FileNotFoundError,
    IsADirectoryError,
    ValueError,
    json.JSONDecodeError,
)


def run(argv: list[str] | None = None) -> int:
    """Parse argv and execute one command, returning the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DegenerateSignalError, HapticwaveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # vanishing odds, but never a traceback to stderr
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    raise SystemExit(run())
