"""Command-line surface: detect, simulate, evaluate, tune, annotate-only.

Exit codes: 0 success, 1 usage error, 2 input/validation error,
3 internal error. Every command is deterministic given its inputs and
seeds; output files are written atomically.
"""
from __future__ import annotations

import argparse
import glob
import json
import os
import sys
import tempfile

from .config import DEFAULT_BOOTSTRAP_B, DEFAULT_SEED, EngineConfig, load_config
from .errors import EngineError, InputError
from .metrics import METRIC_NAMES, LabeledPrediction, bootstrap_ci
from .pipeline import (
    annotation_records,
    event_records,
    read_jsonl,
    run_detection,
    write_jsonl_atomic,
)
from .simulate import KINDS, Scenario, generate
from .streams import parse_stream_file, write_stream_file
from .tuning import (
    GridSpec,
    LabeledStream,
    enumerate_grid,
    make_folds,
    report_records,
    run_folds,
)

USAGE_ERROR = 1
INPUT_ERROR = 2
INTERNAL_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _write_json_atomic(obj, path) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, sort_keys=True, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_engine_config(args) -> EngineConfig:
    config = load_config(args.config) if args.config else EngineConfig()
    return config.with_overrides(
        aura_mode=getattr(args, "mode", None),
        lambda_=getattr(args, "lambda_", None),
        s_r=getattr(args, "s_r", None),
        bootstrap_b=getattr(args, "bootstrap", None),
        seed=getattr(args, "seed", None),
    )


def _add_common(parser: argparse.ArgumentParser, *, config=True, seed=True, mode=True) -> None:
    if config:
        parser.add_argument("--config", help="engine config file (flat key = value)")
    if seed:
        parser.add_argument("--seed", type=int, help="random seed")
    if mode:
        parser.add_argument("--mode", choices=["fixed", "relative"], help="aura radius mode")
        parser.add_argument("--lambda", dest="lambda_", type=float,
                            help="relative-mode radius scaling")
        parser.add_argument("--s-r", dest="s_r", type=float, help="fixed-radius scaling factor")


def cmd_detect(args) -> int:
    config = _load_engine_config(args)
    stream = parse_stream_file(args.input)
    result = run_detection(stream, config)
    write_jsonl_atomic(event_records(result), args.output)
    if args.annotations:
        write_jsonl_atomic(annotation_records(result), args.annotations)
    print(
        f"{result.video_id}: collision={str(result.collision).lower()} "
        f"agitation={str(result.agitation).lower()} "
        f"events={len(result.collision_events)}"
    )
    return 0


def cmd_annotate_only(args) -> int:
    config = _load_engine_config(args)
    stream = parse_stream_file(args.input)
    result = run_detection(stream, config)
    write_jsonl_atomic(annotation_records(result), args.output)
    print(f"{result.video_id}: {len(result.annotations)} frame annotations")
    return 0


def cmd_simulate(args) -> int:
    scenario = Scenario(
        kind=args.kind,
        duration_s=args.duration,
        fps=args.fps,
        seed=args.seed if args.seed is not None else 0,
        noise_amplitude=args.noise,
        margin=args.margin,
    )
    stream, collision, agitation = generate(scenario)
    write_stream_file(stream, args.output)
    _write_json_atomic(
        {
            "video_id": stream.header.video_id,
            "kind": scenario.kind,
            "seed": scenario.seed,
            "collision": collision,
            "agitation": agitation,
        },
        f"{args.output}.labels.json",
    )
    print(f"{stream.header.video_id}: {len(stream.frames)} frames -> {args.output}")
    return 0


def _load_label_records(path) -> dict[str, dict]:
    labels: dict[str, dict] = {}
    for record in read_jsonl(path):
        for key in ("video_id", "collision", "agitation"):
            if key not in record:
                raise InputError(f"label record missing key {key!r}: {record}")
        vid = record["video_id"]
        if vid in labels:
            raise InputError(f"duplicate video_id {vid!r} in {path}")
        labels[vid] = record
    if not labels:
        raise InputError(f"no label records in {path}")
    return labels


def cmd_evaluate(args) -> int:
    labels = _load_label_records(args.labels)
    predictions: dict[str, dict] = {}
    for record in read_jsonl(args.predictions):
        if record.get("type", "video_summary") != "video_summary":
            continue
        vid = record.get("video_id")
        if vid is None:
            raise InputError(f"prediction record missing video_id: {record}")
        if vid in predictions:
            raise InputError(f"duplicate video_id {vid!r} in {args.predictions}")
        predictions[vid] = record

    missing = sorted(set(labels) - set(predictions))
    extra = sorted(set(predictions) - set(labels))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing predictions for: {', '.join(missing)}")
        if extra:
            parts.append(f"predictions without labels: {', '.join(extra)}")
        raise InputError("; ".join(parts))

    B = args.bootstrap if args.bootstrap is not None else DEFAULT_BOOTSTRAP_B
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    records = []
    for behavior in ("collision", "agitation"):
        preds = [
            LabeledPrediction(vid, bool(predictions[vid][behavior]), bool(labels[vid][behavior]))
            for vid in sorted(labels)
        ]
        for metric in METRIC_NAMES:
            try:
                est = bootstrap_ci(preds, metric, B=B, seed=seed)
            except InputError:
                # Degenerate set for this metric (e.g. no positives at
                # all): report it as undefined, not as a failed run.
                records.append(
                    {
                        "behavior": behavior,
                        "metric": metric,
                        "point": None,
                        "ci_lo": None,
                        "ci_hi": None,
                        "B": B,
                        "seed": seed,
                        "n_undefined_replicates": B,
                    }
                )
                print(f"{behavior} {metric}: undefined")
                continue
            records.append(
                {
                    "behavior": behavior,
                    "metric": metric,
                    "point": None if est.point is None else float(f"{est.point:.6g}"),
                    "ci_lo": float(f"{est.lo:.6g}"),
                    "ci_hi": float(f"{est.hi:.6g}"),
                    "B": est.B,
                    "seed": est.seed,
                    "n_undefined_replicates": est.n_undefined,
                }
            )
            point = "undefined" if est.point is None else f"{est.point:.6g}"
            print(f"{behavior} {metric}: {point} [{est.lo:.6g}, {est.hi:.6g}]")
    write_jsonl_atomic(records, args.output)
    return 0


def cmd_tune(args) -> int:
    labels = _load_label_records(args.labels)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    streams: dict[str, LabeledStream] = {}
    for vid in sorted(labels):
        path = os.path.join(args.streams, f"{vid}.jsonl")
        if not os.path.exists(path):
            matches = sorted(glob.glob(os.path.join(args.streams, f"{vid}.*")))
            if not matches:
                raise InputError(f"missing stream file for video id {vid!r} in {args.streams}")
            path = matches[0]
        stream = parse_stream_file(path)
        streams[vid] = LabeledStream(
            stream, bool(labels[vid]["collision"]), bool(labels[vid]["agitation"])
        )

    ids = sorted(streams)
    if len(ids) != 63:
        if len(ids) < 6:
            raise InputError(f"tuning needs at least 6 labeled streams, got {len(ids)}")
        print(
            f"warning: tuning protocol assumes 63 videos, got {len(ids)}",
            file=sys.stderr,
        )
    plan = make_folds(ids, seed, expected_count=len(ids))

    config = _load_engine_config(args)
    vary = frozenset(args.grid_param) if args.grid_param else None
    spec = GridSpec(
        tau_speed_base=config.agitation.tau_speed,
        tau_valid_base=config.collision.tau_valid,
        s_r_base=config.mode.s_r,
        **({"vary": vary} if vary else {}),
    )
    grid = enumerate_grid(spec)
    report = run_folds(plan, grid, streams, base=config, workers=args.workers)
    write_jsonl_atomic(report_records(report), args.output)

    deviation = report.cross_fold_deviation
    dev_text = "undefined" if deviation is None else f"{deviation:.6g}"
    print(
        f"folds=3 configs={len(grid)} cross_fold_deviation={dev_text} "
        f"consistent_best={str(report.consistent_best).lower()}"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="aura", description="Keypoint-stream risk detection engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run both detectors over a stream file")
    p.add_argument("--input", required=True, help="keypoint stream JSONL file")
    p.add_argument("--output", required=True, help="event file to write")
    p.add_argument("--annotations", help="optional frame annotation file")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("annotate-only", help="write frame annotations without events")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_annotate_only)

    p = sub.add_parser("simulate", help="generate a synthetic labeled stream")
    p.add_argument("--kind", required=True, choices=list(KINDS))
    p.add_argument("--output", required=True)
    p.add_argument("--duration", type=float, default=6.0)
    p.add_argument("--fps", type=float, default=25.0)
    p.add_argument("--margin", type=float, default=2.0)
    p.add_argument("--noise", type=float, default=5e-5)
    _add_common(p, config=False, mode=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score predictions against labels")
    p.add_argument("--predictions", required=True, help="JSONL with video_summary records")
    p.add_argument("--labels", required=True, help="JSONL with video_id/collision/agitation")
    p.add_argument("--output", required=True, help="metrics report JSONL")
    p.add_argument("--bootstrap", type=int, help=f"replicates (default {DEFAULT_BOOTSTRAP_B})")
    _add_common(p, config=False, mode=False)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="fold-based +/-10%% grid search")
    p.add_argument("--streams", required=True, help="directory of <video_id>.jsonl files")
    p.add_argument("--labels", required=True)
    p.add_argument("--output", required=True, help="tuning report JSONL")
    p.add_argument(
        "--grid-param",
        action="append",
        choices=["tau_speed", "tau_valid", "s_r"],
        help="restrict the grid to these parameters (repeatable)",
    )
    p.add_argument("--workers", type=int, default=None, help="parallel config evaluations")
    p.add_argument("--bootstrap", type=int, help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=cmd_tune)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except EngineError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
