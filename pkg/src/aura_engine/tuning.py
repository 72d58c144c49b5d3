"""Robustness harness: folds, the +/-10% parameter grid, and selection.

Three folds partition the video ids into disjoint 21-video tuning sets;
each fold validates on the remaining 42. (Disjoint *validation* sets of
42 cannot exist over 63 videos, so disjointness lives on the tuning
side.) The grid perturbs tau_speed, tau_valid, and s_r by +/-10% around
their calibrated bases (27 configurations), and selection maximizes the
combined F1 (mean of collision and agitation F1) on the tuning set, ties
broken by canonical grid order.
"""
from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

from .config import EngineConfig
from .errors import InputError
from .metrics import (
    ClassificationMetrics,
    LabeledPrediction,
    classification_metrics,
    combined_f1,
    confusion,
)
from .pipeline import run_detection
from .streams import KeypointStream

BEHAVIORS = ("collision", "agitation")


@dataclass(frozen=True)
class LabeledStream:
    stream: KeypointStream
    collision: bool
    agitation: bool

    @property
    def video_id(self) -> str:
        return self.stream.header.video_id


@dataclass(frozen=True)
class Fold:
    tuning_ids: tuple[str, ...]
    validation_ids: tuple[str, ...]


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[Fold, ...]


def make_folds(video_ids: Sequence[str], seed: int, expected_count: int = 63) -> FoldPlan:
    """Deterministic partition into three disjoint tuning sets.

    With the canonical 63 videos each tuning set has 21 ids and each
    validation set the other 42. Other counts must be passed explicitly
    via expected_count (>= 6 so every block is non-empty).
    """
    ids = list(video_ids)
    if len(ids) != expected_count:
        raise InputError(f"expected {expected_count} video ids, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise InputError("video ids must be distinct")
    if len(ids) < 6:
        raise InputError("need at least 6 videos for 3 folds")

    shuffled = sorted(ids)
    random.Random(seed).shuffle(shuffled)
    n = len(shuffled)
    block = n // 3
    bounds = [0, block, 2 * block, n]
    folds = []
    for i in range(3):
        tuning = tuple(shuffled[bounds[i]:bounds[i + 1]])
        validation = tuple(v for v in shuffled if v not in set(tuning))
        folds.append(Fold(tuning, validation))
    return FoldPlan(tuple(folds))


@dataclass(frozen=True)
class GridConfig:
    tau_speed: float
    tau_valid: float
    s_r: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.tau_speed, self.tau_valid, self.s_r)


@dataclass(frozen=True)
class GridSpec:
    """Three candidates per parameter: 0.9x, 1.0x, 1.1x the base value."""

    tau_speed_base: float = 0.18
    tau_valid_base: float = 0.7
    s_r_base: float = 1.0
    vary: frozenset[str] = frozenset({"tau_speed", "tau_valid", "s_r"})

    def candidates(self, name: str) -> tuple[float, ...]:
        base = {
            "tau_speed": self.tau_speed_base,
            "tau_valid": self.tau_valid_base,
            "s_r": self.s_r_base,
        }[name]
        if name not in self.vary:
            return (base,)
        # Precomputed absolute values, rounded so reports show 0.63 rather
        # than 0.6300000000000001.
        return tuple(round(f * base, 12) for f in (0.9, 1.0, 1.1))


def enumerate_grid(spec: GridSpec) -> list[GridConfig]:
    """Cross product in canonical order: tau_speed slowest, s_r fastest."""
    return [
        GridConfig(ts, tv, sr)
        for ts, tv, sr in product(
            spec.candidates("tau_speed"),
            spec.candidates("tau_valid"),
            spec.candidates("s_r"),
        )
    ]


@dataclass(frozen=True)
class ConfigEvaluation:
    config: GridConfig
    metrics: dict[str, ClassificationMetrics]
    combined_f1: float | None
    flagged: bool = False  # an F1 was undefined on this set

    @property
    def selection_score(self) -> float:
        return -math.inf if self.combined_f1 is None else self.combined_f1


def apply_grid_config(base: EngineConfig, config: GridConfig) -> EngineConfig:
    return base.with_overrides(
        tau_speed=config.tau_speed,
        tau_valid=config.tau_valid,
        s_r=config.s_r,
    )


def evaluate_config(
    config: GridConfig,
    video_set: Sequence[LabeledStream],
    base: EngineConfig,
) -> ConfigEvaluation:
    """Run both detectors with the config overlaid and score the set."""
    engine = apply_grid_config(base, config)
    preds = {behavior: [] for behavior in BEHAVIORS}
    for labeled in video_set:
        result = run_detection(labeled.stream, engine)
        preds["collision"].append(
            LabeledPrediction(labeled.video_id, result.collision, labeled.collision)
        )
        preds["agitation"].append(
            LabeledPrediction(labeled.video_id, result.agitation, labeled.agitation)
        )
    metrics = {
        behavior: classification_metrics(confusion(preds[behavior]))
        for behavior in BEHAVIORS
    }
    combined = combined_f1(metrics["collision"].f1, metrics["agitation"].f1)
    return ConfigEvaluation(config, metrics, combined, flagged=combined is None)


@dataclass(frozen=True)
class FoldReport:
    fold_index: int
    tuning_ids: tuple[str, ...]
    validation_ids: tuple[str, ...]
    tuning_evaluations: list[ConfigEvaluation]
    best: ConfigEvaluation
    validation: ConfigEvaluation


@dataclass(frozen=True)
class TuningReport:
    folds: list[FoldReport]
    cross_fold_deviation: float | None = field(default=None)

    @property
    def consistent_best(self) -> bool:
        configs = {fr.best.config for fr in self.folds}
        return len(configs) == 1


def _select_best(evaluations: Sequence[ConfigEvaluation]) -> ConfigEvaluation:
    # Ties keep the earliest config in canonical grid order, so selection
    # is independent of evaluation order.
    best = evaluations[0]
    for ev in evaluations[1:]:
        if ev.selection_score > best.selection_score:
            best = ev
    return best


def run_folds(
    plan: FoldPlan,
    grid: Sequence[GridConfig],
    streams: Mapping[str, LabeledStream],
    base: EngineConfig | None = None,
    workers: int | None = None,
) -> TuningReport:
    """Grid-search every fold's tuning set and validate its best config."""
    base = base if base is not None else EngineConfig()
    for fold in plan.folds:
        for vid in fold.tuning_ids + fold.validation_ids:
            if vid not in streams:
                raise InputError(f"missing stream for video id {vid!r}")

    fold_reports = []
    for i, fold in enumerate(plan.folds):
        tuning_set = [streams[v] for v in fold.tuning_ids]
        validation_set = [streams[v] for v in fold.validation_ids]
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                evaluations = list(
                    pool.map(lambda cfg: evaluate_config(cfg, tuning_set, base), grid)
                )
        else:
            evaluations = [evaluate_config(cfg, tuning_set, base) for cfg in grid]
        best = _select_best(evaluations)
        validation = evaluate_config(best.config, validation_set, base)
        fold_reports.append(
            FoldReport(i, fold.tuning_ids, fold.validation_ids, evaluations, best, validation)
        )

    combined = [fr.validation.combined_f1 for fr in fold_reports]
    deviation = None
    if all(c is not None for c in combined):
        values = [c for c in combined if c is not None]
        deviation = max(values) - min(values)
    return TuningReport(fold_reports, deviation)


def _metrics_dict(metrics: ClassificationMetrics) -> dict:
    return {
        "accuracy": metrics.accuracy,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
    }


def report_records(report: TuningReport) -> list[dict]:
    """Flatten a TuningReport to JSONL records: one per fold x config
    evaluation, one per fold validation, and a final summary."""
    records: list[dict] = []
    for fr in report.folds:
        for ev in fr.tuning_evaluations:
            records.append(
                {
                    "type": "tuning_evaluation",
                    "fold": fr.fold_index,
                    "config": {
                        "tau_speed": ev.config.tau_speed,
                        "tau_valid": ev.config.tau_valid,
                        "s_r": ev.config.s_r,
                    },
                    "metrics": {b: _metrics_dict(m) for b, m in ev.metrics.items()},
                    "combined_f1": ev.combined_f1,
                    "flagged": ev.flagged,
                }
            )
        records.append(
            {
                "type": "fold_summary",
                "fold": fr.fold_index,
                "tuning_ids": list(fr.tuning_ids),
                "validation_ids": list(fr.validation_ids),
                "best_config": {
                    "tau_speed": fr.best.config.tau_speed,
                    "tau_valid": fr.best.config.tau_valid,
                    "s_r": fr.best.config.s_r,
                },
                "best_tuning_combined_f1": fr.best.combined_f1,
                "validation_metrics": {b: _metrics_dict(m) for b, m in fr.validation.metrics.items()},
                "validation_combined_f1": fr.validation.combined_f1,
            }
        )
    records.append(
        {
            "type": "summary",
            "n_folds": len(report.folds),
            "n_configs": len(report.folds[0].tuning_evaluations) if report.folds else 0,
            "cross_fold_deviation": report.cross_fold_deviation,
            "consistent_best": report.consistent_best,
        }
    )
    return records
