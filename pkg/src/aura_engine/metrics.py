"""Classification metrics with bootstrap CIs and ICC(3,k) reliability.

Percentile bootstrap over video-level predictions: each replicate
resamples the videos with replacement, recomputes the metric, and the
interval is the [2.5, 97.5] percentile span of the defined replicate
values. Replicates where the metric is undefined (empty denominator) are
dropped and counted, never imputed.

ICC(3,k) is the two-way mixed-effects, consistency, average-measures
intraclass correlation from the standard two-way ANOVA decomposition.
The F test uses df1 = n-1 and df2 = (n-1)(k-1); the rater-effect
df (k-1) is reported alongside since published tables sometimes quote it.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import f as f_dist

from .errors import InputError

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class LabeledPrediction:
    video_id: str
    predicted: bool
    actual: bool


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ClassificationMetrics:
    """Point metrics; None marks an undefined value (empty denominator)."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None

    def get(self, name: str) -> float | None:
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class CiEstimate:
    metric: str
    point: float | None
    lo: float
    hi: float
    B: int
    seed: int
    n_undefined: int = 0


def confusion(preds: Sequence[LabeledPrediction]) -> ConfusionMatrix:
    """Tally a 2x2 confusion matrix; duplicate video ids are an error."""
    if not preds:
        raise InputError("cannot build a confusion matrix from zero predictions")
    seen: set[str] = set()
    tp = fp = fn = tn = 0
    for p in preds:
        if p.video_id in seen:
            raise InputError(f"duplicate video_id {p.video_id!r} in prediction set")
        seen.add(p.video_id)
        if p.predicted and p.actual:
            tp += 1
        elif p.predicted:
            fp += 1
        elif p.actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def classification_metrics(cm: ConfusionMatrix) -> ClassificationMetrics:
    """Accuracy/precision/recall/F1 with explicit undefined markers.

    F1 is computed as 2tp / (2tp + fp + fn), which equals the harmonic
    mean of precision and recall whenever both are defined, and is
    undefined only when there are neither actual nor predicted positives.
    """
    if cm.total <= 0:
        raise InputError("confusion matrix is empty")
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else None
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else None
    denom = 2 * cm.tp + cm.fp + cm.fn
    f1 = 2 * cm.tp / denom if denom > 0 else None
    return ClassificationMetrics(accuracy, precision, recall, f1)


def _resampled_counts(preds: Sequence[LabeledPrediction], rng: np.random.Generator) -> ConfusionMatrix:
    idx = rng.integers(0, len(preds), size=len(preds))
    tp = fp = fn = tn = 0
    for i in idx:
        p = preds[i]
        if p.predicted and p.actual:
            tp += 1
        elif p.predicted:
            fp += 1
        elif p.actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def bootstrap_ci(
    preds: Sequence[LabeledPrediction],
    metric: str,
    B: int = 1000,
    seed: int = 0,
) -> CiEstimate:
    """Percentile bootstrap CI for one metric over video-level predictions.

    Each replicate draws its random indices from a generator seeded by
    (seed, replicate), so replicates are reproducible independently of
    evaluation order.
    """
    if B < 1:
        raise InputError(f"B must be >= 1, got {B}")
    if not preds:
        raise InputError("cannot bootstrap an empty prediction set")
    if metric not in METRIC_NAMES:
        raise InputError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")

    point = classification_metrics(confusion(preds)).get(metric)
    values: list[float] = []
    n_undefined = 0
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        value = classification_metrics(_resampled_counts(preds, rng)).get(metric)
        if value is None:
            n_undefined += 1
        else:
            values.append(value)
    if not values:
        raise InputError(f"metric {metric!r} undefined in all {B} bootstrap replicates")
    lo, hi = np.percentile(values, [2.5, 97.5])
    return CiEstimate(metric, point, float(lo), float(hi), B, seed, n_undefined)


def combined_f1(f1_collision: float | None, f1_agitation: float | None) -> float | None:
    """Arithmetic mean of the two behavior F1 scores; None if either is."""
    if f1_collision is None or f1_agitation is None:
        return None
    return (f1_collision + f1_agitation) / 2.0


@dataclass(frozen=True)
class RatingMatrix:
    """Complete subjects x raters grid of ordinal scores."""

    subject_ids: tuple[str, ...]
    rater_ids: tuple[str, ...]
    scores: tuple[tuple[float, ...], ...]  # row per subject

    def __post_init__(self) -> None:
        n, k = len(self.subject_ids), len(self.rater_ids)
        if n < 2 or k < 2:
            raise InputError(f"ICC needs at least 2 subjects and 2 raters, got {n}x{k}")
        if len(self.scores) != n or any(len(row) != k for row in self.scores):
            raise InputError("rating matrix must be complete (no missing cells)")

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    @property
    def n_raters(self) -> int:
        return len(self.rater_ids)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=float)


def read_rating_matrix(text: str) -> RatingMatrix:
    """Parse a rating matrix from CSV text.

    Header row: a corner label then rater ids. Each body row: subject id
    followed by one numeric score per rater.
    """
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    if len(rows) < 3:
        raise InputError("rating CSV needs a header and at least two subject rows")
    rater_ids = tuple(c.strip() for c in rows[0][1:])
    subject_ids = []
    scores = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(rater_ids) + 1:
            raise InputError(
                f"rating CSV row {line_no}: expected {len(rater_ids) + 1} cells, got {len(row)}"
            )
        subject_ids.append(row[0].strip())
        try:
            scores.append(tuple(float(c) for c in row[1:]))
        except ValueError as exc:
            raise InputError(f"rating CSV row {line_no}: non-numeric score") from exc
    return RatingMatrix(tuple(subject_ids), tuple(rater_ids), tuple(scores))


@dataclass(frozen=True)
class IccResult:
    icc: float
    f_value: float
    df1: int
    df2: int
    p_value: float
    #: rater-effect degrees of freedom (k-1), reported for comparison with
    #: published tables that quote it in place of df1
    df1_raters: int


def icc_3k(matrix: RatingMatrix) -> IccResult:
    """ICC(3,k): (MS_R - MS_E) / MS_R from the two-way ANOVA decomposition.

    Zero residual variance yields ICC exactly 1 with an infinite F and a
    zero upper-tail p; that is a legitimate result, not an error.
    """
    data = matrix.as_array()
    n, k = data.shape
    grand = data.mean()
    row_means = data.mean(axis=1)
    col_means = data.mean(axis=0)
    ss_rows = k * float(((row_means - grand) ** 2).sum())
    ss_cols = n * float(((col_means - grand) ** 2).sum())
    ss_total = float(((data - grand) ** 2).sum())
    ss_err = ss_total - ss_rows - ss_cols

    df1 = n - 1
    df2 = (n - 1) * (k - 1)
    ms_r = ss_rows / df1
    ms_e = max(0.0, ss_err) / df2

    if ms_r == 0.0:
        raise InputError("ICC undefined: no between-subject variance")
    if ms_e == 0.0:
        return IccResult(1.0, float("inf"), df1, df2, 0.0, k - 1)

    icc = (ms_r - ms_e) / ms_r
    f_value = ms_r / ms_e
    p_value = float(f_dist.sf(f_value, df1, df2))
    return IccResult(icc, f_value, df1, df2, p_value, k - 1)
