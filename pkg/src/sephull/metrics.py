"""Confusion matrices and imbalance-aware performance measures.

Class 1 (separable) is the positive class. Degenerate ratios (0/0 cells,
e.g. sensitivity with no true positives in the truth) are reported as 0 and
flagged rather than raised, so sweeps over pathological subsets never abort.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CSV_HEADER = "oa,oe,aa,ae,sensitivity,specificity,precision,f_measure,g_mean"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")
        if self.n == 0:
            raise ValueError("confusion matrix must count at least one sample")

    @property
    def n(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """All measures in [0, 1]; oe = 1 - oa and ae = 1 - aa exactly.

    ``degenerate`` lists the measures whose defining ratio was 0/0.
    """

    oa: float
    oe: float
    aa: float
    ae: float
    sensitivity: float
    specificity: float
    precision: float
    f_measure: float
    g_mean: float
    n1: int
    n2: int
    degenerate: tuple[str, ...] = ()

    def csv_row(self) -> str:
        """One row matching :data:`CSV_HEADER`."""
        return ",".join(
            repr(float(v))
            for v in (
                self.oa,
                self.oe,
                self.aa,
                self.ae,
                self.sensitivity,
                self.specificity,
                self.precision,
                self.f_measure,
                self.g_mean,
            )
        )


def confusion(predictions, truths) -> ConfusionMatrix:
    """Count the four cells; label 1 = separable = positive."""
    predictions = np.asarray(predictions)
    truths = np.asarray(truths)
    if predictions.size == 0 or predictions.shape != truths.shape:
        raise ValueError("predictions and truths must be equal-length nonempty vectors")
    if not (np.isin(predictions, (0, 1)).all() and np.isin(truths, (0, 1)).all()):
        raise ValueError("labels must be 0 or 1")
    tp = int(((predictions == 1) & (truths == 1)).sum())
    tn = int(((predictions == 0) & (truths == 0)).sum())
    fp = int(((predictions == 1) & (truths == 0)).sum())
    fn = int(((predictions == 0) & (truths == 1)).sum())
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _ratio(num, den, name, degenerate):
    if den == 0:
        degenerate.append(name)
        return 0.0
    return num / den


def compute_metrics(cm: ConfusionMatrix, literal_specificity: bool = False) -> MetricsReport:
    """Overall/average accuracy, class rates, F-measure and G-mean.

    Specificity is TN/(TN+FP); ``literal_specificity`` switches to the TN/N
    variant for comparison (that form breaks the AA = (s+r)/2 identity and is
    off by the class ratio, so it is not the default).
    """
    degenerate: list[str] = []
    n = cm.n
    n1 = cm.tp + cm.fn
    n2 = cm.tn + cm.fp
    oa = (cm.tp + cm.tn) / n
    sensitivity = _ratio(cm.tp, n1, "sensitivity", degenerate)
    specificity_std = _ratio(cm.tn, n2, "specificity", degenerate)
    specificity = cm.tn / n if literal_specificity else specificity_std
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", degenerate)
    aa = 0.5 * (sensitivity + specificity_std)
    f_measure = _ratio(
        2.0 * precision * sensitivity, precision + sensitivity, "f_measure", degenerate
    )
    g_mean = float(np.sqrt(sensitivity * specificity))
    return MetricsReport(
        oa=oa,
        oe=1.0 - oa,
        aa=aa,
        ae=1.0 - aa,
        sensitivity=sensitivity,
        specificity=specificity,
        precision=precision,
        f_measure=f_measure,
        g_mean=g_mean,
        n1=n1,
        n2=n2,
        degenerate=tuple(degenerate),
    )


def prevalence_difference(labels) -> float:
    """|positive fraction - negative fraction|; 0 = balanced, -> 1 = extreme."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("labels must be nonempty")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    pos = int(labels.sum())
    neg = labels.size - pos
    return abs(pos - neg) / labels.size
