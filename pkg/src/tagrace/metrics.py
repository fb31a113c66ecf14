"""Confusion counts and the precision / accuracy / F1 summary."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import EmptyCountsError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def add(self, expected: bool, observed: bool) -> ConfusionCounts:
        tp, fp, fn, tn = self.tp, self.fp, self.fn, self.tn
        if expected and observed:
            tp += 1
        elif observed:
            fp += 1
        elif expected:
            fn += 1
        else:
            tn += 1
        return ConfusionCounts(tp, fp, fn, tn)


@dataclass(frozen=True)
class MetricsResult:
    """None marks an undefined (0/0) metric."""

    precision: float | None
    accuracy: float | None
    f1: float | None
    recall: float | None = None

    def to_record(self) -> dict:
        return asdict(self)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def compute_metrics(c: ConfusionCounts) -> MetricsResult:
    if c.total == 0:
        raise EmptyCountsError("all confusion counts are zero")
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    accuracy = _ratio(c.tp + c.tn, c.total)
    # harmonic mean of precision and recall
    if precision is None or recall is None:
        f1 = None
    elif c.tp == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsResult(precision, accuracy, f1, recall)
