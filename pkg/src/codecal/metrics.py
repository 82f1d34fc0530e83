"""Calibration metrics and the evaluation report.

All metrics take parallel arrays of confidence scores in [0, 1] and
binary outcome labels.  Binned quantities use the uniform grid from
:mod:`codecal.binning`; empty bins contribute nothing.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .binning import BinGrid, assign_bins
from .errors import DataError, DegenerateGroupError
from .groups import GroupSet

__all__ = [
    "NEG_INF",
    "ece",
    "brier",
    "base_rate",
    "brier_reference",
    "brier_skill_score",
    "accuracy_at_half",
    "gasce",
    "multicalibration_check",
    "reliability_table",
    "EvalReport",
    "evaluate",
]

# Sentinel for an undefined skill score on a degenerate reference.  Kept
# as an actual float so comparisons work, but serialized as the string
# "-inf" because JSON has no infinity literal.
NEG_INF = float("-inf")


def _as_scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape or p.ndim != 1:
        raise DataError(f"scores and labels must be parallel 1-d arrays, got {p.shape} and {y.shape}")
    if p.size == 0:
        raise DataError("need at least one sample")
    if not np.all(np.isfinite(p)) or np.min(p) < 0.0 or np.max(p) > 1.0:
        raise DataError("scores must lie in [0, 1]")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DataError("labels must be 0 or 1")
    return p, y


def ece(scores, labels, grid: BinGrid) -> float:
    """Expected calibration error.

    Bins scores on the uniform grid and averages the absolute gap
    between per-bin accuracy and per-bin mean confidence, weighted by
    bin occupancy:

        ECE = sum_b |B_b|/n * |acc(B_b) - conf(B_b)|

    Empty bins contribute 0.
    """
    p, y = _as_scores_labels(scores, labels)
    bins = assign_bins(p, grid)
    total = 0.0
    for b in range(1, grid.m + 1):
        mask = bins == b
        count = int(mask.sum())
        if count == 0:
            continue
        gap = abs(float(y[mask].mean()) - float(p[mask].mean()))
        total += count / p.size * gap
    return total


def brier(scores, labels) -> float:
    """Mean squared error between confidence and outcome.

    0 for perfect confidence, 0.25 for a constant 0.5 on balanced
    outcomes, 1 when confidently wrong everywhere.
    """
    p, y = _as_scores_labels(scores, labels)
    return float(np.mean((p - y) ** 2))


def base_rate(labels) -> float:
    """Fraction of positive labels."""
    y = np.asarray(labels, dtype=float)
    if y.size == 0:
        raise DataError("need at least one sample")
    return float(y.mean())


def brier_reference(labels) -> float:
    """Brier score of always predicting the base rate: p_r * (1 - p_r)."""
    rate = base_rate(labels)
    return rate * (1.0 - rate)


def brier_skill_score(scores, labels) -> float:
    """Skill relative to the base-rate predictor: (B_ref - B) / B_ref.

    Positive means better than knowing only the base rate.  On a
    degenerate reference (all labels equal, B_ref = 0) the score is 1.0
    for a perfect predictor and ``NEG_INF`` otherwise.
    """
    p, y = _as_scores_labels(scores, labels)
    b = brier(p, y)
    ref = brier_reference(y)
    if ref == 0.0:
        return 1.0 if b == 0.0 else NEG_INF
    return (ref - b) / ref


def accuracy_at_half(scores, labels) -> float:
    """Accuracy of thresholding confidence at 0.5 (0.5 itself predicts positive)."""
    p, y = _as_scores_labels(scores, labels)
    predicted = (p >= 0.5).astype(float)
    return float(np.mean(predicted == y))


def gasce(scores, labels, member_mask, grid: BinGrid) -> float:
    """Group-wise average squared calibration error.

    Over the samples of one group, bins are weighted by their share of
    the group and the squared mean residual ``mean(y - p)`` inside each
    bin is accumulated:

        gASCE(g) = sum_b P(b | g) * mean(y - p | g, b)^2

    Raises on an empty group: there is nothing to average.
    """
    p, y = _as_scores_labels(scores, labels)
    g = np.asarray(member_mask).astype(bool)
    if g.shape != p.shape:
        raise DataError("member mask must parallel the scores")
    n_g = int(g.sum())
    if n_g == 0:
        raise DegenerateGroupError("gasce of an empty group is undefined")
    bins = assign_bins(p, grid)
    total = 0.0
    for b in range(1, grid.m + 1):
        mask = g & (bins == b)
        count = int(mask.sum())
        if count == 0:
            continue
        delta = float(np.mean(y[mask] - p[mask]))
        total += count / n_g * delta * delta
    return total


def multicalibration_check(
    scores, labels, groups: GroupSet, grid: BinGrid, alpha: float
) -> dict[str, dict]:
    """Check ``P(g) * gASCE(g) < alpha`` for every group.

    Returns one entry per group with its mass, weighted error, and
    verdict.  Zero-mass groups pass vacuously and carry no error value.
    """
    p, y = _as_scores_labels(scores, labels)
    if groups.n_samples != p.size:
        raise DataError("group set covers a different number of samples")
    if not alpha > 0.0:
        raise DataError(f"alpha must be positive, got {alpha}")
    result: dict[str, dict] = {}
    for name in groups.names:
        mask = groups.column(name).astype(bool)
        mass = float(mask.mean())
        if mass == 0.0:
            result[name] = {"pass": True, "vacuous": True, "mass": 0.0, "weighted_gasce": None}
            continue
        err = gasce(p, y, mask, grid)
        weighted = mass * err
        result[name] = {
            "pass": bool(weighted < alpha),
            "vacuous": False,
            "mass": mass,
            "weighted_gasce": weighted,
        }
    return result


def reliability_table(scores, labels, grid: BinGrid) -> list[tuple[int, int, float, float]]:
    """Rows ``(bin, count, conf, acc)`` for every occupied bin, ascending."""
    p, y = _as_scores_labels(scores, labels)
    bins = assign_bins(p, grid)
    rows = []
    for b in range(1, grid.m + 1):
        mask = bins == b
        count = int(mask.sum())
        if count == 0:
            continue
        rows.append((b, count, float(p[mask].mean()), float(y[mask].mean())))
    return rows


@dataclass
class EvalReport:
    """Everything a calibration run reports about one score vector."""

    n_samples: int
    grid_m: int
    ece: float
    brier: float
    brier_ref: float
    bss: float
    accuracy: float
    base_rate: float
    per_group_gasce: dict[str, float] = field(default_factory=dict)
    group_summary: dict[str, dict] = field(default_factory=dict)
    reliability: list[tuple[int, int, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "n_samples": self.n_samples,
            "grid_m": self.grid_m,
            "ece": self.ece,
            "brier": self.brier,
            "brier_ref": self.brier_ref,
            "bss": "-inf" if self.bss == NEG_INF else self.bss,
            "accuracy": self.accuracy,
            "base_rate": self.base_rate,
            "per_group_gasce": self.per_group_gasce,
            "group_summary": self.group_summary,
            "reliability": [list(row) for row in self.reliability],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, payload: dict) -> "EvalReport":
        if payload.get("schema_version") != 1:
            raise DataError(f"unsupported report schema version {payload.get('schema_version')!r}")
        bss = payload["bss"]
        return cls(
            n_samples=payload["n_samples"],
            grid_m=payload["grid_m"],
            ece=payload["ece"],
            brier=payload["brier"],
            brier_ref=payload["brier_ref"],
            bss=NEG_INF if bss == "-inf" else float(bss),
            accuracy=payload["accuracy"],
            base_rate=payload["base_rate"],
            per_group_gasce=dict(payload["per_group_gasce"]),
            group_summary=dict(payload["group_summary"]),
            reliability=[tuple(row) for row in payload["reliability"]],
        )

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))


def evaluate(scores, labels, grid: BinGrid, groups: GroupSet | None = None) -> EvalReport:
    """Compute the full report for one score vector.

    Zero-mass groups are listed in the summary with a degenerate marker
    but contribute no gASCE entry.
    """
    p, y = _as_scores_labels(scores, labels)
    per_group: dict[str, float] = {}
    summary: dict[str, dict] = {}
    if groups is not None:
        if groups.n_samples != p.size:
            raise DataError("group set covers a different number of samples")
        for name in groups.names:
            mask = groups.column(name).astype(bool)
            count = int(mask.sum())
            if count == 0:
                summary[name] = {"count": 0, "mean_conf": None, "accuracy": None, "degenerate": True}
                continue
            per_group[name] = gasce(p, y, mask, grid)
            summary[name] = {
                "count": count,
                "mean_conf": float(p[mask].mean()),
                "accuracy": float(y[mask].mean()),
                "degenerate": False,
            }
    return EvalReport(
        n_samples=p.size,
        grid_m=grid.m,
        ece=ece(p, y, grid),
        brier=brier(p, y),
        brier_ref=brier_reference(y),
        bss=brier_skill_score(p, y),
        accuracy=accuracy_at_half(p, y),
        base_rate=base_rate(y),
        per_group_gasce=per_group,
        group_summary=summary,
        reliability=reliability_table(p, y, grid),
    )
