"""Uniform confidence bins and the matching score grid.

A grid with ``m`` bins partitions [0, 1] into half-open intervals
``[(i-1)/m, i/m)``; the last bin is closed at 1.0 so every admissible
score lands somewhere.  The grid values themselves are ``{i/m}`` for
``i = 1..m``: there is no zero point, so rounding never produces a
confidence of exactly 0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "BinGrid",
    "assign_bin",
    "assign_bins",
    "round_to_grid",
    "round_to_grid_index",
    "one_sided_indices",
]


@dataclass(frozen=True)
class BinGrid:
    """Uniform grid over [0, 1] with ``m`` bins, ``m >= 2``."""

    m: int

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or self.m < 2:
            raise DataError(f"bin grid needs an integer m >= 2, got {self.m!r}")

    @property
    def values(self) -> np.ndarray:
        """Grid values ``i/m`` for ``i = 1..m``."""
        return np.arange(1, self.m + 1) / self.m

    def value(self, index: int) -> float:
        """Grid value for a 1-based index."""
        if not 1 <= index <= self.m:
            raise DataError(f"grid index {index} outside 1..{self.m}")
        return index / self.m


def _check_unit_range(p: np.ndarray) -> None:
    if not p.size:
        return
    if not np.all(np.isfinite(p)):
        raise DataError("scores must be finite")
    if np.min(p) < 0.0 or np.max(p) > 1.0:
        bad = p[(p < 0.0) | (p > 1.0)][0]
        raise DataError(f"score {bad!r} outside [0, 1]")


def assign_bins(scores, grid: BinGrid) -> np.ndarray:
    """1-based bin index per score.

    Bin ``b`` covers ``[(b-1)/m, b/m)``; the last bin also contains 1.0.
    """
    p = np.asarray(scores, dtype=float)
    _check_unit_range(p)
    idx = np.floor(p * grid.m).astype(int) + 1
    return np.minimum(idx, grid.m)


def assign_bin(score: float, grid: BinGrid) -> int:
    """Bin index for a single score."""
    return int(assign_bins(np.asarray([score]), grid)[0])


def round_to_grid_index(scores, grid: BinGrid) -> np.ndarray:
    """1-based index of the nearest grid value, ties rounding up.

    Scores below ``1/(2m)`` still map to index 1 because the grid has no
    zero point.
    """
    p = np.asarray(scores, dtype=float)
    _check_unit_range(p)
    idx = np.floor(p * grid.m + 0.5).astype(int)
    return np.clip(idx, 1, grid.m)


def round_to_grid(scores, grid: BinGrid):
    """Nearest grid value per score, ties rounding up."""
    idx = round_to_grid_index(scores, grid)
    out = idx / grid.m
    if np.isscalar(scores) or np.asarray(scores).ndim == 0:
        return float(out[()] if out.ndim == 0 else out)
    return out


def one_sided_indices(scores, grid: BinGrid, bin_index: int, side: str) -> np.ndarray:
    """Indices of scores at or below (``"le"``) / at or above (``"ge"``) ``bin_index/m``.

    Both comparisons are closed, so the two sides overlap on the boundary
    value itself.
    """
    if not 1 <= bin_index <= grid.m:
        raise DataError(f"bin index {bin_index} outside 1..{grid.m}")
    if side not in ("le", "ge"):
        raise DataError(f"side must be 'le' or 'ge', got {side!r}")
    p = np.asarray(scores, dtype=float)
    _check_unit_range(p)
    threshold = grid.value(bin_index)
    mask = p <= threshold if side == "le" else p >= threshold
    return np.flatnonzero(mask)
