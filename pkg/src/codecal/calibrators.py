"""Post-hoc calibrators for raw confidence scores.

Six methods, from global to group-conditional:

* Platt scaling: a two-parameter sigmoid over the log score.
* Histogram binning: per-grid-cell additive corrections.
* Group unbiased recalibration, linear variant: one additive offset
  per group, solved by least squares on the residuals.
* Group unbiased recalibration, logistic variant: logistic regression
  on the logit score plus group indicators.
* Iterative grid patching: repeatedly shifts the worst group-cell by
  its mean residual until every group clears the error budget.
* Iterative sigmoid patching: repeatedly refits a two-parameter
  sigmoid on the worst one-sided group region, early-stopped by
  validation Brier score.

Fitting happens on grid-rounded scores for the two iterative methods,
and every patch round-trips through the same rounding, so replaying a
serialized model reproduces training outputs bit for bit.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .binning import BinGrid, round_to_grid_index
from .errors import DataError, FitError
from .groups import GroupSet

__all__ = [
    "LOGIT_CLAMP",
    "sigmoid",
    "clamped_logit",
    "PlattModel",
    "HistogramBinningModel",
    "GcurModel",
    "IterativePatchModel",
    "fit_platt",
    "fit_histogram_binning",
    "fit_gcur_linear",
    "fit_gcur_logistic",
    "fit_ighb",
    "fit_iglb",
    "membership_matrix",
    "model_to_json",
    "model_from_json",
]

LOGIT_CLAMP = 1e-6
RIDGE = 1e-6
TIKHONOV = 1e-10
GRAD_TOL = 1e-8
NEWTON_MAX_ITER = 100
PATCH_MAX_ITERS = 1000
DEFAULT_EPSILON = 0.05


def sigmoid(z):
    """Numerically stable logistic function."""
    z_arr = np.asarray(z, dtype=float)
    out = np.empty_like(z_arr, dtype=float)
    pos = z_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z_arr[pos]))
    ez = np.exp(z_arr[np.logical_not(pos)])
    out[np.logical_not(pos)] = ez / (1.0 + ez)
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return float(out[()] if out.ndim == 0 else out)
    return out


def clamped_logit(p):
    """log(p / (1-p)) with p clamped into [1e-6, 1 - 1e-6] first.

    The clamp only moves saturated scores, so logit(1) is about 13.8155
    instead of infinite.
    """
    p_arr = np.asarray(p, dtype=float)
    q = np.clip(p_arr, LOGIT_CLAMP, 1.0 - LOGIT_CLAMP)
    out = np.log(q) - np.log1p(-q)
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return float(out[()] if out.ndim == 0 else out)
    return out


def _clamped_log(p: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(p, LOGIT_CLAMP))


def _check_scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if p.ndim != 1 or p.shape != y.shape:
        raise DataError(f"scores and labels must be parallel 1-d arrays, got {p.shape} and {y.shape}")
    if p.size == 0:
        raise DataError("need at least one sample to fit")
    if not np.all(np.isfinite(p)) or np.min(p) < 0.0 or np.max(p) > 1.0:
        raise DataError("scores must lie in [0, 1]")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DataError("labels must be 0 or 1")
    return p, y


def _newton_fit(X: np.ndarray, y: np.ndarray, loss: str) -> tuple[np.ndarray, dict]:
    """Damped Newton minimizer for mean CE or mean squared error of sigmoid(Xw).

    Ridge 1e-6 keeps the problem strictly convex (CE) or at least
    bounded (squared), so iteration from zero is deterministic.  Stops
    at gradient norm 1e-8 or 100 iterations.
    """
    n, d = X.shape
    w = np.zeros(d)

    def objective(wv: np.ndarray) -> float:
        z = X @ wv
        if loss == "ce":
            data_term = float(np.mean(np.logaddexp(0.0, z) - y * z))
        else:
            data_term = float(np.mean((sigmoid(z) - y) ** 2))
        return data_term + 0.5 * RIDGE * float(wv @ wv)

    iterations = 0
    converged = False
    for iterations in range(1, NEWTON_MAX_ITER + 1):
        z = X @ w
        mu = sigmoid(z)
        s = mu * (1.0 - mu)
        if loss == "ce":
            grad = X.T @ (mu - y) / n + RIDGE * w
            hess = (X.T * s) @ X / n + RIDGE * np.eye(d)
        else:
            r = mu - y
            grad = 2.0 * X.T @ (r * s) / n + RIDGE * w
            # Gauss-Newton curvature keeps the step direction descent-safe.
            hess = 2.0 * (X.T * (s * s)) @ X / n + RIDGE * np.eye(d)
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= GRAD_TOL:
            converged = True
            iterations -= 1
            break
        step = np.linalg.solve(hess, grad)
        current = objective(w)
        t = 1.0
        while t > 1e-12 and objective(w - t * step) >= current:
            t *= 0.5
        if t <= 1e-12:
            break
        w = w - t * step
    else:
        iterations = NEWTON_MAX_ITER
    info = {"converged": converged, "iterations": iterations, "grad_norm": gnorm}
    return w, info


def membership_matrix(groups: GroupSet, names: list[str]) -> np.ndarray:
    """Columns of ``groups`` matching ``names``, in that order."""
    cols = [groups.column(name) for name in names]
    if not cols:
        return np.zeros((groups.n_samples, 0), dtype=np.int8)
    return np.column_stack(cols)


def _check_membership(membership, n: int, k: int) -> np.ndarray:
    g = np.asarray(membership)
    if g.ndim != 2 or g.shape != (n, k):
        raise DataError(f"membership must have shape ({n}, {k}), got {g.shape}")
    vals = np.unique(g)
    if vals.size and not np.all(np.isin(vals, (0, 1))):
        raise DataError("membership entries must be 0 or 1")
    return g.astype(bool)


def _split_degenerate(groups: GroupSet) -> tuple[list[str], list[str]]:
    masses = groups.masses
    kept = [name for name, m in zip(groups.names, masses) if m > 0.0]
    dropped = [name for name, m in zip(groups.names, masses) if m == 0.0]
    return kept, dropped


@dataclass
class PlattModel:
    """sigmoid(a * log(p) + b), fitted by cross-entropy."""

    a: float
    b: float
    convergence: dict = field(default_factory=dict)
    method: str = "platt"

    def apply(self, scores, membership=None) -> np.ndarray:
        p = np.asarray(scores, dtype=float)
        _check_scores_labels(p, np.zeros_like(p))
        return sigmoid(self.a * _clamped_log(p) + self.b)


@dataclass
class HistogramBinningModel:
    """Per-grid-cell additive corrections on rounded scores."""

    grid_m: int
    deltas: list[float]
    method: str = "histogram"

    def apply(self, scores, membership=None) -> np.ndarray:
        grid = BinGrid(self.grid_m)
        p = np.asarray(scores, dtype=float)
        idx = round_to_grid_index(p, grid)
        d = np.asarray(self.deltas, dtype=float)
        out = idx / grid.m + d[idx - 1]
        return np.clip(out, 0.0, 1.0)


@dataclass
class GcurModel:
    """Group unbiased recalibration, either additive or logistic."""

    variant: str
    group_names: list[str]
    lambdas: list[float] = field(default_factory=list)
    intercept: float = 0.0
    score_coef: float = 0.0
    group_coefs: list[float] = field(default_factory=list)
    dropped_groups: list[str] = field(default_factory=list)
    dependent_columns: list[str] = field(default_factory=list)
    convergence: dict = field(default_factory=dict)

    @property
    def method(self) -> str:
        return "gcur_linear" if self.variant == "linear" else "gcur_logistic"

    def apply(self, scores, membership=None) -> np.ndarray:
        p = np.asarray(scores, dtype=float)
        _check_scores_labels(p, np.zeros_like(p))
        if membership is None:
            raise DataError(f"{self.method} needs a membership matrix to apply")
        g = _check_membership(membership, p.size, len(self.group_names)).astype(float)
        if self.variant == "linear":
            return np.clip(p + g @ np.asarray(self.lambdas), 0.0, 1.0)
        z = self.intercept + self.score_coef * clamped_logit(p) + g @ np.asarray(self.group_coefs)
        return sigmoid(z)


@dataclass
class IterativePatchModel:
    """Recorded patch sequence for the two iterative calibrators.

    Applying the model replays the patches in training order, rounding
    back to the grid after each one, so outputs are always grid values.
    """

    method: str
    grid_m: int
    group_names: list[str]
    patches: list[dict]
    converged: bool
    stop_reason: str
    dropped_groups: list[str] = field(default_factory=list)
    alpha: float | None = None
    epsilon: float | None = None
    ls_loss: str | None = None
    val_brier_history: list[float] = field(default_factory=list)
    skipped_regions: list[dict] = field(default_factory=list)

    def apply(self, scores, membership=None) -> np.ndarray:
        grid = BinGrid(self.grid_m)
        p = np.asarray(scores, dtype=float)
        _check_scores_labels(p, np.zeros_like(p))
        if membership is None:
            raise DataError(f"{self.method} needs a membership matrix to apply")
        g = _check_membership(membership, p.size, len(self.group_names))
        cells = round_to_grid_index(p, grid)
        for patch in self.patches:
            if self.method == "ighb":
                members = g[:, patch["group"]] & (cells == patch["cell"])
                if not members.any():
                    continue
                value = patch["cell"] / grid.m + patch["delta"]
                value = min(max(value, 1.0 / grid.m), 1.0)
                cells[members] = int(round_to_grid_index(value, grid)[()])
            else:
                side_ok = cells <= patch["bin"] if patch["side"] == "le" else cells >= patch["bin"]
                members = g[:, patch["group"]] & side_ok
                if not members.any():
                    continue
                z = patch["alpha"] + patch["beta"] * clamped_logit(cells[members] / grid.m)
                cells[members] = round_to_grid_index(sigmoid(z), grid)
        return cells / grid.m


def fit_platt(scores, labels) -> PlattModel:
    """Fit sigmoid(a * log(p) + b) by damped Newton on cross-entropy."""
    p, y = _check_scores_labels(scores, labels)
    if y.min() == y.max():
        raise FitError(
            "all labels identical; a sigmoid fit is degenerate, use the base rate instead"
        )
    X = np.column_stack([_clamped_log(p), np.ones_like(p)])
    w, info = _newton_fit(X, y, loss="ce")
    return PlattModel(a=float(w[0]), b=float(w[1]), convergence=info)


def fit_histogram_binning(scores, labels, grid: BinGrid) -> HistogramBinningModel:
    """Mean residual per occupied rounding cell; unseen cells keep zero."""
    p, y = _check_scores_labels(scores, labels)
    idx = round_to_grid_index(p, grid)
    deltas = np.zeros(grid.m)
    for cell in range(1, grid.m + 1):
        mask = idx == cell
        if mask.any():
            deltas[cell - 1] = float(np.mean(y[mask] - cell / grid.m))
    return HistogramBinningModel(grid_m=grid.m, deltas=deltas.tolist())


def fit_gcur_linear(scores, labels, groups: GroupSet) -> GcurModel:
    """One additive offset per group, least squares on the raw residuals.

    Solving the damped normal equations zeroes every group's mean
    residual up to the damping term, including overlapping groups.
    Zero-mass groups are dropped and recorded; exactly collinear
    columns are solvable thanks to the damping and get reported.
    """
    p, y = _check_scores_labels(scores, labels)
    if groups.n_samples != p.size:
        raise DataError("group set covers a different number of samples")
    kept, dropped = _split_degenerate(groups)
    if not kept:
        raise FitError("every group is empty, nothing to fit")
    g = membership_matrix(groups, kept).astype(float)
    gram = g.T @ g + TIKHONOV * np.eye(len(kept))
    lam = np.linalg.solve(gram, g.T @ (y - p))
    dependent: list[str] = []
    if len(kept) > 1:
        diag = np.abs(np.diag(np.linalg.qr(g, mode="r")))
        tol = diag.max() * 1e-10 if diag.size else 0.0
        dependent = [name for name, d in zip(kept, diag) if d <= tol]
    return GcurModel(
        variant="linear",
        group_names=kept,
        lambdas=lam.tolist(),
        dropped_groups=dropped,
        dependent_columns=dependent,
    )


def fit_gcur_logistic(scores, labels, groups: GroupSet) -> GcurModel:
    """Logistic regression on [1, logit(p), group indicators]."""
    p, y = _check_scores_labels(scores, labels)
    if groups.n_samples != p.size:
        raise DataError("group set covers a different number of samples")
    if y.min() == y.max():
        raise FitError(
            "all labels identical; a logistic fit is degenerate, use the base rate instead"
        )
    kept, dropped = _split_degenerate(groups)
    if not kept:
        raise FitError("every group is empty, nothing to fit")
    g = membership_matrix(groups, kept).astype(float)
    X = np.column_stack([np.ones_like(p), clamped_logit(p), g])
    w, info = _newton_fit(X, y, loss="ce")
    return GcurModel(
        variant="logistic",
        group_names=kept,
        intercept=float(w[0]),
        score_coef=float(w[1]),
        group_coefs=w[2:].tolist(),
        dropped_groups=dropped,
        convergence=info,
    )


def _cell_stats(cells: np.ndarray, y: np.ndarray, g: np.ndarray, m: int):
    """Per (group, cell) member counts and residual sums against cell values."""
    k = g.shape[1]
    counts = np.zeros((k, m))
    rsums = np.zeros((k, m))
    residual = y - cells / m
    for j in range(k):
        sel = g[:, j]
        counts[j] = np.bincount(cells[sel] - 1, minlength=m)
        rsums[j] = np.bincount(cells[sel] - 1, weights=residual[sel], minlength=m)
    return counts, rsums


def fit_ighb(
    scores,
    labels,
    groups: GroupSet,
    grid: BinGrid,
    alpha: float | None = None,
    max_iters: int = PATCH_MAX_ITERS,
) -> IterativePatchModel:
    """Iterative group histogram binning.

    Starts from grid-rounded scores and, while any group's
    occupancy-weighted squared residual error exceeds ``alpha``
    (default ``1/m``), shifts the worst group-cell by its mean residual
    and rounds back to the grid.  Ties go to the lowest group index,
    then the lowest cell index.
    """
    p, y = _check_scores_labels(scores, labels)
    if groups.n_samples != p.size:
        raise DataError("group set covers a different number of samples")
    if alpha is None:
        alpha = 1.0 / grid.m
    if not alpha > 0.0:
        raise DataError(f"alpha must be positive, got {alpha}")
    kept, dropped = _split_degenerate(groups)
    if not kept:
        raise FitError("every group is empty, nothing to fit")
    g = membership_matrix(groups, kept).astype(bool)
    n = p.size
    cells = round_to_grid_index(p, grid)
    patches: list[dict] = []
    converged = False
    reason = "max_iters"
    for _ in range(max_iters):
        counts, rsums = _cell_stats(cells, y, g, grid.m)
        deltas = rsums / np.maximum(counts, 1.0)
        weights = counts / n * deltas * deltas
        if weights.sum(axis=1).max() <= alpha:
            converged = True
            reason = "error_budget"
            break
        # argmax walks row-major, so float ties resolve to the lowest
        # group index and then the lowest cell index.
        flat = int(np.argmax(weights))
        j, cell0 = divmod(flat, grid.m)
        cell = cell0 + 1
        delta = float(deltas[j, cell0])
        members = g[:, j] & (cells == cell)
        value = cell / grid.m + delta
        value = min(max(value, 1.0 / grid.m), 1.0)
        cells[members] = int(round_to_grid_index(value, grid)[()])
        patches.append({"group": j, "cell": cell, "delta": delta})
    return IterativePatchModel(
        method="ighb",
        grid_m=grid.m,
        group_names=kept,
        patches=patches,
        converged=converged,
        stop_reason=reason,
        dropped_groups=dropped,
        alpha=alpha,
    )


def fit_iglb(
    train_scores,
    train_labels,
    val_scores,
    val_labels,
    train_groups: GroupSet,
    val_groups: GroupSet,
    grid: BinGrid,
    epsilon: float = DEFAULT_EPSILON,
    ls_loss: str = "ce",
    max_iters: int = PATCH_MAX_ITERS,
) -> IterativePatchModel:
    """Iterative group logit binning with validation early stopping.

    Each round scans every (group, cell, side) region of one-sided
    overlapping cells, picks the one with the largest occupancy-weighted
    squared mean residual, fits a two-parameter sigmoid on the region's
    training samples, and keeps the patch only if the validation Brier
    score of the re-rounded scores strictly improves.  Regions holding a
    single label class are skipped for the round and recorded; selection
    stops when the chosen region's mass falls below ``epsilon``.
    """
    tp, ty = _check_scores_labels(train_scores, train_labels)
    vp, vy = _check_scores_labels(val_scores, val_labels)
    if train_groups.n_samples != tp.size or val_groups.n_samples != vp.size:
        raise DataError("group sets must cover the train and val samples")
    if train_groups.names != val_groups.names:
        raise DataError("train and val group sets must list the same groups")
    if not 0.0 < epsilon < 1.0:
        raise DataError(f"epsilon must be in (0, 1), got {epsilon}")
    if ls_loss not in ("ce", "brier"):
        raise DataError(f"ls_loss must be 'ce' or 'brier', got {ls_loss!r}")
    kept, dropped = _split_degenerate(train_groups)
    if not kept:
        raise FitError("every group is empty on the training split, nothing to fit")
    gt = membership_matrix(train_groups, kept).astype(bool)
    gv = membership_matrix(val_groups, kept).astype(bool)
    n = tp.size
    k = len(kept)
    tcells = round_to_grid_index(tp, grid)
    vcells = round_to_grid_index(vp, grid)

    def val_brier(cells: np.ndarray) -> float:
        return float(np.mean((cells / grid.m - vy) ** 2))

    patches: list[dict] = []
    skips: list[dict] = []
    history = [val_brier(vcells)]
    converged = False
    reason = "max_iters"
    for iteration in range(max_iters):
        counts, rsums = _cell_stats(tcells, ty, gt, grid.m)
        lsums = np.zeros((k, grid.m))
        for j in range(k):
            sel = gt[:, j]
            lsums[j] = np.bincount(tcells[sel] - 1, weights=ty[sel], minlength=grid.m)
        candidates = []
        for j in range(k):
            c_le = np.cumsum(counts[j])
            r_le = np.cumsum(rsums[j])
            l_le = np.cumsum(lsums[j])
            c_ge = np.cumsum(counts[j][::-1])[::-1]
            r_ge = np.cumsum(rsums[j][::-1])[::-1]
            l_ge = np.cumsum(lsums[j][::-1])[::-1]
            for m0 in range(grid.m):
                for side, c, r, lbl in (("le", c_le, r_le, l_le), ("ge", c_ge, r_ge, l_ge)):
                    cnt = c[m0]
                    if cnt == 0:
                        weight = 0.0
                        single = True
                    else:
                        delta = r[m0] / cnt
                        weight = cnt / n * delta * delta
                        single = lbl[m0] == 0.0 or lbl[m0] == cnt
                    candidates.append((weight, j, m0 + 1, side, cnt, single))
        candidates.sort(key=lambda c: (-c[0], c[1], c[2], 0 if c[3] == "le" else 1))
        chosen = None
        stop = None
        for weight, j, m, side, cnt, single in candidates:
            if cnt / n < epsilon:
                stop = "mass_threshold"
                break
            if single:
                skips.append({"iteration": iteration, "group": j, "bin": m, "side": side})
                continue
            chosen = (j, m, side)
            break
        if stop is not None:
            converged = True
            reason = stop
            break
        if chosen is None:
            converged = True
            reason = "all_regions_skipped"
            break
        j, m, side = chosen
        t_members = gt[:, j] & (tcells <= m if side == "le" else tcells >= m)
        x = clamped_logit(tcells[t_members] / grid.m)
        w, _ = _newton_fit(np.column_stack([np.ones_like(x), x]), ty[t_members], loss=ls_loss)
        a, b = float(w[0]), float(w[1])
        new_tcells = tcells.copy()
        new_tcells[t_members] = round_to_grid_index(
            sigmoid(a + b * clamped_logit(tcells[t_members] / grid.m)), grid
        )
        v_members = gv[:, j] & (vcells <= m if side == "le" else vcells >= m)
        new_vcells = vcells.copy()
        if v_members.any():
            new_vcells[v_members] = round_to_grid_index(
                sigmoid(a + b * clamped_logit(vcells[v_members] / grid.m)), grid
            )
        candidate_brier = val_brier(new_vcells)
        if candidate_brier >= history[-1]:
            converged = True
            reason = "val_brier"
            break
        tcells = new_tcells
        vcells = new_vcells
        patches.append({"group": j, "bin": m, "side": side, "alpha": a, "beta": b})
        history.append(candidate_brier)
    return IterativePatchModel(
        method="iglb",
        grid_m=grid.m,
        group_names=kept,
        patches=patches,
        converged=converged,
        stop_reason=reason,
        dropped_groups=dropped,
        epsilon=epsilon,
        ls_loss=ls_loss,
        val_brier_history=history,
        skipped_regions=skips,
    )


def model_to_json(model) -> str:
    """Serialize any fitted calibrator to a versioned JSON document."""
    payload: dict = {"schema_version": 1, "method": model.method}
    if isinstance(model, PlattModel):
        payload["params"] = {"a": model.a, "b": model.b}
        payload["convergence"] = model.convergence
    elif isinstance(model, HistogramBinningModel):
        payload["grid_m"] = model.grid_m
        payload["params"] = {"deltas": model.deltas}
    elif isinstance(model, GcurModel):
        payload["group_names"] = model.group_names
        payload["dropped_groups"] = model.dropped_groups
        if model.variant == "linear":
            payload["params"] = {
                "lambdas": model.lambdas,
                "dependent_columns": model.dependent_columns,
            }
        else:
            payload["params"] = {
                "intercept": model.intercept,
                "score_coef": model.score_coef,
                "group_coefs": model.group_coefs,
            }
            payload["convergence"] = model.convergence
    elif isinstance(model, IterativePatchModel):
        payload["grid_m"] = model.grid_m
        payload["group_names"] = model.group_names
        payload["dropped_groups"] = model.dropped_groups
        payload["params"] = {"patches": model.patches}
        payload["convergence"] = {
            "converged": model.converged,
            "iterations": len(model.patches),
            "stop_reason": model.stop_reason,
        }
        if model.method == "ighb":
            payload["params"]["alpha"] = model.alpha
        else:
            payload["params"]["epsilon"] = model.epsilon
            payload["params"]["ls_loss"] = model.ls_loss
            payload["params"]["val_brier_history"] = model.val_brier_history
            payload["params"]["skipped_regions"] = model.skipped_regions
    else:
        raise DataError(f"cannot serialize {type(model).__name__}")
    return json.dumps(payload, sort_keys=True, indent=2)


def model_from_json(text: str):
    """Rebuild a calibrator from :func:`model_to_json` output."""
    payload = json.loads(text)
    if payload.get("schema_version") != 1:
        raise DataError(f"unsupported model schema version {payload.get('schema_version')!r}")
    method = payload.get("method")
    params = payload.get("params", {})
    if method == "platt":
        return PlattModel(
            a=params["a"], b=params["b"], convergence=payload.get("convergence", {})
        )
    if method == "histogram":
        return HistogramBinningModel(grid_m=payload["grid_m"], deltas=list(params["deltas"]))
    if method == "gcur_linear":
        return GcurModel(
            variant="linear",
            group_names=list(payload["group_names"]),
            lambdas=list(params["lambdas"]),
            dropped_groups=list(payload.get("dropped_groups", [])),
            dependent_columns=list(params.get("dependent_columns", [])),
        )
    if method == "gcur_logistic":
        return GcurModel(
            variant="logistic",
            group_names=list(payload["group_names"]),
            intercept=params["intercept"],
            score_coef=params["score_coef"],
            group_coefs=list(params["group_coefs"]),
            dropped_groups=list(payload.get("dropped_groups", [])),
            convergence=payload.get("convergence", {}),
        )
    if method in ("ighb", "iglb"):
        conv = payload.get("convergence", {})
        return IterativePatchModel(
            method=method,
            grid_m=payload["grid_m"],
            group_names=list(payload["group_names"]),
            patches=list(params["patches"]),
            converged=bool(conv.get("converged", False)),
            stop_reason=conv.get("stop_reason", ""),
            dropped_groups=list(payload.get("dropped_groups", [])),
            alpha=params.get("alpha"),
            epsilon=params.get("epsilon"),
            ls_loss=params.get("ls_loss"),
            val_brier_history=list(params.get("val_brier_history", [])),
            skipped_regions=list(params.get("skipped_regions", [])),
        )
    raise DataError(f"unknown model method {method!r}")
