"""Command line pipeline: score, split, fit-eval, ablate, report, convert.

Every command is deterministic: rerunning with the same inputs and
flags reproduces output files byte for byte.  Exit statuses separate
usage problems (2, from click), IO failures (3), and data errors (4).
"""

import csv
import functools
import itertools
import json
import os
from pathlib import Path

import click
import numpy as np
from click.core import ParameterSource

from .binning import BinGrid
from .calibrators import (
    DEFAULT_EPSILON,
    fit_gcur_linear,
    fit_gcur_logistic,
    fit_histogram_binning,
    fit_ighb,
    fit_iglb,
    fit_platt,
    membership_matrix,
    model_to_json,
)
from .data import Dataset, SplitSpec, assign_problem_splits, load_records, parse_record
from .errors import ConvertError, DataError, RecordError
from .groups import GroupingConfig, GroupingModel
from .metrics import NEG_INF, EvalReport, evaluate
from .scoring import ConfidenceMethod, load_scored, save_scored, score_dataset
from .svg import group_chart, reliability_chart

METHOD_NAMES = ("platt", "histogram", "gcur_linear", "gcur_logistic", "ighb", "iglb")
GROUPLESS_METHODS = ("platt", "histogram")
SCORE_METHODS = ("avg_prob", "code_prob", "tail_prob")

EXIT_IO = 3
EXIT_DATA = 4


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_DATA) from exc
        except OSError as exc:
            click.echo(f"io error: {exc}", err=True)
            raise SystemExit(EXIT_IO) from exc

    return wrapper


def _merge_config(ctx: click.Context, config_path: str | None, values: dict) -> dict:
    """Fill defaulted parameters from a JSON config file; flags win."""
    if not config_path:
        return values
    with open(config_path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(values))
    if unknown:
        raise DataError(f"unknown config keys: {', '.join(unknown)}")
    merged = dict(values)
    for key, value in data.items():
        if ctx.get_parameter_source(key) == ParameterSource.DEFAULT:
            merged[key] = value
    return merged


def _check_choice(value: str, choices: tuple, what: str) -> str:
    if value not in choices:
        raise DataError(f"{what} must be one of {', '.join(choices)}, got {value!r}")
    return value


def _parse_methods(raw: str) -> list[str]:
    names = [part.strip() for part in raw.split(",") if part.strip()]
    if not names:
        raise DataError("no calibration methods requested")
    for name in names:
        _check_choice(name, METHOD_NAMES, "method")
    if len(set(names)) != len(names):
        raise DataError("duplicate method names requested")
    return names


def _parse_length_metrics(raw: str) -> tuple:
    if raw in ("", "none"):
        return ()
    metrics = tuple(part.strip() for part in raw.split(",") if part.strip())
    for metric in metrics:
        _check_choice(metric, ("chars", "loc"), "length metric")
    return metrics


def _format_metric(value: float) -> str:
    return "-inf" if value == NEG_INF else repr(float(value))


def _write_reliability_csv(report: EvalReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin", "count", "conf", "acc"])
        for bin_index, count, conf, acc in report.reliability:
            writer.writerow([bin_index, count, repr(conf), repr(acc)])


@click.group()
def main() -> None:
    """Confidence calibration pipeline for code-generation samples."""


@main.command()
@click.option("--input", "input_path", required=True, help="Record JSONL to score.")
@click.option("--output", "output_path", required=True, help="Scored JSONL to write.")
@click.option(
    "--method",
    default="avg_prob",
    show_default=True,
    type=click.Choice(SCORE_METHODS),
    help="Scoring window.",
)
@click.option("--tail-k", default=40, show_default=True, help="Tail window size for tail_prob.")
@click.option("--skip-missing", is_flag=True, help="Drop unscorable samples instead of failing.")
@click.option("--config", "config_path", default=None, help="JSON config; flags take precedence.")
@click.pass_context
@_guarded
def score(ctx, input_path, output_path, method, tail_k, skip_missing, config_path) -> None:
    """Attach a raw confidence score to every record."""
    values = _merge_config(
        ctx,
        config_path,
        {"method": method, "tail_k": tail_k, "skip_missing": skip_missing},
    )
    _check_choice(values["method"], SCORE_METHODS, "scoring method")
    dataset = load_records(input_path)
    conf = ConfidenceMethod(values["method"], tail_tokens=int(values["tail_k"]))
    scored, skipped = score_dataset(dataset, conf, skip_missing=bool(values["skip_missing"]))
    save_scored(scored, output_path)
    click.echo(f"scored {len(scored)} samples, skipped {skipped}", err=True)


@main.command()
@click.option("--input", "input_path", required=True, help="Record JSONL to split.")
@click.option("--output-dir", required=True, help="Directory for train/val/test JSONL files.")
@click.option("--train", default=0.6, show_default=True, help="Train fraction.")
@click.option("--val", default=0.2, show_default=True, help="Validation fraction.")
@click.option("--test", default=0.2, show_default=True, help="Test fraction.")
@click.option("--seed", default=0, show_default=True, help="Hash seed fixing the split.")
@_guarded
def split(input_path, output_dir, train, val, test, seed) -> None:
    """Split records into train/val/test along problem boundaries.

    Lines pass through untouched, so already scored records keep their
    extra fields.
    """
    spec = SplitSpec(train=train, val=val, test=test, seed=seed)
    lines: list[tuple[str, str]] = []
    with open(input_path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RecordError(f"malformed JSON: {exc.msg}", line=lineno) from exc
            pid = obj.get("problem_id") if isinstance(obj, dict) else None
            if not isinstance(pid, str) or not pid:
                raise RecordError("missing problem_id", line=lineno)
            lines.append((pid, raw.rstrip("\n")))
    assignment = assign_problem_splits((pid for pid, _ in lines), spec)
    os.makedirs(output_dir, exist_ok=True)
    handles = {}
    counts = {"train": 0, "val": 0, "test": 0}
    try:
        for name in ("train", "val", "test"):
            handles[name] = open(
                os.path.join(output_dir, f"{name}.jsonl"), "w", encoding="utf-8"
            )
        for pid, line in lines:
            name = assignment[pid]
            handles[name].write(line + "\n")
            counts[name] += 1
    finally:
        for fh in handles.values():
            fh.close()
    click.echo(
        f"train={counts['train']} val={counts['val']} test={counts['test']}", err=True
    )


def _grouping_from_values(values: dict) -> GroupingConfig:
    return GroupingConfig(
        use_language=bool(values["language"]),
        length_metrics=_parse_length_metrics(values["length_metrics"]),
        complexity_source=_check_choice(
            values["complexity"],
            ("none", "difficulty_label", "branch_heuristic"),
            "complexity source",
        ),
        always_on=bool(values["all_group"]),
    )


def _load_split(path: str):
    scored = load_scored(path)
    dataset = Dataset([item.sample for item in scored], provenance=path)
    p = np.array([item.p_hat for item in scored])
    y = np.array([item.sample.label for item in scored])
    return dataset, p, y


def _fit_one(name, grid, tp, ty, vp, vy, train_groups, val_groups, alpha, epsilon, ls_loss):
    if name == "platt":
        return fit_platt(tp, ty)
    if name == "histogram":
        return fit_histogram_binning(tp, ty, grid)
    if name == "gcur_linear":
        return fit_gcur_linear(tp, ty, train_groups)
    if name == "gcur_logistic":
        return fit_gcur_logistic(tp, ty, train_groups)
    if name == "ighb":
        return fit_ighb(tp, ty, train_groups, grid, alpha=alpha)
    return fit_iglb(
        tp, ty, vp, vy, train_groups, val_groups, grid, epsilon=epsilon, ls_loss=ls_loss
    )


def _apply_model(model, p, groups):
    if model.method in GROUPLESS_METHODS:
        return model.apply(p)
    return model.apply(p, membership_matrix(groups, model.group_names))


_SHARED_FIT_OPTIONS = [
    click.option("--train", "train_path", required=True, help="Scored train JSONL."),
    click.option("--val", "val_path", required=True, help="Scored validation JSONL."),
    click.option("--test", "test_path", required=True, help="Scored test JSONL."),
    click.option(
        "--methods",
        default=",".join(METHOD_NAMES),
        show_default=True,
        help="Comma-separated calibration methods.",
    ),
    click.option("--grid-m", default=20, show_default=True, help="Number of grid bins."),
    click.option("--alpha", default=None, type=float, help="ighb budget; default 1/grid-m."),
    click.option(
        "--epsilon", default=DEFAULT_EPSILON, show_default=True, help="iglb region mass floor."
    ),
    click.option(
        "--ls-loss",
        default="ce",
        show_default=True,
        type=click.Choice(("ce", "brier")),
        help="iglb patch loss.",
    ),
    click.option("--language/--no-language", "language", default=True, show_default=True),
    click.option(
        "--length-metrics",
        default="chars,loc",
        show_default=True,
        help="Comma-separated length metrics (chars, loc) or 'none'.",
    ),
    click.option(
        "--complexity",
        default="none",
        show_default=True,
        type=click.Choice(("none", "difficulty_label", "branch_heuristic")),
        help="Complexity source.",
    ),
    click.option("--all-group/--no-all-group", "all_group", default=True, show_default=True),
    click.option("--config", "config_path", default=None, help="JSON config; flags win."),
]


def _with_options(options):
    def deco(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return deco


@main.command("fit-eval")
@_with_options(_SHARED_FIT_OPTIONS)
@click.option("--output-dir", required=True, help="Directory for models, reports, and tables.")
@click.pass_context
@_guarded
def fit_eval(
    ctx,
    train_path,
    val_path,
    test_path,
    methods,
    grid_m,
    alpha,
    epsilon,
    ls_loss,
    language,
    length_metrics,
    complexity,
    all_group,
    config_path,
    output_dir,
) -> None:
    """Fit requested calibrators on train and evaluate them on test."""
    values = _merge_config(
        ctx,
        config_path,
        {
            "methods": methods,
            "grid_m": grid_m,
            "alpha": alpha,
            "epsilon": epsilon,
            "ls_loss": ls_loss,
            "language": language,
            "length_metrics": length_metrics,
            "complexity": complexity,
            "all_group": all_group,
        },
    )
    method_list = _parse_methods(values["methods"])
    grid = BinGrid(int(values["grid_m"]))
    _check_choice(values["ls_loss"], ("ce", "brier"), "ls-loss")
    train_ds, tp, ty = _load_split(train_path)
    val_ds, vp, vy = _load_split(val_path)
    test_ds, sp, sy = _load_split(test_path)
    grouping = GroupingModel.fit(train_ds, _grouping_from_values(values))
    train_groups = grouping.apply(train_ds)
    val_groups = grouping.apply(val_ds)
    test_groups = grouping.apply(test_ds)

    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "grouping.json"), "w", encoding="utf-8") as fh:
        fh.write(grouping.to_json())
        fh.write("\n")

    rows = []
    baseline = evaluate(sp, sy, grid, test_groups)
    with open(os.path.join(output_dir, "report_uncalibrated.json"), "w", encoding="utf-8") as fh:
        fh.write(baseline.to_json())
        fh.write("\n")
    _write_reliability_csv(baseline, os.path.join(output_dir, "reliability_uncalibrated.csv"))
    rows.append(
        [
            "uncalibrated",
            _format_metric(baseline.bss),
            _format_metric(baseline.accuracy),
            _format_metric(baseline.ece),
            _format_metric(baseline.brier),
        ]
    )
    for name in method_list:
        try:
            model = _fit_one(
                name,
                grid,
                tp,
                ty,
                vp,
                vy,
                train_groups,
                val_groups,
                values["alpha"],
                float(values["epsilon"]),
                values["ls_loss"],
            )
            calibrated = _apply_model(model, sp, test_groups)
        except DataError as exc:
            click.echo(f"{name} failed: {exc}", err=True)
            rows.append([name, "failed", "failed", "failed", "failed"])
            continue
        with open(os.path.join(output_dir, f"model_{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(model_to_json(model))
            fh.write("\n")
        report = evaluate(calibrated, sy, grid, test_groups)
        with open(os.path.join(output_dir, f"report_{name}.json"), "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
            fh.write("\n")
        _write_reliability_csv(report, os.path.join(output_dir, f"reliability_{name}.csv"))
        rows.append(
            [
                name,
                _format_metric(report.bss),
                _format_metric(report.accuracy),
                _format_metric(report.ece),
                _format_metric(report.brier),
            ]
        )
    with open(os.path.join(output_dir, "comparison.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "bss", "acc", "ece", "brier"])
        writer.writerows(rows)
    click.echo(f"wrote {output_dir}/comparison.csv", err=True)


@main.command()
@_with_options(_SHARED_FIT_OPTIONS)
@click.option("--output", "output_path", required=True, help="Ablation CSV to write.")
@click.pass_context
@_guarded
def ablate(
    ctx,
    train_path,
    val_path,
    test_path,
    methods,
    grid_m,
    alpha,
    epsilon,
    ls_loss,
    language,
    length_metrics,
    complexity,
    all_group,
    config_path,
    output_path,
) -> None:
    """Test BSS per method for every non-empty subset of group categories."""
    values = _merge_config(
        ctx,
        config_path,
        {
            "methods": methods,
            "grid_m": grid_m,
            "alpha": alpha,
            "epsilon": epsilon,
            "ls_loss": ls_loss,
            "language": language,
            "length_metrics": length_metrics,
            "complexity": complexity,
            "all_group": all_group,
        },
    )
    method_list = _parse_methods(values["methods"])
    grid = BinGrid(int(values["grid_m"]))
    _check_choice(values["ls_loss"], ("ce", "brier"), "ls-loss")
    base_cfg = _grouping_from_values(values)
    categories = []
    if base_cfg.complexity_source != "none":
        categories.append("complexity")
    if base_cfg.use_language:
        categories.append("language")
    if base_cfg.length_metrics:
        categories.append("length")
    if not categories:
        raise DataError("no group categories enabled, nothing to ablate")
    subsets = []
    for size in range(1, len(categories) + 1):
        subsets.extend(itertools.combinations(sorted(categories), size))
    subsets.sort(key=lambda subset: "+".join(subset))

    train_ds, tp, ty = _load_split(train_path)
    val_ds, vp, vy = _load_split(val_path)
    test_ds, sp, sy = _load_split(test_path)

    rows = []
    for subset in subsets:
        cfg = GroupingConfig(
            use_language="language" in subset,
            length_metrics=base_cfg.length_metrics if "length" in subset else (),
            complexity_source=base_cfg.complexity_source if "complexity" in subset else "none",
            always_on=base_cfg.always_on,
        )
        grouping = GroupingModel.fit(train_ds, cfg)
        train_groups = grouping.apply(train_ds)
        val_groups = grouping.apply(val_ds)
        test_groups = grouping.apply(test_ds)
        for name in method_list:
            try:
                model = _fit_one(
                    name,
                    grid,
                    tp,
                    ty,
                    vp,
                    vy,
                    train_groups,
                    val_groups,
                    values["alpha"],
                    float(values["epsilon"]),
                    values["ls_loss"],
                )
                calibrated = _apply_model(model, sp, test_groups)
                report = evaluate(calibrated, sy, grid)
                bss = _format_metric(report.bss)
            except DataError as exc:
                click.echo(f"{name} on {'+'.join(subset)} failed: {exc}", err=True)
                bss = "failed"
            rows.append(["+".join(subset), name, bss])
    with open(output_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "groups", "bss"])
        for subset_name, name, bss in rows:
            writer.writerow([name, subset_name, bss])
    click.echo(f"wrote {output_path}", err=True)


@main.command()
@click.option("--report", "report_path", required=True, help="EvalReport JSON to render.")
@click.option("--output-dir", required=True, help="Directory for the SVG charts.")
@_guarded
def report(report_path, output_dir) -> None:
    """Render reliability and group charts from a report."""
    with open(report_path, "r", encoding="utf-8") as fh:
        parsed = EvalReport.from_json(fh.read())
    stem = Path(report_path).stem
    os.makedirs(output_dir, exist_ok=True)
    rel_path = os.path.join(output_dir, f"{stem}_reliability.svg")
    with open(rel_path, "w", encoding="utf-8") as fh:
        fh.write(reliability_chart(parsed, title=f"{stem}: accuracy per confidence bin"))
    grp_path = os.path.join(output_dir, f"{stem}_groups.svg")
    with open(grp_path, "w", encoding="utf-8") as fh:
        fh.write(group_chart(parsed, title=f"{stem}: group confidence vs accuracy"))
    click.echo(f"wrote {rel_path} and {grp_path}", err=True)


_CALIBRI_ALIASES = {
    "problem_id": ("problem_id", "task_id", "question_id"),
    "sample_id": ("sample_id", "generation_id", "gen_id"),
    "language": ("language", "lang"),
    "token_logprobs": ("token_logprobs", "logprobs", "token_log_probs"),
    "label": ("label", "correct", "passed", "is_correct"),
    "difficulty": ("difficulty", "difficulty_label", "level"),
    "code_text": ("code_text", "extracted_code", "code"),
    "code_span": ("code_span",),
}
_CALIBRI_REQUIRED = ("problem_id", "language", "label")


def _resolve_field(obj: dict, target: str):
    for alias in _CALIBRI_ALIASES[target]:
        if alias in obj:
            return alias, obj[alias]
    return None, None


@main.command("convert-calibri")
@click.option("--source", required=True, help="Downloaded dataset file or directory of JSONL.")
@click.option("--output", "output_path", required=True, help="Converted record JSONL.")
@_guarded
def convert_calibri(source, output_path) -> None:
    """Convert locally downloaded CALIBRI-style JSONL to the record schema.

    Never fetches anything; point --source at files you downloaded
    yourself.  A mapping metadata file is written next to the output.
    """
    src = Path(source)
    if src.is_dir():
        files = sorted(str(p) for p in src.glob("*.jsonl"))
        if not files:
            raise ConvertError(f"no .jsonl files under {source}")
    elif src.is_file():
        files = [str(src)]
    else:
        raise ConvertError(f"source {source} does not exist")

    used_fields: dict[str, set] = {}
    skipped = 0
    converted = []
    row_index = 0
    for path in files:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                row_index += 1
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ConvertError(f"{path} line {lineno}: malformed JSON: {exc.msg}") from exc
                if not isinstance(obj, dict):
                    raise ConvertError(f"{path} line {lineno}: record is not a JSON object")
                missing = [
                    target for target in _CALIBRI_REQUIRED if _resolve_field(obj, target)[0] is None
                ]
                if missing:
                    expected = {t: list(_CALIBRI_ALIASES[t]) for t in missing}
                    raise ConvertError(
                        f"{path} line {lineno}: unknown layout, expected one of {expected}"
                    )
                key, lps = _resolve_field(obj, "token_logprobs")
                if key is None or not lps:
                    skipped += 1
                    continue
                used_fields.setdefault("token_logprobs", set()).add(key)
                record: dict = {}
                for target in ("problem_id", "language", "label", "difficulty", "code_text", "code_span"):
                    key, value = _resolve_field(obj, target)
                    if key is None:
                        continue
                    used_fields.setdefault(target, set()).add(key)
                    record[target] = value
                key, sid = _resolve_field(obj, "sample_id")
                if key is None:
                    sid = f"{record['problem_id']}#r{row_index}"
                    used_fields.setdefault("sample_id", set()).add("<synthesized>")
                else:
                    used_fields.setdefault("sample_id", set()).add(key)
                record["sample_id"] = str(sid)
                record["problem_id"] = str(record["problem_id"])
                if isinstance(record["label"], bool):
                    record["label"] = int(record["label"])
                record["token_logprobs"] = lps
                converted.append(record)
    samples = []
    for i, record in enumerate(converted):
        try:
            samples.append(parse_record(record, line=i + 1))
        except RecordError as exc:
            raise ConvertError(f"converted record rejected: {exc}") from exc
    seen = set()
    for sample in samples:
        if sample.sample_id in seen:
            raise ConvertError(f"duplicate sample_id {sample.sample_id!r} after conversion")
        seen.add(sample.sample_id)
    with open(output_path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_dict(), sort_keys=True))
            fh.write("\n")
    mapping = {
        "source_files": files,
        "fields": {k: sorted(v) for k, v in sorted(used_fields.items())},
        "converted": len(samples),
        "skipped_missing_logprobs": skipped,
    }
    meta_path = output_path + ".mapping.json"
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(mapping, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"converted {len(samples)} records, skipped {skipped}", err=True)


if __name__ == "__main__":
    main()
