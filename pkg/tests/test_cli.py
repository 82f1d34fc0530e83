import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from codecal.cli import main
from codecal.data import load_records, save_records
from codecal.scoring import load_scored
from codecal.synthgen import Block, SynthSpec, generate

runner = CliRunner()


def write_synth(path, n=240, seed=17):
    spec = SynthSpec(
        blocks=(
            Block("easy", 0.4, 0.9, ("constant", 0.5)),
            Block("mid", 0.3, 0.6, ("uniform", 0.35, 0.65)),
            Block("hard", 0.3, 0.3, ("constant", 0.5)),
        ),
        n_samples=n,
        seed=seed,
        languages=("python", "cpp"),
    )
    dataset, _ = generate(spec)
    for i, sample in enumerate(dataset.samples):
        sample.code_text = "if x:\n    y += 1\n" * (i % 5) + "return y\n"
    save_records(dataset, str(path))
    return dataset


def run(args):
    return runner.invoke(main, args, catch_exceptions=False)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestScoreCommand:
    def test_scores_every_record(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records)
        out = tmp_path / "scored.jsonl"
        result = run(["score", "--input", str(records), "--output", str(out)])
        assert result.exit_code == 0
        scored = load_scored(str(out))
        assert len(scored) == 240
        assert all(item.method == "avg_prob" for item in scored)

    def test_bad_method_flag_is_usage_error(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=10)
        result = runner.invoke(
            main,
            ["score", "--input", str(records), "--output", str(tmp_path / "o"), "--method", "bogus"],
        )
        assert result.exit_code == 2

    def test_bad_method_in_config_is_data_error(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=10)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"method": "bogus"}))
        result = run(
            [
                "score",
                "--input",
                str(records),
                "--output",
                str(tmp_path / "o"),
                "--config",
                str(cfg),
            ]
        )
        assert result.exit_code == 4

    def test_config_fills_defaults_but_flags_win(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=20)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"method": "code_prob"}))
        from_config = tmp_path / "a.jsonl"
        run(["score", "--input", str(records), "--output", str(from_config), "--config", str(cfg)])
        assert all(item.method == "code_prob" for item in load_scored(str(from_config)))
        from_flag = tmp_path / "b.jsonl"
        run(
            [
                "score",
                "--input",
                str(records),
                "--output",
                str(from_flag),
                "--config",
                str(cfg),
                "--method",
                "avg_prob",
            ]
        )
        assert all(item.method == "avg_prob" for item in load_scored(str(from_flag)))

    def test_unknown_config_key_rejected(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=10)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tail_size": 5}))
        result = run(
            ["score", "--input", str(records), "--output", str(tmp_path / "o"), "--config", str(cfg)]
        )
        assert result.exit_code == 4

    def test_missing_input_is_io_error(self, tmp_path):
        result = run(
            ["score", "--input", str(tmp_path / "absent.jsonl"), "--output", str(tmp_path / "o")]
        )
        assert result.exit_code == 3

    def test_malformed_record_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"problem_id": "p"\n')
        result = run(["score", "--input", str(bad), "--output", str(tmp_path / "o")])
        assert result.exit_code == 4


class TestSplitCommand:
    def test_partition_and_determinism(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=100)
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        for out in (out1, out2):
            result = run(
                ["split", "--input", str(records), "--output-dir", str(out), "--seed", "3"]
            )
            assert result.exit_code == 0
        names = ("train.jsonl", "val.jsonl", "test.jsonl")
        total = 0
        for name in names:
            first = (out1 / name).read_bytes()
            assert first == (out2 / name).read_bytes()
            total += len(first.splitlines())
        assert total == 100

    def test_problem_purity(self, tmp_path):
        records = tmp_path / "records.jsonl"
        dataset = write_synth(records, n=60)
        out = tmp_path / "splits"
        run(["split", "--input", str(records), "--output-dir", str(out)])
        seen = {}
        for name in ("train", "val", "test"):
            for line in (out / f"{name}.jsonl").read_text().splitlines():
                pid = json.loads(line)["problem_id"]
                assert seen.setdefault(pid, name) == name

    def test_lines_pass_through_unchanged(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=40)
        out = tmp_path / "splits"
        run(["split", "--input", str(records), "--output-dir", str(out)])
        original = set(records.read_text().splitlines())
        routed = set()
        for name in ("train", "val", "test"):
            routed.update((out / f"{name}.jsonl").read_text().splitlines())
        assert routed == original

    def test_bad_fractions_rejected(self, tmp_path):
        records = tmp_path / "records.jsonl"
        write_synth(records, n=30)
        result = run(
            [
                "split",
                "--input",
                str(records),
                "--output-dir",
                str(tmp_path / "s"),
                "--train",
                "0.9",
                "--val",
                "0.3",
                "--test",
                "0.3",
            ]
        )
        assert result.exit_code == 4


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Scored and split synthetic data shared by the fit-eval tests."""
    root = tmp_path_factory.mktemp("pipeline")
    records = root / "records.jsonl"
    write_synth(records, n=600, seed=23)
    scored = root / "scored.jsonl"
    run(["score", "--input", str(records), "--output", str(scored)])
    splits = root / "splits"
    run(["split", "--input", str(scored), "--output-dir", str(splits)])
    return splits


def fit_eval_args(splits, outdir, extra=()):
    return [
        "fit-eval",
        "--train",
        str(splits / "train.jsonl"),
        "--val",
        str(splits / "val.jsonl"),
        "--test",
        str(splits / "test.jsonl"),
        "--output-dir",
        str(outdir),
        *extra,
    ]


class TestFitEvalCommand:
    def test_artifacts_written(self, pipeline, tmp_path):
        outdir = tmp_path / "out"
        result = run(
            fit_eval_args(
                pipeline,
                outdir,
                ("--complexity", "difficulty_label", "--grid-m", "10"),
            )
        )
        assert result.exit_code == 0
        assert (outdir / "grouping.json").is_file()
        assert (outdir / "report_uncalibrated.json").is_file()
        assert (outdir / "reliability_uncalibrated.csv").is_file()
        for name in ("platt", "histogram", "gcur_linear", "gcur_logistic", "ighb", "iglb"):
            assert (outdir / f"model_{name}.json").is_file()
            assert (outdir / f"report_{name}.json").is_file()
            assert (outdir / f"reliability_{name}.csv").is_file()
        rows = read_csv(outdir / "comparison.csv")
        assert rows[0] == ["method", "bss", "acc", "ece", "brier"]
        assert [r[0] for r in rows[1:]] == [
            "uncalibrated",
            "platt",
            "histogram",
            "gcur_linear",
            "gcur_logistic",
            "ighb",
            "iglb",
        ]
        for row in rows[1:]:
            for cell in row[1:]:
                assert cell == "-inf" or float(cell) == pytest.approx(float(cell))

    def test_method_subset_and_rerun_identical(self, pipeline, tmp_path):
        extra = ("--methods", "platt,histogram", "--grid-m", "10")
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        for outdir in (out1, out2):
            result = run(fit_eval_args(pipeline, outdir, extra))
            assert result.exit_code == 0
        files = sorted(p.name for p in out1.iterdir())
        assert files == sorted(p.name for p in out2.iterdir())
        for name in files:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_failed_method_gets_failed_row(self, pipeline, tmp_path):
        # A degenerate train split (all labels 1) breaks the logistic fits
        # but not the binning ones.
        root = tmp_path
        records = root / "records.jsonl"
        spec = SynthSpec(
            blocks=(Block("sure", 1.0, 1.0, ("uniform", 0.4, 0.9)),),
            n_samples=120,
            seed=5,
        )
        dataset, _ = generate(spec)
        save_records(dataset, str(records))
        scored = root / "scored.jsonl"
        run(["score", "--input", str(records), "--output", str(scored)])
        splits = root / "splits"
        run(["split", "--input", str(scored), "--output-dir", str(splits)])
        outdir = root / "out"
        result = run(
            fit_eval_args(
                splits,
                outdir,
                ("--methods", "platt,histogram", "--grid-m", "10", "--length-metrics", "none"),
            )
        )
        assert result.exit_code == 0
        rows = {r[0]: r[1:] for r in read_csv(outdir / "comparison.csv")[1:]}
        assert rows["platt"] == ["failed"] * 4
        assert rows["histogram"] != ["failed"] * 4
        assert rows["uncalibrated"][0] in ("-inf", "1.0")
        assert not (outdir / "model_platt.json").exists()

    def test_unknown_method_list_rejected(self, pipeline, tmp_path):
        result = run(
            fit_eval_args(pipeline, tmp_path / "out", ("--methods", "platt,mystery"))
        )
        assert result.exit_code == 4


class TestAblateCommand:
    def test_subset_grid(self, pipeline, tmp_path):
        out = tmp_path / "ablation.csv"
        result = run(
            [
                "ablate",
                "--train",
                str(pipeline / "train.jsonl"),
                "--val",
                str(pipeline / "val.jsonl"),
                "--test",
                str(pipeline / "test.jsonl"),
                "--methods",
                "platt,gcur_linear",
                "--complexity",
                "difficulty_label",
                "--grid-m",
                "10",
                "--output",
                str(out),
            ]
        )
        assert result.exit_code == 0
        rows = read_csv(out)
        assert rows[0] == ["method", "groups", "bss"]
        subsets = [
            "complexity",
            "complexity+language",
            "complexity+language+length",
            "complexity+length",
            "language",
            "language+length",
            "length",
        ]
        assert [r[1] for r in rows[1:]] == [s for s in subsets for _ in range(2)]
        # A global method ignores the grouping, so its score is constant
        # across subsets.
        platt_scores = {r[2] for r in rows[1:] if r[0] == "platt"}
        assert len(platt_scores) == 1

    def test_no_categories_rejected(self, pipeline, tmp_path):
        result = run(
            [
                "ablate",
                "--train",
                str(pipeline / "train.jsonl"),
                "--val",
                str(pipeline / "val.jsonl"),
                "--test",
                str(pipeline / "test.jsonl"),
                "--no-language",
                "--length-metrics",
                "none",
                "--output",
                str(tmp_path / "a.csv"),
            ]
        )
        assert result.exit_code == 4


class TestReportCommand:
    def test_writes_both_charts(self, pipeline, tmp_path):
        outdir = tmp_path / "fit"
        run(fit_eval_args(pipeline, outdir, ("--methods", "platt", "--grid-m", "10")))
        charts = tmp_path / "charts"
        result = run(
            ["report", "--report", str(outdir / "report_platt.json"), "--output-dir", str(charts)]
        )
        assert result.exit_code == 0
        rel = charts / "report_platt_reliability.svg"
        grp = charts / "report_platt_groups.svg"
        assert rel.is_file() and grp.is_file()
        assert rel.read_text().startswith("<svg")
        assert grp.read_text().startswith("<svg")

    def test_missing_report_is_io_error(self, tmp_path):
        result = run(
            ["report", "--report", str(tmp_path / "nope.json"), "--output-dir", str(tmp_path)]
        )
        assert result.exit_code == 3


class TestConvertCommand:
    def aliased_line(self, i, logprobs=(-0.2, -0.1), extra=None):
        obj = {
            "task_id": f"t{i // 2}",
            "gen_id": f"g{i}",
            "lang": "python",
            "logprobs": list(logprobs),
            "passed": i % 2 == 0,
            "level": "easy",
            "code": "print(1)",
        }
        if extra:
            obj.update(extra)
        return json.dumps(obj)

    def test_aliases_resolved_and_mapping_written(self, tmp_path):
        src = tmp_path / "raw.jsonl"
        src.write_text("\n".join(self.aliased_line(i) for i in range(6)) + "\n")
        out = tmp_path / "converted.jsonl"
        result = run(["convert-calibri", "--source", str(src), "--output", str(out)])
        assert result.exit_code == 0
        dataset = load_records(str(out))
        assert len(dataset.samples) == 6
        sample = dataset.samples[0]
        assert sample.problem_id == "t0"
        assert sample.language == "python"
        assert sample.label in (0, 1)
        assert sample.difficulty == "easy"
        mapping = json.loads((out.parent / "converted.jsonl.mapping.json").read_text())
        assert mapping["fields"]["problem_id"] == ["task_id"]
        assert mapping["fields"]["label"] == ["passed"]
        assert mapping["converted"] == 6
        assert mapping["skipped_missing_logprobs"] == 0

    def test_rows_without_logprobs_skipped(self, tmp_path):
        src = tmp_path / "raw.jsonl"
        lines = [self.aliased_line(0), self.aliased_line(1, logprobs=())]
        src.write_text("\n".join(lines) + "\n")
        out = tmp_path / "converted.jsonl"
        result = run(["convert-calibri", "--source", str(src), "--output", str(out)])
        assert result.exit_code == 0
        assert len(load_records(str(out)).samples) == 1
        mapping = json.loads((out.parent / "converted.jsonl.mapping.json").read_text())
        assert mapping["skipped_missing_logprobs"] == 1

    def test_unknown_layout_rejected(self, tmp_path):
        src = tmp_path / "raw.jsonl"
        src.write_text(json.dumps({"prompt": "x", "score": 1}) + "\n")
        result = run(
            ["convert-calibri", "--source", str(src), "--output", str(tmp_path / "o.jsonl")]
        )
        assert result.exit_code == 4
        assert "expected" in result.output or result.exit_code == 4

    def test_directory_source(self, tmp_path):
        srcdir = tmp_path / "dump"
        srcdir.mkdir()
        (srcdir / "b.jsonl").write_text(self.aliased_line(2) + "\n")
        (srcdir / "a.jsonl").write_text(self.aliased_line(0) + "\n")
        out = tmp_path / "converted.jsonl"
        result = run(["convert-calibri", "--source", str(srcdir), "--output", str(out)])
        assert result.exit_code == 0
        mapping = json.loads((out.parent / "converted.jsonl.mapping.json").read_text())
        assert [Path(p).name for p in mapping["source_files"]] == ["a.jsonl", "b.jsonl"]

    def test_duplicate_sample_ids_rejected(self, tmp_path):
        src = tmp_path / "raw.jsonl"
        src.write_text(self.aliased_line(0) + "\n" + self.aliased_line(0) + "\n")
        result = run(
            ["convert-calibri", "--source", str(src), "--output", str(tmp_path / "o.jsonl")]
        )
        assert result.exit_code == 4

    def test_missing_source_rejected(self, tmp_path):
        result = run(
            [
                "convert-calibri",
                "--source",
                str(tmp_path / "nowhere"),
                "--output",
                str(tmp_path / "o.jsonl"),
            ]
        )
        assert result.exit_code == 4
