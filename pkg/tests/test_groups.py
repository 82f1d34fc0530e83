import numpy as np
import pytest

from codecal.data import Dataset, Sample
from codecal.errors import DataError, RecordError
from codecal.groups import (
    GroupingConfig,
    GroupingModel,
    GroupSet,
    assemble,
    branch_count,
    build_complexity_groups,
    build_language_groups,
    build_length_groups,
    nearest_rank_quantile,
)

from oracles import brute_nearest_rank_quantile


def make_sample(i, language="python", code_text=None, difficulty=None):
    return Sample(
        problem_id=f"p{i}",
        sample_id=f"s{i}",
        language=language,
        token_logprobs=[-0.1],
        label=i % 2,
        code_text=code_text,
        difficulty=difficulty,
    )


class TestGroupSet:
    def test_masses(self):
        gs = GroupSet(["a", "b"], np.array([[1, 0], [1, 0], [0, 0]]))
        np.testing.assert_allclose(gs.masses, [2 / 3, 0.0])
        assert gs.degenerate == ["b"]

    def test_rejects_non_binary(self):
        with pytest.raises(DataError):
            GroupSet(["a"], np.array([[2], [0]]))

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataError):
            GroupSet(["a", "a"], np.zeros((2, 2)))

    def test_column_lookup(self):
        gs = GroupSet(["a", "b"], np.array([[1, 0], [0, 1]]))
        np.testing.assert_array_equal(gs.column("b"), [0, 1])
        with pytest.raises(DataError):
            gs.column("missing")


class TestNearestRankQuantile:
    def test_median_of_four(self):
        assert nearest_rank_quantile([10, 20, 30, 40], 0.5) == 20

    def test_matches_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            values = rng.integers(0, 50, size=int(rng.integers(1, 30))).tolist()
            q = float(rng.uniform(0.05, 0.95))
            assert nearest_rank_quantile(values, q) == brute_nearest_rank_quantile(values, q)


class TestLanguageGroups:
    def test_partition(self):
        ds = Dataset([make_sample(i, language=l) for i, l in enumerate("abacbc")])
        gs = build_language_groups(ds)
        assert gs.names == ["a", "b", "c"]
        np.testing.assert_array_equal(gs.membership.sum(axis=1), np.ones(6))

    def test_unseen_language_gets_zero_row(self):
        ds = Dataset([make_sample(0, language="lua")])
        gs = build_language_groups(ds, languages=["python", "rust"])
        np.testing.assert_array_equal(gs.membership, [[0, 0]])


class TestLengthGroups:
    def fit_ds(self, lengths):
        return Dataset(
            [make_sample(i, code_text="x" * int(n)) for i, n in enumerate(lengths)]
        )

    def test_at_or_above_goes_high(self):
        fit_on = self.fit_ds([10, 20, 30, 40])
        target = Dataset([make_sample(99, code_text="y" * 25)])
        cfg = GroupingConfig(use_language=False, length_metrics=("chars",))
        gs = build_length_groups(target, cfg, fit_on=fit_on)
        assert gs.names == ["len_low", "len_high", "len_unknown"]
        np.testing.assert_array_equal(gs.membership, [[0, 1, 0]])

    def test_loc_cut(self):
        fit_on = Dataset(
            [make_sample(i, code_text="\n".join(["line"] * n)) for i, n in enumerate([1, 2, 3, 100])]
        )
        target = Dataset([make_sample(99, code_text="a\nb\nc")])
        cfg = GroupingConfig(use_language=False, length_metrics=("loc",))
        gs = build_length_groups(target, cfg, fit_on=fit_on)
        assert gs.names == ["loc_low", "loc_high", "len_unknown"]
        np.testing.assert_array_equal(gs.membership, [[0, 1, 0]])

    def test_all_equal_lengths_degenerate_low(self):
        fit_on = self.fit_ds([7, 7, 7, 7])
        cfg = GroupingConfig(use_language=False, length_metrics=("chars",))
        gs = build_length_groups(fit_on, cfg)
        assert gs.column("len_high").sum() == 4
        assert "len_low" in gs.degenerate

    def test_unknown_code_text(self):
        fit_on = self.fit_ds([5, 10])
        target = Dataset([make_sample(99)])
        cfg = GroupingConfig(use_language=False, length_metrics=("chars",))
        gs = build_length_groups(target, cfg, fit_on=fit_on)
        np.testing.assert_array_equal(gs.column("len_unknown"), [1])
        assert gs.column("len_low")[0] == 0 and gs.column("len_high")[0] == 0

    def test_cutpoints_come_from_fit_on_only(self):
        fit_on = self.fit_ds([10, 20, 30, 40])
        cfg = GroupingConfig(use_language=False, length_metrics=("chars",))
        model = GroupingModel.fit(fit_on, cfg)
        other = self.fit_ds([1000, 2000])
        model2 = GroupingModel.fit(fit_on, cfg)
        assert model.length_cutpoints == model2.length_cutpoints
        gs = model.apply(other)
        np.testing.assert_array_equal(gs.column("len_high"), [1, 1])


class TestBranchCount:
    def test_plain_return(self):
        assert branch_count("return 1") == 0

    def test_counts_keywords(self):
        code = "if a:\n    pass\nif b:\n    pass\nfor i in r:\n    pass\n"
        assert branch_count(code) == 3

    def test_word_boundaries(self):
        assert branch_count("califormat = 1") == 0
        assert branch_count("x = a && b || c ? d : e") == 3


class TestComplexityGroups:
    def test_terciles_from_fit_on(self):
        fit_on = Dataset(
            [
                make_sample(i, code_text=code)
                for i, code in enumerate(
                    [
                        "return 1",
                        "if a: pass",
                        "if a:\n if b:\n  for c in d: pass",
                        "if a && b || c:\n for x in y:\n  while z: pass",
                        "if a:\n" * 9,
                    ]
                )
            ]
        )
        counts = [branch_count(s.code_text) for s in fit_on]
        assert counts == [0, 1, 3, 5, 9]
        target = Dataset([make_sample(99, code_text="if a:\n if b:\n  for c in d: pass")])
        cfg = GroupingConfig(use_language=False, complexity_source="branch_heuristic")
        gs = build_complexity_groups(target, cfg, fit_on=fit_on)
        assert gs.names == ["cx_low", "cx_mid", "cx_high"]
        np.testing.assert_array_equal(gs.membership, [[0, 1, 0]])

    def test_difficulty_labels(self):
        ds = Dataset([make_sample(i, difficulty=d) for i, d in enumerate(["easy", "hard", "easy"])])
        cfg = GroupingConfig(use_language=False, complexity_source="difficulty_label")
        gs = build_complexity_groups(ds, cfg)
        assert gs.names == ["cx_easy", "cx_hard"]
        np.testing.assert_array_equal(gs.column("cx_easy"), [1, 0, 1])

    def test_missing_difficulty_errors(self):
        ds = Dataset([make_sample(0)])
        cfg = GroupingConfig(use_language=False, complexity_source="difficulty_label")
        with pytest.raises(RecordError, match="s0"):
            build_complexity_groups(ds, cfg)

    def test_missing_code_text_errors(self):
        ds = Dataset([make_sample(0)])
        cfg = GroupingConfig(use_language=False, complexity_source="branch_heuristic")
        with pytest.raises(RecordError, match="s0"):
            build_complexity_groups(ds, cfg)


class TestAssemble:
    def test_always_on_column(self):
        a = GroupSet(["g1"], np.array([[1], [0]]))
        b = GroupSet(["g2"], np.array([[0], [1]]))
        combined = assemble([a, b])
        assert combined.names == ["ALL", "g1", "g2"]
        np.testing.assert_array_equal(combined.column("ALL"), [1, 1])

    def test_row_count_mismatch(self):
        a = GroupSet(["g1"], np.array([[1], [0]]))
        b = GroupSet(["g2"], np.array([[1]]))
        with pytest.raises(DataError):
            assemble([a, b])

    def test_no_all_column(self):
        a = GroupSet(["g1"], np.array([[1], [0]]))
        combined = assemble([a], always_on=False)
        assert combined.names == ["g1"]


class TestGroupingModel:
    def make_ds(self):
        return Dataset(
            [
                make_sample(0, language="python", code_text="if a: pass", difficulty="easy"),
                make_sample(1, language="rust", code_text="return 1;", difficulty="hard"),
                make_sample(2, language="python", code_text="for i in r:\n if x: pass", difficulty="easy"),
                make_sample(3, language="rust", code_text="while t { }", difficulty="hard"),
            ]
        )

    def test_json_round_trip(self):
        ds = self.make_ds()
        cfg = GroupingConfig(complexity_source="difficulty_label")
        model = GroupingModel.fit(ds, cfg)
        restored = GroupingModel.from_json(model.to_json())
        assert restored.to_json() == model.to_json()
        a = model.apply(ds)
        b = restored.apply(ds)
        assert a.names == b.names
        np.testing.assert_array_equal(a.membership, b.membership)

    def test_same_group_list_across_datasets(self):
        ds = self.make_ds()
        model = GroupingModel.fit(ds, GroupingConfig(complexity_source="difficulty_label"))
        other = Dataset([make_sample(9, language="lua", difficulty="easy")])
        assert model.apply(other).names == model.apply(ds).names
