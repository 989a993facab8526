import numpy as np
import pytest

from conftest import gaussian_cost_dataset
from costforest import ConfigError, ValidationError
from costforest.data import SplitSpec, split
from costforest.evaluation import (
    AlgorithmSpec,
    ExperimentSpec,
    f1_score,
    friedman_rank,
    per_best,
    run_experiment,
)


class TestF1:
    def test_perfect(self):
        y = np.array([1, 0, 1])
        assert f1_score(y, y) == 1.0

    def test_all_negative_predictions(self):
        assert f1_score(np.array([1, 0, 1]), np.zeros(3, dtype=int)) == 0.0

    def test_hand_counts(self):
        # TP=2, FP=1, FN=1 -> precision = recall = 2/3
        y = np.array([1, 1, 1, 0, 0])
        p = np.array([1, 1, 0, 1, 0])
        assert f1_score(y, p) == pytest.approx(2 / 3)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            f1_score(np.array([1, 0]), np.array([1]))


class TestFriedman:
    def test_strict_order(self):
        table = np.array([[0.9, 0.8], [0.1, 0.2]])
        assert friedman_rank(table).tolist() == [1.0, 2.0]

    def test_tie_averaged(self):
        table = np.array([[0.5, 0.9], [0.5, 0.1]])
        assert friedman_rank(table).tolist() == [1.25, 1.75]

    def test_three_algorithms_two_datasets(self):
        # orders (A,B,C) and (B,A,C)
        table = np.array([[0.9, 0.7], [0.8, 0.8], [0.1, 0.1]])
        assert friedman_rank(table).tolist() == [1.5, 1.5, 3.0]

    def test_column_sum_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n_algos = int(rng.integers(2, 10))
            n_ds = int(rng.integers(1, 8))
            table = rng.normal(size=(n_algos, n_ds))
            # inject ties sometimes
            if rng.random() < 0.5 and n_algos >= 2:
                table[1, 0] = table[0, 0]
            ranks = friedman_rank(table)
            assert ranks.sum() * n_ds == pytest.approx(
                n_ds * n_algos * (n_algos + 1) / 2
            )

    def test_missing_cell_rejected(self):
        with pytest.raises(ValidationError):
            friedman_rank(np.array([[0.5, np.nan], [0.2, 0.1]]))


class TestPerBest:
    def test_best_everywhere_is_100(self):
        table = np.array([[0.5, 0.8], [0.25, 0.4]])
        got = per_best(table)
        assert got[0] == 100.0
        assert got[1] == 50.0

    def test_hand_mix(self):
        table = np.array([[0.5, 0.8], [0.25, 0.8]])
        assert per_best(table).tolist() == [pytest.approx(100.0), pytest.approx(75.0)]

    def test_non_positive_best_excluded_with_warning(self):
        warnings = []
        table = np.array([[0.5, -0.2], [0.25, -0.1]])
        got = per_best(table, warn=warnings)
        assert len(warnings) == 1
        assert got.tolist() == [100.0, 50.0]

    def test_all_non_positive_rejected(self):
        with pytest.raises(ValidationError):
            per_best(np.array([[-0.5], [-1.0]]))


def tiny_bundles(seed=0):
    rng = np.random.default_rng(seed)
    bundles = []
    for i in range(2):
        ds = gaussian_cost_dataset(rng, 240, k=3, shift=1.5)
        bundles.append((f"synth{i}", split(ds, SplitSpec(seed=seed + i))))
    return bundles


def tiny_algorithms():
    fast_tree = {"tree": {"max_depth": 3}}
    return [
        AlgorithmSpec("ci", "DT-t", "dt", "t", fast_tree),
        AlgorithmSpec("cst", "CSDT-t", "csdt", "t", fast_tree),
        AlgorithmSpec(
            "ecsdt", "CSRP-wv-t", "ecsdt", "t",
            {"T": 5, "inducer": "random_patches", "combiner": "wv", **fast_tree},
        ),
    ]


class TestRunExperiment:
    def test_shape_and_determinism(self):
        spec = ExperimentSpec(tiny_algorithms(), tiny_bundles(), repetitions=2, seed=5)
        report = run_experiment(spec)
        assert len(report.cells) == 6
        again = run_experiment(spec)
        assert report.to_json() == again.to_json()
        assert report.to_csv() == again.to_csv()

    def test_single_repetition_zero_std(self):
        spec = ExperimentSpec(tiny_algorithms()[:1], tiny_bundles()[:1], repetitions=1, seed=2)
        report = run_experiment(spec)
        cell = next(iter(report.cells.values()))
        assert cell.savings_std == 0.0
        assert cell.f1_std == 0.0

    def test_deterministic_algorithm_fixed_sample_zero_std(self):
        # sampling "t" plus a deterministic tree: every repetition identical
        spec = ExperimentSpec(
            [AlgorithmSpec("cst", "CSDT-t", "csdt", "t", {"tree": {"max_depth": 3}})],
            tiny_bundles()[:1],
            repetitions=3,
            seed=7,
        )
        cell = next(iter(run_experiment(spec).cells.values()))
        assert cell.savings_std == 0.0

    def test_failed_cell_recorded_report_emitted(self):
        bad = AlgorithmSpec("ci", "LR-broken", "lr", "t", {"lr": {"learning_rate": 1e12}})
        spec = ExperimentSpec(
            [bad, *tiny_algorithms()[:1]], tiny_bundles()[:1], repetitions=1, seed=3
        )
        with np.errstate(over="ignore"):
            report = run_experiment(spec)
        failed = [c for c in report.cells.values() if c.failed]
        assert len(failed) == 1
        assert report.friedman is None
        assert any("failed" in w for w in report.warnings)

    def test_sampling_codes_run(self):
        bundles = tiny_bundles()[:1]
        for code in ("t", "u", "r", "o"):
            spec = ExperimentSpec(
                [AlgorithmSpec("cps", f"DT-{code}", "dt", code, {"tree": {"max_depth": 3}})],
                bundles, repetitions=1, seed=4,
            )
            report = run_experiment(spec)
            assert not next(iter(report.cells.values())).failed

    def test_jobs_do_not_change_results(self):
        spec = ExperimentSpec(tiny_algorithms()[:2], tiny_bundles()[:1], repetitions=2, seed=9)
        sequential = run_experiment(spec, jobs=1)
        parallel = run_experiment(spec, jobs=2)
        assert sequential.to_json() == parallel.to_json()

    def test_invalid_specs(self):
        with pytest.raises(ConfigError):
            AlgorithmSpec("nope", "x", "dt").validate()
        with pytest.raises(ConfigError):
            ExperimentSpec([], [], repetitions=1).validate()
        with pytest.raises(ConfigError):
            ExperimentSpec(tiny_algorithms(), tiny_bundles(), repetitions=0).validate()
