# Copyright (c) 2026, MPT Classify Contributors
# See license.txt

import csv
import json
import tempfile
import unittest
from argparse import Namespace
from pathlib import Path

import numpy as np
import pytest

from mpt_classify.classifiers.serialization import load_model
from mpt_classify.config import load_config
from mpt_classify.exceptions import ConfigError, DimensionMismatch
from mpt_classify.experiments.experiments import (
	MANIFEST,
	cell_config,
	leave_one_out,
	parse_axis,
	run_build,
	run_compare,
	run_evaluate,
	run_loo,
	run_noise_check,
	run_sweep,
	run_train,
)
from mpt_classify.experiments.problems import default_loo_classes, default_sphere_classes
from mpt_classify.utils import sha256_file


def _rows(path: Path) -> list[dict]:
	with open(path, newline="", encoding="utf-8") as f:
		return list(csv.DictReader(f))


def _tree_bytes(root: Path) -> dict[str, bytes]:
	return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class ExperimentTestCase(unittest.TestCase):
	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.out = Path(self.tmp.name)

	def tearDown(self):
		self.tmp.cleanup()

	def config(self, out: Path | None = None, problem: str = "spheres", **changes):
		cfg = load_config(None, {"seed": 3, "out_dir": str(out or self.out), "problem": problem})
		small = {"samples_per_class": [20], "mccv_iterations": 2, "freq_count": 3, "methods": {"logistic": {}}}
		return cfg.with_changes(**{**small, **changes})


class TestProblems(unittest.TestCase):
	def test_sphere_classes(self):
		specs = default_sphere_classes(v_count=5)
		self.assertEqual([s.class_id for s in specs], list(range(1, 9)))
		self.assertEqual(len({(s.m_alpha, s.m_sigma) for s in specs}), 8)
		self.assertAlmostEqual(specs[0].s_alpha / specs[0].m_alpha, 0.0084)
		self.assertEqual(specs[3].sample_count, 5)

	def test_loo_classes(self):
		specs = default_loo_classes(v_count=4, regime="b")
		self.assertEqual(specs[0].geometry_ids, ["small", "medium", "large"])
		self.assertEqual(specs[1].sample_count, 12)
		self.assertAlmostEqual(specs[1].s_sigma / specs[1].m_sigma, 0.1)


class TestBuild(ExperimentTestCase):
	def test_schedule_and_manifest(self):
		cfg = self.config(samples_per_class=[20, 40], train_snr_db=20.0, test_snr_db=10.0)
		run = run_build(cfg)
		self.assertEqual(run.status, "Success")
		rows = _rows(self.out / "build" / "dictionary_P40.csv")
		self.assertEqual(len(rows), 8 * 40)
		self.assertEqual(len(rows[0]), 1 + 8 + 6 * 3)
		self.assertTrue((self.out / "build" / "dictionary_P20_test.csv").exists())

		manifest = json.loads((self.out / "build" / MANIFEST).read_text())
		self.assertEqual(manifest["status"], "Success")
		self.assertEqual(manifest["config_sha256"], cfg.config_sha256)
		self.assertEqual(len(manifest["files"]), 8)
		first = manifest["files"][0]
		self.assertEqual(first["sha256"], sha256_file(self.out / "build" / first["path"]))

	def test_rerun_is_byte_identical(self):
		a, b = self.out / "a", self.out / "b"
		run_build(self.config(a, train_snr_db=20.0))
		run_build(self.config(b, train_snr_db=20.0, threads=4))
		self.assertEqual(_tree_bytes(a), _tree_bytes(b))


class TestTrainEvaluate(ExperimentTestCase):
	def test_round_trip(self):
		cfg = self.config(train_snr_db=20.0)
		run_train(cfg, Namespace(method="logistic"))
		model = load_model(self.out / "train" / "model_logistic.json")
		self.assertEqual((model.K, model.F), (8, 18))
		split_info = json.loads((self.out / "train" / "split_P20.json").read_text())
		self.assertEqual(len(split_info["test"]), 8 * 5)
		self.assertFalse(set(split_info["train"]) & set(split_info["test"]))

		run = run_evaluate(cfg, Namespace(method="logistic"))
		self.assertEqual(run.status, "Success")
		evaluation = json.loads((self.out / "evaluate" / "evaluation.json").read_text())
		self.assertEqual(evaluation["n_test"], 40)
		self.assertLessEqual(evaluation["kappa"], 1.0)
		confusion = _rows(self.out / "evaluate" / "confusion_matrix.csv")
		self.assertEqual(sum(int(r["total"]) for r in confusion), 40)
		self.assertEqual(len(_rows(self.out / "evaluate" / "class_metrics.csv")), 8)
		self.assertEqual(len(_rows(self.out / "evaluate" / "uncertainty_summary.csv")), 8 * 8)

	def test_layout_mismatch(self):
		run_train(self.config())
		with self.assertRaises(DimensionMismatch):
			run_evaluate(self.config(freq_count=4))


class TestCompare(ExperimentTestCase):
	def test_row_count(self):
		cfg = self.config(methods={"logistic": {}, "tree": {"max_depth": 4}}, samples_per_class=[12, 20])
		run = run_compare(cfg)
		self.assertEqual(run.counts, {"cells": 4, "succeeded": 4, "failed": 0})
		rows = _rows(self.out / "compare" / "kappa_table.csv")
		self.assertEqual([(r["method"], r["samples_per_class"]) for r in rows],
						 [("logistic", "12"), ("logistic", "20"), ("tree", "12"), ("tree", "20")])
		self.assertEqual(len(_rows(self.out / "compare" / "mccv_iterations.csv")), 4 * 2)

	def test_single_cell(self):
		run_compare(self.config())
		self.assertEqual(len(_rows(self.out / "compare" / "kappa_table.csv")), 1)


class TestSweep(ExperimentTestCase):
	def test_parse_axis(self):
		self.assertEqual(parse_axis("freq_count=1,2,5"), ("freq_count", [1, 2, 5]))
		self.assertEqual(parse_axis("train_snr_db=10,inf"), ("train_snr_db", [10, float("inf")]))
		self.assertEqual(parse_axis("feature_kind=invariants,eigenvalues")[1], ["invariants", "eigenvalues"])
		with self.assertRaises(ConfigError):
			parse_axis("freq_count")

	def test_cell_config(self):
		cfg = self.config(methods={"mlp": {"max_iter": 5}}, sweep_method="mlp")
		cell, hp = cell_config(cfg, {"train_snr_db": 10, "hp.hidden_units": 7})
		self.assertEqual((cell.train_snr_db, cell.test_snr_db), (10.0, 10.0))
		self.assertEqual(hp, {"max_iter": 5, "hidden_units": 7})
		with self.assertRaises(ConfigError):
			cell_config(cfg, {"colour": 1})

	def test_grid(self):
		cfg = self.config(methods={"tree": {}}, sweep_method="tree",
						  sweep_axes={"freq_count": [1, 2], "hp.max_depth": [2, 3]})
		run = run_sweep(cfg, None)
		self.assertEqual(run.status, "Success")
		rows = _rows(self.out / "sweep" / "sweep_grid.csv")
		self.assertEqual([(r["freq_count"], r["hp.max_depth"]) for r in rows],
						 [("1", "2"), ("1", "3"), ("2", "2"), ("2", "3")])

	def test_single_cell_from_command_line(self):
		run_sweep(self.config(), Namespace(axis=["freq_count=2"]))
		self.assertEqual(len(_rows(self.out / "sweep" / "sweep_grid.csv")), 1)

	def test_thread_count_does_not_change_output(self):
		axes = {"freq_count": [1, 3], "train_snr_db": [20.0]}
		run_sweep(self.config(self.out / "a", sweep_axes=axes))
		run_sweep(self.config(self.out / "b", sweep_axes=axes, threads=3))
		self.assertEqual(_tree_bytes(self.out / "a"), _tree_bytes(self.out / "b"))


class TestLoo(ExperimentTestCase):
	def test_held_out_geometry_never_trains(self):
		cfg = self.config(problem="loo", samples_per_class=[12], mccv_iterations=3)
		result = leave_one_out(cfg, cfg.class_specs(12), (2, "medium"), "logistic", {})
		self.assertEqual(result.leaked_rows, 0)
		self.assertEqual(len(result.kappas), 3)
		# 4 samples per geometry, pooled over 3 rounds
		self.assertEqual(result.summary.n, 12)
		self.assertEqual(result.summary.percentiles.shape, (4, 5))

	def test_outputs(self):
		cfg = self.config(problem="loo", samples_per_class=[12], loo_held_out=[(1, "small"), (3, "large")])
		run = run_loo(cfg, Namespace(regime=["control", "c"]))
		self.assertEqual(run.status, "Success")
		rows = _rows(self.out / "loo" / "loo_summary.csv")
		self.assertEqual([(r["regime"], r["geometry_id"]) for r in rows],
						 [("control", "small"), ("control", "large"), ("c", "small"), ("c", "large")])
		self.assertEqual(len(_rows(self.out / "loo" / "loo_posteriors.csv")), 4 * 4)

	def test_bad_geometry_is_isolated(self):
		cfg = self.config(problem="loo", samples_per_class=[12], loo_held_out=[(1, "small"), (1, "tiny")])
		run = run_loo(cfg, Namespace(regime=["control"]))
		self.assertEqual(run.status, "Partial")
		manifest = json.loads((self.out / "loo" / MANIFEST).read_text())
		self.assertEqual(manifest["counts"], {"cells": 2, "succeeded": 1, "failed": 1})
		self.assertIn("GeometryNotFound", manifest["errors"][0]["error"])

	def test_nothing_to_hold_out(self):
		with self.assertRaises(ConfigError):
			run_loo(self.config())
		with self.assertRaises(ConfigError):
			run_loo(self.config(problem="loo"), Namespace(regime=["z"]))


class TestNoiseCheck(ExperimentTestCase):
	def test_levels(self):
		run_noise_check(self.config())
		rows = _rows(self.out / "noise_check" / "noise_check.csv")
		self.assertEqual([float(r["snr_db"]) for r in rows], [40.0, 20.0, 10.0])
		for r, level in zip(rows, (0.01, 0.10, 0.32), strict=True):
			self.assertLess(abs(float(r["rms_ratio"]) / level - 1.0), 0.1)
			self.assertEqual(int(r["n"]), 10_000)


@pytest.mark.slow
class TestDeskScaleAcceptance(ExperimentTestCase):
	"""Eight-class sphere problem at P=200, M=10, l=20."""

	def median_kappa(self, method: str, snr: float, **changes) -> float:
		cfg = self.config(
			samples_per_class=[200], mccv_iterations=20, freq_count=10,
			train_snr_db=snr, test_snr_db=snr, methods={method: {}}, **changes,
		)
		run_compare(cfg)
		return float(_rows(self.out / "compare" / "kappa_table.csv")[0]["kappa_median"])

	def test_separable_at_20_db(self):
		self.assertGreaterEqual(self.median_kappa("logistic", 20.0), 0.9)
		self.assertGreaterEqual(self.median_kappa("gboost", 20.0), 0.9)

	def test_degrades_at_10_db(self):
		k10 = self.median_kappa("logistic", 10.0)
		self.assertGreater(k10, 0.4)
		self.assertLess(k10, self.median_kappa("logistic", 20.0) + 1e-12)


@pytest.mark.slow
class TestTrends(ExperimentTestCase):
	# Monte Carlo slack between neighbouring grid points
	SLACK = 0.02

	def median_over_seeds(self, axis: str, values: list) -> np.ndarray:
		per_seed = []
		for seed in (1, 2, 3):
			cfg = self.config(self.out / f"s{seed}", samples_per_class=[100], mccv_iterations=5,
							  train_snr_db=20.0, sweep_axes={axis: values}, sweep_method="logistic")
			run_sweep(cfg.with_changes(seed=seed))
			per_seed.append([float(r["kappa_median"]) for r in _rows(self.out / f"s{seed}" / "sweep" / "sweep_grid.csv")])
		return np.median(per_seed, axis=0)

	def test_kappa_grows_with_frequency_count(self):
		k = self.median_over_seeds("freq_count", [1, 2, 5, 10])
		self.assertTrue(np.all(np.diff(k) >= -self.SLACK), k)

	def test_kappa_grows_with_snr(self):
		k = self.median_over_seeds("train_snr_db", [10.0, 20.0, 40.0])
		self.assertTrue(np.all(np.diff(k) >= -self.SLACK), k)


@pytest.mark.slow
class TestLooAcceptance(ExperimentTestCase):
	def test_unseen_size(self):
		cfg = self.config(problem="loo", samples_per_class=[120], mccv_iterations=10, train_snr_db=40.0,
						  loo_held_out=[(2, "medium")])
		run_loo(cfg, Namespace(regime=["control", "a", "b", "c"]))
		rows = _rows(self.out / "loo" / "loo_summary.csv")
		self.assertGreaterEqual(float(rows[0]["gamma_true_median"]), 0.8)
		kappas = [float(r["kappa_median"]) for r in rows]
		self.assertTrue(np.all(np.diff(kappas) >= -0.02), kappas)


if __name__ == "__main__":
	unittest.main()
