# Copyright (c) 2026, MPT Classify Contributors
# See license.txt

import tempfile
import unittest
from pathlib import Path

import numpy as np

from mpt_classify import hooks
from mpt_classify.dictionary_builder.noise import noise_ratio_statistics
from mpt_classify.evaluation.metrics import ConfusionMatrix
from mpt_classify.evaluation.synthetic import GaussianMixtureProblem
from mpt_classify.evaluation.uncertainty import UncertaintySummary
from mpt_classify.evaluation.validation import kappa_summary, mccv
from mpt_classify.exceptions import ValidationError
from mpt_classify.report import column, export, run_report, to_csv_text


class TestCsv(unittest.TestCase):
	def test_cells(self):
		columns = [column("A", "a", "Int"), column("B", "b"), column("C", "c", "Data")]
		text = to_csv_text(columns, [{"a": np.int64(3), "b": 0.1, "c": "x"}, {"a": 1, "b": None, "c": 2}])
		self.assertEqual(text, "a,b,c\n3,0.10000000000000001,x\n1,,2\n")

	def test_registry(self):
		self.assertEqual(len(hooks.reports), 7)
		with self.assertRaises(ValidationError):
			run_report("attendance")


class TestMetricReports(unittest.TestCase):
	def setUp(self):
		self.c = ConfusionMatrix([[5, 1], [2, 4]])

	def test_confusion_matrix(self):
		columns, data = run_report("confusion_matrix", {"confusion": self.c})
		self.assertEqual([c["fieldname"] for c in columns], ["true_class", "pred_1", "pred_2", "total"])
		self.assertEqual(data[1], {"true_class": 2, "pred_1": 2, "pred_2": 4, "total": 6})
		_, row = run_report("confusion_matrix", {"confusion": self.c, "normalize": "row"})
		self.assertAlmostEqual(row[0]["pred_1"], 5 / 6)

	def test_class_metrics(self):
		_, data = run_report("class_metrics", {"confusion": ConfusionMatrix([[3, 0], [2, 0]])})
		self.assertIsNone(data[1]["precision"])
		self.assertEqual((data[0]["tp"], data[0]["fp"], data[0]["fn"]), (3, 2, 0))

	def test_uncertainty_summary(self):
		s = UncertaintySummary(2, 4, np.tile([[0.1, 0.2, 0.3, 0.4, 0.5]], (3, 1)))
		gammas = {2: np.tile([0.2, 0.3, 0.5], (4, 1))}
		columns, data = run_report(
			"uncertainty_summary", {"summaries": [s], "gammas": gammas, "prefix": {"regime": "a"}}
		)
		self.assertEqual(columns[0]["fieldname"], "regime")
		self.assertEqual(len(data), 3)
		self.assertEqual((data[2]["true_class"], data[2]["class_k"], data[2]["median"]), (2, 3, 0.3))
		self.assertAlmostEqual(data[2]["mean"], 0.5)
		self.assertAlmostEqual(data[2]["ci_low"], 0.5)


class TestExperimentReports(unittest.TestCase):
	@classmethod
	def setUpClass(cls):
		d = GaussianMixtureProblem.isotropic(2, 3, 3.0, rng_seed=0).as_dictionary(20, 1)
		cls.report = mccv("logistic", {}, d, 3, 0.25, 0)

	def test_kappa_table(self):
		row = {"method": "logistic", "samples_per_class": 20, "train_snr_db": 20.0, "test_snr_db": np.inf,
			   "report": self.report}
		columns, data = run_report("kappa_table", {"rows": [row]})
		self.assertEqual(len(columns), 12)
		self.assertEqual(data[0]["iterations"], 3)
		self.assertEqual(data[0]["kappa_median"], self.report.kappa_summary.median)
		with tempfile.TemporaryDirectory() as tmp:
			path = export("kappa_table", {"rows": [row]}, Path(tmp) / "k.csv")
			lines = path.read_text().splitlines()
			self.assertEqual(len(lines), 2)
			self.assertIn(",inf,", lines[1])

	def test_sweep_grid(self):
		cells = [
			{"values": {"freq_count": 1, "train_snr_db": 10.0}, "report": self.report},
			{"values": {"freq_count": 2, "train_snr_db": 10.0}, "report": self.report},
		]
		columns, data = run_report("sweep_grid", {"axes": ["freq_count", "train_snr_db"], "cells": cells})
		self.assertEqual([c["fieldtype"] for c in columns[:2]], ["Int", "Float"])
		self.assertEqual([r["freq_count"] for r in data], [1, 2])

	def test_loo_summary(self):
		s = UncertaintySummary(1, 10, np.array([[0.7, 0.8, 0.9, 0.95, 0.99], [0.01, 0.05, 0.1, 0.2, 0.3]]))
		row = {"regime": "control", "s_alpha_rel": 0.0084, "s_sigma_rel": 0.0236333, "class_id": 1,
			   "geometry_id": "small", "method": "logistic", "iterations": 3,
			   "kappa_summary": kappa_summary([0.5, 0.7, 0.9]), "summary": s}
		_, data = run_report("loo_summary", {"rows": [row]})
		self.assertEqual(data[0]["gamma_true_median"], 0.9)
		self.assertEqual(data[0]["kappa_median"], 0.7)
		self.assertEqual(data[0]["probabilistic"], 1)

	def test_noise_check(self):
		stats = [noise_ratio_statistics(1.0, snr, 100, 0) for snr in (40.0, 20.0)]
		_, data = run_report("noise_check", {"stats": stats})
		self.assertEqual([r["snr_db"] for r in data], [40.0, 20.0])
		self.assertAlmostEqual(data[1]["expected_rms_ratio"], 0.1)


if __name__ == "__main__":
	unittest.main()
