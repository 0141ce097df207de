# Copyright (c) 2026, MPT Classify Contributors
# See license.txt

import unittest

import numpy as np

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.dictionary_builder.dictionary_builder import dictionary_from_arrays
from mpt_classify.evaluation.metrics import (
	ConfusionMatrix,
	class_metrics,
	confusion_from_labels,
	confusion_matrix,
	kappa,
	random_accuracy,
)
from mpt_classify.exceptions import DegenerateChance, DimensionMismatch, ValidationError


class _ConstantModel(ClassifierModel):
	method = "constant"

	def __init__(self, K, F, winner):
		super().__init__()
		self.K, self.F = K, F
		self.mean_, self.scale_ = np.zeros(F), np.ones(F)
		self.winner = winner

	def _proba(self, Z):
		P = np.zeros((Z.shape[0], self.K))
		P[:, self.winner - 1] = 1.0
		return P


class TestConfusionMatrix(unittest.TestCase):
	def setUp(self):
		rng = np.random.default_rng(0)
		self.true = rng.integers(1, 5, 300)
		self.pred = np.where(rng.random(300) < 0.7, self.true, rng.integers(1, 5, 300))
		self.c = confusion_from_labels(self.true, self.pred, 4)

	def test_conservation(self):
		self.assertEqual(self.c.total, 300)
		self.assertTrue(np.array_equal(self.c.counts.sum(axis=1), np.bincount(self.true, minlength=5)[1:]))
		self.assertAlmostEqual(self.c.normalized.sum(), 1.0)
		np.testing.assert_allclose(self.c.row_normalized.sum(axis=1), 1.0)

	def test_perfect_classifier(self):
		c = confusion_from_labels(self.true, self.true, 4)
		self.assertTrue(np.array_equal(c.counts, np.diag(np.diag(c.counts))))
		self.assertEqual(kappa(c), 1.0)
		m = class_metrics(c)
		self.assertEqual(m.precision + m.sensitivity + m.specificity, (1.0,) * 12)

	def test_constant_classifier(self):
		X = np.random.default_rng(1).standard_normal((12, 6))
		d = dictionary_from_arrays(X, np.repeat([1, 2, 3], 4))
		c = confusion_matrix(_ConstantModel(3, 6, winner=1), d)
		self.assertTrue(np.all(c.counts[:, 1:] == 0))
		self.assertTrue(np.array_equal(c.counts[:, 0], [4, 4, 4]))
		with self.assertRaises(DimensionMismatch):
			confusion_matrix(_ConstantModel(4, 6, winner=1), d)

	def test_counts_match_brute_force(self):
		tp, fp, tn, fn = self.c.tp_fp_tn_fn()
		for k in range(1, 5):
			with self.subTest(k=k):
				self.assertEqual(tp[k - 1], np.sum((self.true == k) & (self.pred == k)))
				self.assertEqual(fp[k - 1], np.sum((self.true != k) & (self.pred == k)))
				self.assertEqual(tn[k - 1], np.sum((self.true != k) & (self.pred != k)))
				self.assertEqual(fn[k - 1], np.sum((self.true == k) & (self.pred != k)))

	def test_invalid(self):
		with self.assertRaises(ValidationError):
			ConfusionMatrix(np.zeros((2, 3)))
		with self.assertRaises(ValidationError):
			ConfusionMatrix([[1, -1], [0, 2]])
		with self.assertRaises(ValidationError):
			confusion_from_labels([1, 5], [1, 1], 4)


class TestClassMetrics(unittest.TestCase):
	def test_hand_matrix(self):
		m = class_metrics(ConfusionMatrix([[5, 1], [2, 4]]))
		self.assertEqual(m.precision[0], 5 / 7)
		self.assertEqual(m.sensitivity[0], 5 / 6)
		self.assertEqual(m.specificity[0], 4 / 6)
		self.assertEqual(m.rows()[1], (2, 4 / 5, 4 / 6, 5 / 6))

	def test_undefined_ratio(self):
		m = class_metrics(ConfusionMatrix([[3, 0], [2, 0]]))
		self.assertIsNone(m.precision[1])
		self.assertEqual(m.sensitivity[1], 0.0)
		self.assertEqual(m.specificity[0], 0.0)
		self.assertIsNone(class_metrics(ConfusionMatrix([[3, 0], [0, 0]])).specificity[0])


class TestKappa(unittest.TestCase):
	def test_examples(self):
		self.assertEqual(kappa(ConfusionMatrix([[25, 25], [25, 25]])), 0.0)
		c = ConfusionMatrix([[40, 10], [20, 30]])
		self.assertAlmostEqual(random_accuracy(c), 0.5)
		self.assertAlmostEqual(kappa(c), 0.4)

	def test_degenerate_chance(self):
		with self.assertRaises(DegenerateChance):
			kappa(ConfusionMatrix([[5, 0], [0, 0]]))
		with self.assertRaises(ValidationError):
			kappa(ConfusionMatrix(np.zeros((2, 2))))

	def test_bounds(self):
		rng = np.random.default_rng(4)
		for _ in range(200):
			counts = rng.integers(0, 20, (3, 3))
			counts[0, 0] += 1
			c = ConfusionMatrix(counts)
			if random_accuracy(c) >= 1.0:
				continue
			k = kappa(c)
			self.assertLessEqual(k, 1.0 + 1e-12)
			off_diagonal = counts.sum() - np.trace(counts)
			self.assertEqual(k == 1.0, off_diagonal == 0)


if __name__ == "__main__":
	unittest.main()
