# Copyright (c) 2026, MPT Classify Contributors
# See license.txt

import tempfile
import unittest
from pathlib import Path

import numpy as np

from mpt_classify.classifiers.classifiers import METHODS, make_model, predict, predict_proba, train
from mpt_classify.classifiers.serialization import load_model, model_from_dict, model_to_dict, save_model
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary, dictionary_from_arrays
from mpt_classify.evaluation.synthetic import GaussianMixtureProblem
from mpt_classify.exceptions import DimensionMismatch, MissingClass, ParseError, ValidationError

FAST = {
	"logistic": {},
	"tree": {},
	"forest": {"n_estimators": 10},
	"gboost": {"n_estimators": 10},
	"svm": {},
	"mlp": {"hidden_layers": 2, "hidden_units": 8, "max_iter": 100},
}


def _problem():
	means = [[0.0, 0.0, 0.0, 0.0], [3.0, 0.0, 0.0, 0.0], [0.0, 3.0, 0.0, 0.0]]
	return GaussianMixtureProblem(means, np.eye(4))


class TestClassifierInterface(unittest.TestCase):
	@classmethod
	def setUpClass(cls):
		problem = _problem()
		cls.d_train = problem.as_dictionary(40, 1)
		cls.d_test = problem.as_dictionary(20, 2)
		cls.models = {m: train(m, FAST[m], cls.d_train, 3) for m in METHODS}

	def test_registry(self):
		self.assertEqual(set(METHODS), {"logistic", "tree", "forest", "gboost", "svm", "mlp"})
		with self.assertRaises(ValidationError):
			make_model("knn")
		with self.assertRaises(ValidationError):
			make_model("tree", {"depth": 3})

	def test_probability_simplex(self):
		for method, model in self.models.items():
			with self.subTest(method=method):
				P = model.predict_proba_batch(self.d_test.X)
				self.assertEqual(P.shape, (len(self.d_test), 3))
				self.assertTrue(np.all(P >= 0) and np.all(P <= 1))
				np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)

	def test_predict_is_map(self):
		for method, model in self.models.items():
			with self.subTest(method=method):
				P = model.predict_proba_batch(self.d_test.X)
				labels = model.predict_batch(self.d_test.X)
				self.assertTrue(np.array_equal(labels, np.argmax(P, axis=1) + 1))
				x = self.d_test.X[0]
				self.assertEqual(predict(model, x), int(np.argmax(predict_proba(model, x))) + 1)

	def test_reasonable_accuracy(self):
		for method, model in self.models.items():
			with self.subTest(method=method):
				acc = np.mean(model.predict_batch(self.d_test.X) == self.d_test.labels)
				self.assertGreater(acc, 0.7)

	def test_determinism(self):
		for method in METHODS:
			with self.subTest(method=method):
				again = train(method, FAST[method], self.d_train, 3)
				self.assertTrue(
					np.array_equal(
						again.predict_proba_batch(self.d_test.X),
						self.models[method].predict_proba_batch(self.d_test.X),
					)
				)

	def test_dimension_mismatch(self):
		model = self.models["logistic"]
		with self.assertRaises(DimensionMismatch):
			model.predict_proba(np.zeros(5))
		with self.assertRaises(DimensionMismatch):
			model.predict_batch(np.zeros((2, 3)))

	def test_missing_class(self):
		X = np.random.default_rng(0).standard_normal((20, 4))
		labels = np.repeat([1, 2], 10)
		for method in METHODS:
			with self.subTest(method=method), self.assertRaises(MissingClass):
				train(method, FAST[method], dictionary_from_arrays(X, labels, K=3), 0)

	def test_tie_goes_to_lowest_class(self):
		model = self.models["logistic"]
		model_w, model_b = model.W, model.b
		try:
			model.W = np.zeros_like(model_w)
			model.b = np.zeros_like(model_b)
			self.assertEqual(model.predict(self.d_test.X[0]), 1)
			np.testing.assert_allclose(model.predict_proba(self.d_test.X[0]), [1 / 3] * 3, atol=1e-15)
		finally:
			model.W, model.b = model_w, model_b

	def test_scaling_invariance_of_tree_methods(self):
		col = 2
		Xtr, Xte = self.d_train.X.copy(), self.d_test.X.copy()
		Xtr[:, col] *= 37.5
		Xte[:, col] *= 37.5
		scaled = Dictionary(Xtr, self.d_train.labels, 3, self.d_train.eval_freqs)
		for method in ("tree", "forest", "gboost"):
			with self.subTest(method=method):
				model = train(method, FAST[method], scaled, 3)
				self.assertTrue(
					np.array_equal(model.predict_batch(Xte), self.models[method].predict_batch(self.d_test.X))
				)


class TestSerialization(unittest.TestCase):
	def test_round_trip_is_bit_exact(self):
		problem = _problem()
		d = problem.as_dictionary(25, 4)
		X = problem.as_dictionary(10, 5).X
		with tempfile.TemporaryDirectory() as tmp:
			for method in METHODS:
				with self.subTest(method=method):
					model = train(method, FAST[method], d, 6)
					path = save_model(model, Path(tmp) / f"{method}.json")
					back = load_model(path)
					self.assertIs(type(back), type(model))
					self.assertTrue(np.array_equal(back.predict_proba_batch(X), model.predict_proba_batch(X)))
					self.assertEqual(back.hyperparams, model.hyperparams)

	def test_generative_logistic_round_trip(self):
		d = _problem().as_dictionary(25, 4)
		model = train("logistic", {"solver": "generative"}, d, 0)
		back = model_from_dict(model_to_dict(model))
		self.assertTrue(np.array_equal(back.covariance_, model.covariance_))

	def test_bad_version(self):
		model = train("tree", {}, _problem().as_dictionary(10, 0), 0)
		data = model_to_dict(model)
		data["format_version"] = 99
		with self.assertRaises(ParseError):
			model_from_dict(data)


if __name__ == "__main__":
	unittest.main()
