# Multiclass gradient boosting with regression trees.
#
# Scores start at a_k = 0 (uniform probabilities). Each iteration fits one
# squared-error tree per class to the residuals r_k = t_k - gamma_k and replaces
# every leaf value by the one-step Newton estimate
#     (K-1)/K * sum(r) / sum(|r| (1 - |r|)),
# then adds learning_rate times the tree to a_k.

import math

import numpy as np
from scipy.special import logsumexp, softmax

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.classifiers.tree import TreeArrays, apply_tree, grow_tree
from mpt_classify.exceptions import ValidationError
from mpt_classify.utils import parallel_map

MIN_DENOMINATOR = 1e-150


def mean_logloss(A: np.ndarray, y: np.ndarray) -> float:
	return float(np.mean(logsumexp(A, axis=1) - A[np.arange(y.size), y]))


def newton_leaf_values(tree: TreeArrays, leaves: np.ndarray, r: np.ndarray, K: int) -> np.ndarray:
	values = np.zeros(tree.node_count)
	num = np.bincount(leaves, weights=r, minlength=tree.node_count)
	den = np.bincount(leaves, weights=np.abs(r) * (1.0 - np.abs(r)), minlength=tree.node_count)
	ok = den >= MIN_DENOMINATOR
	values[ok] = (K - 1) / K * num[ok] / den[ok]
	return values


class GradientBoost(ClassifierModel):
	method = "gboost"
	DEFAULTS = {
		"n_estimators": 100,
		"learning_rate": 0.1,
		"max_depth": 3,
		"min_samples_split": 2,
		"min_samples_leaf": 1,
		"n_jobs": 1,
	}

	def __init__(self, hyperparams=None):
		super().__init__(hyperparams)
		if not self.hyperparams["learning_rate"] > 0:
			raise ValidationError("learning_rate must be > 0")
		self.trees: list[list[TreeArrays]] = []
		self.train_loss_: list[float] = []

	def _fit(self, Z, y, rng):
		hp = self.hyperparams
		N, K = y.size, self.K
		lr = float(hp["learning_rate"])
		T = np.zeros((N, K))
		T[np.arange(N), y] = 1.0
		A = np.zeros((N, K))
		self.trees = []
		self.train_loss_ = [math.log(K)]

		def fit_class(args):
			k, R = args
			tree = grow_tree(
				Z, R[:, k], "mse",
				max_depth=hp["max_depth"],
				min_samples_split=int(hp["min_samples_split"]),
				min_samples_leaf=int(hp["min_samples_leaf"]),
			)
			leaves = apply_tree(tree, Z)
			tree.value = newton_leaf_values(tree, leaves, R[:, k], K).reshape(-1, 1)
			return tree, leaves

		for _ in range(int(hp["n_estimators"])):
			R = T - softmax(A, axis=1)
			fitted = parallel_map(fit_class, [(k, R) for k in range(K)], int(hp["n_jobs"]))
			for k, (tree, leaves) in enumerate(fitted):
				A[:, k] += lr * tree.value[leaves, 0]
			self.trees.append([tree for tree, _ in fitted])
			self.train_loss_.append(mean_logloss(A, y))

		self.final_loss = self.train_loss_[-1]
		self.converged = True

	def raw_scores(self, Z: np.ndarray, n_iter: int | None = None) -> np.ndarray:
		lr = float(self.hyperparams["learning_rate"])
		A = np.zeros((Z.shape[0], self.K))
		for stage in self.trees[:n_iter]:
			for k, tree in enumerate(stage):
				A[:, k] += lr * tree.value[apply_tree(tree, Z), 0]
		return A

	def staged_proba_batch(self, X, n_iter: int) -> np.ndarray:
		"""Probabilities after the first ``n_iter`` boosting iterations."""
		return softmax(self.raw_scores(self._standardize(X), n_iter), axis=1)

	def _proba(self, Z):
		return softmax(self.raw_scores(Z), axis=1)

	def _get_state(self):
		return {
			"train_loss": self.train_loss_,
			"trees": [[t.to_dict() for t in stage] for stage in self.trees],
		}

	def _set_state(self, state):
		self.train_loss_ = [float(v) for v in state["train_loss"]]
		self.trees = [[TreeArrays.from_dict(t) for t in stage] for stage in state["trees"]]
