import numpy as np

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.classifiers.tree import TreeArrays, apply_tree, grow_tree, resolve_max_features
from mpt_classify.utils import parallel_map


class RandomForest(ClassifierModel):
	"""
	Bagged CART trees with a random feature subset at every split.

	Each tree draws its bootstrap rows and feature subsets from its own seed, so
	the forest is the same whatever ``n_jobs`` is. Probabilities are the mean of
	the trees' leaf proportion vectors.
	"""

	method = "forest"
	DEFAULTS = {
		"n_estimators": 100,
		"max_depth": None,
		"min_samples_split": 2,
		"min_samples_leaf": 1,
		"max_features": "sqrt",
		"bootstrap": True,
		"n_jobs": 1,
	}

	def __init__(self, hyperparams=None):
		super().__init__(hyperparams)
		self.trees: list[TreeArrays] = []
		self.tree_seeds: np.ndarray | None = None

	def _fit(self, Z, y, rng):
		hp = self.hyperparams
		N = y.size
		Y = np.zeros((N, self.K))
		Y[np.arange(N), y] = 1.0
		max_features = resolve_max_features(hp["max_features"], self.F)
		self.tree_seeds = rng.integers(0, 2**63 - 1, size=int(hp["n_estimators"]))

		def grow(seed):
			tree_rng = np.random.default_rng(int(seed))
			rows = tree_rng.integers(0, N, N) if hp["bootstrap"] else np.arange(N)
			return grow_tree(
				Z[rows], Y[rows], "gini",
				max_depth=hp["max_depth"],
				min_samples_split=int(hp["min_samples_split"]),
				min_samples_leaf=int(hp["min_samples_leaf"]),
				max_features=max_features,
				rng=tree_rng,
			)

		self.trees = parallel_map(grow, self.tree_seeds, int(hp["n_jobs"]))

	def _proba(self, Z):
		P = np.zeros((Z.shape[0], self.K))
		for tree in self.trees:
			P += tree.value[apply_tree(tree, Z)]
		return P / len(self.trees)

	def _get_state(self):
		return {"tree_seeds": self.tree_seeds, "trees": [t.to_dict() for t in self.trees]}

	def _set_state(self, state):
		self.tree_seeds = np.asarray(state["tree_seeds"], dtype=np.int64)
		self.trees = [TreeArrays.from_dict(t) for t in state["trees"]]
