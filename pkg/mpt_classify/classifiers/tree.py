# CART trees shared by the tree, forest and gradient-boost classifiers.
#
# Gini impurity on one-hot targets and squared error on real targets lead to the
# same split score: a split of a node into L and R is best when
# |sum_L y|^2 / n_L + |sum_R y|^2 / n_R is largest. grow_tree therefore runs
# one search for both criteria; the criterion only names the node impurity used
# by pruning. Rows go left when z[feature] <= threshold.

import math
from dataclasses import dataclass

import numpy as np

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.exceptions import ValidationError

CRITERIA = ("gini", "mse")
LEAF = -1


@dataclass
class TreeArrays:
	feature: np.ndarray
	threshold: np.ndarray
	left: np.ndarray
	right: np.ndarray
	value: np.ndarray
	n_samples: np.ndarray
	impurity: np.ndarray

	@property
	def node_count(self) -> int:
		return int(self.feature.size)

	@property
	def leaf_count(self) -> int:
		return int(np.count_nonzero(self.feature == LEAF))

	@property
	def depth(self) -> int:
		depth = np.zeros(self.node_count, dtype=int)
		for i in range(self.node_count):
			if self.feature[i] != LEAF:
				depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
		return int(depth.max())

	def to_dict(self) -> dict:
		return {name: getattr(self, name) for name in self.__dataclass_fields__}

	@classmethod
	def from_dict(cls, data: dict) -> "TreeArrays":
		return cls(
			feature=np.asarray(data["feature"], dtype=int),
			threshold=np.asarray(data["threshold"], dtype=float),
			left=np.asarray(data["left"], dtype=int),
			right=np.asarray(data["right"], dtype=int),
			value=np.asarray(data["value"], dtype=float).reshape(len(data["feature"]), -1),
			n_samples=np.asarray(data["n_samples"], dtype=int),
			impurity=np.asarray(data["impurity"], dtype=float),
		)


def resolve_max_features(spec, F: int) -> int:
	if spec is None:
		return F
	if spec == "sqrt":
		return max(1, int(math.sqrt(F)))
	if spec == "log2":
		return max(1, int(math.log2(F)))
	if isinstance(spec, float) and 0.0 < spec <= 1.0:
		return max(1, int(spec * F))
	if isinstance(spec, int) and not isinstance(spec, bool) and 1 <= spec:
		return min(spec, F)
	raise ValidationError(f"Invalid max_features {spec!r}")


def node_impurity(Y: np.ndarray, criterion: str) -> float:
	mean = Y.mean(axis=0)
	if criterion == "gini":
		return float(1.0 - np.sum(mean**2))
	return float(np.sum(np.mean((Y - mean) ** 2, axis=0)))


def _best_split(Z, Y, features, min_samples_leaf):
	"""(score, feature, threshold) of the best split over ``features``, or None."""
	n = Z.shape[0]
	best = None
	positions = np.arange(1, n)
	n_left = positions.astype(float)
	n_right = n - n_left
	size_ok = (positions >= min_samples_leaf) & (n - positions >= min_samples_leaf)
	total = Y.sum(axis=0)
	for f in features:
		order = np.argsort(Z[:, f], kind="stable")
		xs = Z[order, f]
		valid = size_ok & (xs[1:] > xs[:-1])
		if not valid.any():
			continue
		cum = np.cumsum(Y[order], axis=0)[:-1]
		score = np.sum(cum**2, axis=1) / n_left + np.sum((total - cum) ** 2, axis=1) / n_right
		score[~valid] = -np.inf
		i = int(np.argmax(score))
		if best is None or score[i] > best[0]:
			threshold = 0.5 * (xs[i] + xs[i + 1])
			if threshold >= xs[i + 1]:
				threshold = xs[i]
			best = (float(score[i]), int(f), float(threshold))
	return best


def grow_tree(
	Z: np.ndarray,
	Y: np.ndarray,
	criterion: str = "gini",
	max_depth: int | None = None,
	min_samples_split: int = 2,
	min_samples_leaf: int = 1,
	max_features: int | None = None,
	rng: np.random.Generator | None = None,
) -> TreeArrays:
	"""
	Greedy top-down CART on rows ``Z`` with targets ``Y`` (one-hot for gini).

	Leaf values are target means: class proportions for gini. ``max_features``
	features are drawn per node from ``rng`` when given.
	"""
	if criterion not in CRITERIA:
		raise ValidationError(f"Unknown criterion {criterion!r}")
	Y = np.asarray(Y, dtype=float)
	if Y.ndim == 1:
		Y = Y.reshape(-1, 1)
	F = Z.shape[1]
	max_depth = math.inf if max_depth is None else max_depth
	n_features = F if max_features is None else max_features

	feature, threshold, left, right, value, n_samples, impurity = [], [], [], [], [], [], []

	def add_node(rows):
		feature.append(LEAF)
		threshold.append(0.0)
		left.append(LEAF)
		right.append(LEAF)
		value.append(Y[rows].mean(axis=0))
		n_samples.append(rows.size)
		impurity.append(node_impurity(Y[rows], criterion))
		return len(feature) - 1

	stack = [(np.arange(Z.shape[0]), 0, add_node(np.arange(Z.shape[0])))]
	while stack:
		rows, depth, node = stack.pop()
		if depth >= max_depth or rows.size < min_samples_split or impurity[node] <= 1e-15:
			continue
		if n_features < F and rng is not None:
			features = rng.choice(F, n_features, replace=False)
		else:
			features = range(F)
		best = _best_split(Z[rows], Y[rows], features, min_samples_leaf)
		if best is None:
			continue
		_, f, t = best
		go_left = Z[rows, f] <= t
		feature[node], threshold[node] = f, t
		left[node] = add_node(rows[go_left])
		right[node] = add_node(rows[~go_left])
		# right pushed first so the left subtree is numbered first
		stack.append((rows[~go_left], depth + 1, right[node]))
		stack.append((rows[go_left], depth + 1, left[node]))

	return TreeArrays(
		feature=np.array(feature, dtype=int),
		threshold=np.array(threshold, dtype=float),
		left=np.array(left, dtype=int),
		right=np.array(right, dtype=int),
		value=np.array(value, dtype=float).reshape(len(feature), Y.shape[1]),
		n_samples=np.array(n_samples, dtype=int),
		impurity=np.array(impurity, dtype=float),
	)


def apply_tree(tree: TreeArrays, Z: np.ndarray) -> np.ndarray:
	"""Leaf index reached by every row of ``Z``."""
	node = np.zeros(Z.shape[0], dtype=int)
	active = tree.feature[node] != LEAF
	while active.any():
		idx = np.flatnonzero(active)
		cur = node[idx]
		go_left = Z[idx, tree.feature[cur]] <= tree.threshold[cur]
		node[idx] = np.where(go_left, tree.left[cur], tree.right[cur])
		active = tree.feature[node] != LEAF
	return node


def _subtree(tree: TreeArrays, root: int) -> list[int]:
	out, stack = [], [root]
	while stack:
		i = stack.pop()
		out.append(i)
		if tree.feature[i] != LEAF:
			stack.extend((tree.right[i], tree.left[i]))
	return out


def _compact(tree: TreeArrays) -> TreeArrays:
	keep = sorted(_subtree(tree, 0))
	remap = {old: new for new, old in enumerate(keep)}
	left = np.array([remap[tree.left[i]] if tree.feature[i] != LEAF else LEAF for i in keep], dtype=int)
	right = np.array([remap[tree.right[i]] if tree.feature[i] != LEAF else LEAF for i in keep], dtype=int)
	return TreeArrays(
		feature=tree.feature[keep],
		threshold=tree.threshold[keep],
		left=left,
		right=right,
		value=tree.value[keep],
		n_samples=tree.n_samples[keep],
		impurity=tree.impurity[keep],
	)


def prune_tree(tree: TreeArrays, ccp_alpha: float) -> TreeArrays:
	"""
	Minimal cost-complexity pruning: collapse the weakest link while its
	effective alpha (R(t) - R(T_t)) / (|leaves(T_t)| - 1) is <= ``ccp_alpha``.
	"""
	if ccp_alpha <= 0 or tree.node_count == 1:
		return tree
	tree = TreeArrays(**{k: np.array(v, copy=True) for k, v in tree.to_dict().items()})
	total = float(tree.n_samples[0])
	risk = tree.n_samples * tree.impurity / total

	while tree.feature[0] != LEAF:
		weakest, weakest_alpha = None, math.inf
		for i in _subtree(tree, 0):
			if tree.feature[i] == LEAF:
				continue
			leaves = [j for j in _subtree(tree, i) if tree.feature[j] == LEAF]
			g = (risk[i] - risk[leaves].sum()) / (len(leaves) - 1)
			if g < weakest_alpha:
				weakest, weakest_alpha = i, g
		if weakest_alpha > ccp_alpha:
			break
		tree.feature[weakest] = LEAF
		tree.left[weakest] = tree.right[weakest] = LEAF
	return _compact(tree)


class DecisionTree(ClassifierModel):
	method = "tree"
	DEFAULTS = {
		"max_depth": None,
		"min_samples_split": 2,
		"min_samples_leaf": 1,
		"max_features": None,
		"ccp_alpha": 0.0,
	}

	def __init__(self, hyperparams=None):
		super().__init__(hyperparams)
		self.tree: TreeArrays | None = None

	def _fit(self, Z, y, rng):
		hp = self.hyperparams
		Y = np.zeros((y.size, self.K))
		Y[np.arange(y.size), y] = 1.0
		tree = grow_tree(
			Z, Y, "gini",
			max_depth=hp["max_depth"],
			min_samples_split=int(hp["min_samples_split"]),
			min_samples_leaf=int(hp["min_samples_leaf"]),
			max_features=resolve_max_features(hp["max_features"], self.F),
			rng=rng,
		)
		self.tree = prune_tree(tree, float(hp["ccp_alpha"]))

	def _proba(self, Z):
		return self.tree.value[apply_tree(self.tree, Z)]

	def _get_state(self):
		return self.tree.to_dict()

	def _set_state(self, state):
		self.tree = TreeArrays.from_dict(state)
