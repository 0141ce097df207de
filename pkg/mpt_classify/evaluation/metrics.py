# Confusion matrices and the per-class and overall scores read off them.
# Rows are the true class i, columns the predicted class j.

from dataclasses import dataclass

import numpy as np

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary
from mpt_classify.exceptions import DegenerateChance, DimensionMismatch, ValidationError


@dataclass(eq=False)
class ConfusionMatrix:
	counts: np.ndarray

	def __post_init__(self):
		c = np.asarray(self.counts)
		if c.ndim != 2 or c.shape[0] != c.shape[1]:
			raise ValidationError(f"Confusion matrix must be square, got shape {c.shape}")
		if np.any(c < 0) or not np.all(c == np.round(c)):
			raise ValidationError("Confusion counts must be non-negative integers")
		self.counts = c.astype(np.int64)

	@property
	def K(self) -> int:
		return int(self.counts.shape[0])

	@property
	def total(self) -> int:
		return int(self.counts.sum())

	@property
	def normalized(self) -> np.ndarray:
		"""Entries divided by the total count."""
		return self.counts / self.total if self.total else np.zeros(self.counts.shape)

	@property
	def row_normalized(self) -> np.ndarray:
		"""Each row divided by its sum: the frequency of predicting j given true class i."""
		rows = self.counts.sum(axis=1, keepdims=True)
		with np.errstate(invalid="ignore", divide="ignore"):
			out = self.counts / rows
		return np.where(rows > 0, out, 0.0)

	def tp_fp_tn_fn(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
		c = self.counts
		tp = np.diag(c).copy()
		fp = c.sum(axis=0) - tp
		fn = c.sum(axis=1) - tp
		tn = self.total - tp - fp - fn
		return tp, fp, tn, fn

	def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
		if other.K != self.K:
			raise DimensionMismatch("Cannot add confusion matrices of different size")
		return ConfusionMatrix(self.counts + other.counts)


def confusion_from_labels(true_labels, predicted_labels, K: int) -> ConfusionMatrix:
	t = np.asarray(true_labels, dtype=int).reshape(-1)
	p = np.asarray(predicted_labels, dtype=int).reshape(-1)
	if t.size != p.size:
		raise DimensionMismatch("True and predicted labels differ in length")
	if t.size and (min(t.min(), p.min()) < 1 or max(t.max(), p.max()) > K):
		raise ValidationError(f"Labels must lie in [1, {K}]")
	c = np.zeros((K, K), dtype=np.int64)
	np.add.at(c, (t - 1, p - 1), 1)
	return ConfusionMatrix(c)


def confusion_matrix(model: ClassifierModel, d_test: Dictionary) -> ConfusionMatrix:
	if len(d_test) == 0:
		raise ValidationError("Test dictionary is empty")
	if d_test.K != model.K:
		raise DimensionMismatch(f"Model has K={model.K}, test dictionary K={d_test.K}")
	return confusion_from_labels(d_test.labels, model.predict_batch(d_test.X), d_test.K)


@dataclass(frozen=True)
class ClassMetrics:
	"""Per-class scores; None marks an undefined 0/0 ratio."""

	precision: tuple[float | None, ...]
	sensitivity: tuple[float | None, ...]
	specificity: tuple[float | None, ...]

	def rows(self) -> list[tuple[int, float | None, float | None, float | None]]:
		return [
			(k + 1, self.precision[k], self.sensitivity[k], self.specificity[k])
			for k in range(len(self.precision))
		]


def _ratio(num: np.ndarray, den: np.ndarray) -> tuple[float | None, ...]:
	return tuple(float(n / d) if d else None for n, d in zip(num, den, strict=True))


def class_metrics(c: ConfusionMatrix) -> ClassMetrics:
	tp, fp, tn, fn = c.tp_fp_tn_fn()
	return ClassMetrics(
		precision=_ratio(tp, tp + fp),
		sensitivity=_ratio(tp, tp + fn),
		specificity=_ratio(tn, tn + fp),
	)


def accuracy(c: ConfusionMatrix) -> float:
	return float(np.trace(c.counts) / c.total)


def random_accuracy(c: ConfusionMatrix) -> float:
	"""sum_k (row total_k * column total_k) / N^2."""
	n = float(c.total)
	return float(np.sum(c.counts.sum(axis=1) * c.counts.sum(axis=0)) / (n * n))


def kappa(c: ConfusionMatrix) -> float:
	"""(accuracy - random accuracy) / (1 - random accuracy)."""
	if c.total <= 0:
		raise ValidationError("Confusion matrix is empty")
	chance = random_accuracy(c)
	if chance >= 1.0:
		raise DegenerateChance("Random accuracy is 1; kappa is undefined")
	return (accuracy(c) - chance) / (1.0 - chance)
