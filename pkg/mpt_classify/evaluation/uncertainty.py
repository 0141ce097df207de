# Percentile summaries of the posterior estimates over one true-class subset.
#
# For class k, the values gamma_k(x_i) over the subset are sorted ascending and
# the y-th percentile is read at fractional rank (y/100)(n-1) with linear
# interpolation between neighbouring order statistics.

from dataclasses import dataclass

import numpy as np
from scipy import stats

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary
from mpt_classify.exceptions import EmptySubset, NonProbabilisticModel, ValidationError

PERCENTILES = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class UncertaintySummary:
	"""Rows are classes k = 1..K; columns are the 5th, 25th, 50th, 75th and 95th percentiles."""

	true_class: int
	n: int
	percentiles: np.ndarray

	@property
	def p5(self) -> np.ndarray:
		return self.percentiles[:, 0]

	@property
	def q1(self) -> np.ndarray:
		return self.percentiles[:, 1]

	@property
	def median(self) -> np.ndarray:
		return self.percentiles[:, 2]

	@property
	def q3(self) -> np.ndarray:
		return self.percentiles[:, 3]

	@property
	def p95(self) -> np.ndarray:
		return self.percentiles[:, 4]


def percentile_table(values) -> np.ndarray:
	"""(n, K) values -> (K, 5) percentile table."""
	values = np.asarray(values, dtype=float)
	if values.ndim == 1:
		values = values.reshape(-1, 1)
	if values.shape[0] == 0:
		raise EmptySubset("No values to summarise")
	return np.percentile(values, PERCENTILES, axis=0, method="linear").T


def uncertainty_summary(model: ClassifierModel, d_test_class: Dictionary, allow_non_probabilistic: bool = False):
	"""
	Percentiles of gamma_k(x) over a test subset that holds a single true class.

	Vote-frequency models raise NonProbabilisticModel unless
	``allow_non_probabilistic`` is set.
	"""
	if not model.probabilistic and not allow_non_probabilistic:
		raise NonProbabilisticModel(f"{model.method} does not estimate posterior probabilities")
	if len(d_test_class) == 0:
		raise EmptySubset("Test subset is empty")
	classes = np.unique(d_test_class.labels)
	if classes.size != 1:
		raise ValidationError(f"Test subset mixes true classes {classes.tolist()}")
	gamma = model.predict_proba_batch(d_test_class.X)
	return UncertaintySummary(int(classes[0]), len(d_test_class), percentile_table(gamma))


def uncertainty_by_class(model: ClassifierModel, d_test: Dictionary, **kwargs) -> dict[int, UncertaintySummary]:
	"""One summary per true class present in ``d_test``."""
	return {
		int(k): uncertainty_summary(model, d_test.for_class(int(k)), **kwargs) for k in np.unique(d_test.labels)
	}


@dataclass(frozen=True)
class ConfidenceInterval:
	mean: float
	low: float
	high: float
	level: float


def mean_confidence_interval(values, level: float = 0.95) -> ConfidenceInterval:
	"""Student-t interval mean +/- t * S / sqrt(n) for the mean of ``values``."""
	x = np.asarray(values, dtype=float).reshape(-1)
	if x.size < 2:
		raise EmptySubset("At least two values are needed for an interval")
	m = float(x.mean())
	half = float(stats.t.ppf(0.5 + level / 2, x.size - 1) * x.std(ddof=1) / np.sqrt(x.size))
	return ConfidenceInterval(m, m - half, m + half, level)
