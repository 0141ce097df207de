# Synthetic problems with a known posterior, and the estimators built on them:
# MSE against the exact posterior, the empirical bias/variance split of the
# learning error, and a normality report for one feature of a dictionary.

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from mpt_classify import logger
from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary, dictionary_from_arrays
from mpt_classify.exceptions import ValidationError
from mpt_classify.utils import Seed, derive_rng, seed_key

log = logger("evaluation")

MIN_REPORT_SAMPLES = 30


@dataclass(eq=False)
class GaussianMixtureProblem:
	"""
	K Gaussian class conditionals N(means[k], covariances[k]) with priors.

	``covariances`` may be a single (F, F) matrix shared by every class.
	"""

	means: np.ndarray
	covariances: np.ndarray
	priors: np.ndarray | None = None

	def __post_init__(self):
		self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
		K, F = self.means.shape
		cov = np.asarray(self.covariances, dtype=float)
		if cov.ndim == 0:
			cov = cov * np.eye(F)
		if cov.ndim == 2:
			cov = np.broadcast_to(cov, (K, F, F)).copy()
		if cov.shape != (K, F, F):
			raise ValidationError(f"Covariances must be ({K}, {F}, {F}), got {cov.shape}")
		self.covariances = cov
		priors = np.full(K, 1.0 / K) if self.priors is None else np.asarray(self.priors, dtype=float)
		if priors.shape != (K,) or np.any(priors <= 0) or abs(priors.sum() - 1.0) > 1e-12:
			raise ValidationError("Priors must be K positive values summing to 1")
		self.priors = priors

	@property
	def K(self) -> int:
		return int(self.means.shape[0])

	@property
	def F(self) -> int:
		return int(self.means.shape[1])

	@classmethod
	def isotropic(cls, K: int, F: int, separation: float, rng_seed: Seed = 0) -> "GaussianMixtureProblem":
		"""Unit-variance classes whose means sit ``separation`` from the origin in random directions."""
		directions = derive_rng(rng_seed).standard_normal((K, F))
		directions /= np.linalg.norm(directions, axis=1, keepdims=True)
		return cls(separation * directions, np.eye(F))

	def sample(self, n_per_class, rng_seed: Seed = 0) -> tuple[np.ndarray, np.ndarray]:
		"""``n_per_class`` rows per class (an int or one count per class); labels are 1-based."""
		counts = np.broadcast_to(np.asarray(n_per_class, dtype=int), (self.K,))
		rng = derive_rng(rng_seed)
		X = np.concatenate(
			[rng.multivariate_normal(self.means[k], self.covariances[k], int(counts[k])) for k in range(self.K)]
		)
		labels = np.repeat(np.arange(1, self.K + 1), counts)
		return X, labels

	def sample_mixture(self, n: int, rng_seed: Seed = 0) -> np.ndarray:
		"""``n`` draws of x from the mixture density p(x)."""
		counts = derive_rng(rng_seed, 0).multinomial(n, self.priors)
		return self.sample(counts, seed_key(rng_seed, 1))[0]

	def as_dictionary(self, n_per_class, rng_seed: Seed = 0) -> Dictionary:
		X, labels = self.sample(n_per_class, rng_seed)
		return dictionary_from_arrays(X, labels, self.K)

	def posterior(self, X) -> np.ndarray:
		"""Exact p(C_k | x) by Bayes' rule, shape (n, K)."""
		X = np.atleast_2d(np.asarray(X, dtype=float))
		log_joint = np.stack(
			[
				stats.multivariate_normal.logpdf(X, self.means[k], self.covariances[k]).reshape(-1)
				+ np.log(self.priors[k])
				for k in range(self.K)
			],
			axis=1,
		)
		log_joint -= log_joint.max(axis=1, keepdims=True)
		p = np.exp(log_joint)
		return p / p.sum(axis=1, keepdims=True)


def _proba_fn(model):
	if isinstance(model, ClassifierModel):
		return model.predict_proba_batch
	if callable(model):
		return model
	raise ValidationError("model must be a ClassifierModel or a callable X -> (n, K) probabilities")


@dataclass(frozen=True)
class MseEstimate:
	mse: float
	standard_error: float
	n: int


def mse_vs_reference(model, reference_posterior, samples) -> MseEstimate:
	"""
	Monte Carlo estimate of E_x sum_k (gamma_k(x) - p(C_k|x))^2 over the rows of
	``samples`` (draws from p(x)), with its standard error.
	"""
	X = np.atleast_2d(np.asarray(samples, dtype=float))
	if X.shape[0] == 0:
		raise ValidationError("No samples to average over")
	sq = np.sum((_proba_fn(model)(X) - _proba_fn(reference_posterior)(X)) ** 2, axis=1)
	se = float(sq.std(ddof=1) / np.sqrt(sq.size)) if sq.size > 1 else 0.0
	return MseEstimate(float(sq.mean()), se, int(sq.size))


@dataclass(frozen=True)
class BiasVarianceEstimate:
	bias: float
	variance: float
	learning_error: float
	n_trainsets: int


def bias_variance(
	method,
	hyperparams: dict | None,
	problem: GaussianMixtureProblem,
	n_trainsets: int,
	rng_seed: Seed = 0,
	n_per_class: int = 50,
	eval_points: np.ndarray | None = None,
	n_eval: int = 500,
) -> BiasVarianceEstimate:
	"""
	Empirical bias and variance of the learned posterior over training sets.

	For every evaluation point x and class k, with gamma_D the model trained on
	set D: bias = (E_D gamma_D - p)^2 and variance = E_D (gamma_D - E_D gamma_D)^2,
	both summed over k and averaged over x. The direct learning error
	E_D (gamma_D - p)^2 equals bias + variance by construction.

	``method`` is a registered method name, a ClassifierModel subclass, or a
	callable ``(dictionary, seed) -> X -> (n, K) probabilities``.
	"""
	from mpt_classify.classifiers.classifiers import make_model

	if n_trainsets < 2:
		raise ValidationError("At least 2 training sets are needed")
	X_eval = problem.sample_mixture(n_eval, seed_key(rng_seed, 0)) if eval_points is None else np.asarray(eval_points)
	p = problem.posterior(X_eval)

	preds = np.empty((n_trainsets, X_eval.shape[0], problem.K))
	for i in range(n_trainsets):
		d = problem.as_dictionary(n_per_class, seed_key(rng_seed, 1, i))
		if isinstance(method, str):
			fn = make_model(method, hyperparams).fit(d, seed_key(rng_seed, 2, i)).predict_proba_batch
		elif isinstance(method, type) and issubclass(method, ClassifierModel):
			fn = method(hyperparams).fit(d, seed_key(rng_seed, 2, i)).predict_proba_batch
		else:
			fn = method(d, seed_key(rng_seed, 2, i))
		preds[i] = fn(X_eval)

	mean_pred = preds.mean(axis=0)
	bias = float(np.mean(np.sum((mean_pred - p) ** 2, axis=1)))
	variance = float(np.mean(np.sum(preds.var(axis=0), axis=1)))
	learning_error = float(np.mean(np.sum(np.mean((preds - p) ** 2, axis=0), axis=1)))
	return BiasVarianceEstimate(bias, variance, learning_error, n_trainsets)


@dataclass
class FeatureDistributionReport:
	feature_index: int
	n: int
	mean: float
	std: float
	skewness: float | None
	excess_kurtosis: float | None
	zero_variance: bool
	bin_edges: np.ndarray = field(default_factory=lambda: np.zeros(0))
	counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
	z: np.ndarray = field(default_factory=lambda: np.zeros(0))


def feature_distribution_report(d: Dictionary, feature_index: int, bins: int = 30) -> FeatureDistributionReport:
	"""
	Histogram of Z = (X - m_X) / s_X for one feature column with sample skewness
	and excess kurtosis. A constant feature is reported with ``zero_variance``
	set and no moments.
	"""
	if len(d) < MIN_REPORT_SAMPLES:
		raise ValidationError(f"At least {MIN_REPORT_SAMPLES} samples are needed, got {len(d)}")
	if not 0 <= feature_index < d.F:
		raise ValidationError(f"Feature index {feature_index} outside [0, {d.F})")
	x = d.X[:, feature_index]
	m, s = float(x.mean()), float(x.std(ddof=1))
	if s == 0:
		log.warning("Feature %d has zero variance", feature_index)
		return FeatureDistributionReport(feature_index, x.size, m, 0.0, None, None, True, z=np.zeros_like(x))
	z = (x - m) / s
	counts, edges = np.histogram(z, bins=bins)
	return FeatureDistributionReport(
		feature_index=feature_index,
		n=int(x.size),
		mean=m,
		std=s,
		skewness=float(stats.skew(z)),
		excess_kurtosis=float(stats.kurtosis(z)),
		zero_variance=False,
		bin_edges=edges,
		counts=counts,
		z=z,
	)
