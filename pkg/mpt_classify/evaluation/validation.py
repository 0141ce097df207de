# Monte Carlo cross validation: repeated stratified splits, each trained and
# scored independently from its own derived seed.

from dataclasses import dataclass, field

import numpy as np

from mpt_classify import logger
from mpt_classify.classifiers.classifiers import train
from mpt_classify.dictionary_builder.dictionary_builder import DEFAULT_TEST_FRACTION, Dictionary, split
from mpt_classify.evaluation.metrics import ClassMetrics, ConfusionMatrix, class_metrics, confusion_matrix, kappa
from mpt_classify.exceptions import ValidationError
from mpt_classify.utils import Seed, parallel_map, seed_key

log = logger("evaluation")


@dataclass(frozen=True)
class McCvIteration:
	index: int
	kappa: float
	confusion: ConfusionMatrix
	metrics: ClassMetrics
	converged: bool = True


@dataclass(frozen=True)
class KappaSummary:
	mean: float
	min: float
	q1: float
	median: float
	q3: float
	max: float

	def as_dict(self) -> dict:
		return dict(self.__dict__)


def kappa_summary(values) -> KappaSummary:
	k = np.asarray(values, dtype=float)
	if k.size == 0:
		raise ValidationError("No kappa values to summarise")
	q1, med, q3 = np.percentile(k, [25, 50, 75])
	return KappaSummary(float(k.mean()), float(k.min()), float(q1), float(med), float(q3), float(k.max()))


@dataclass
class McCvReport:
	method: str
	hyperparams: dict
	iterations: list[McCvIteration] = field(default_factory=list)

	@property
	def kappas(self) -> np.ndarray:
		return np.array([it.kappa for it in self.iterations])

	@property
	def kappa_summary(self) -> KappaSummary:
		return kappa_summary(self.kappas)

	@property
	def pooled_confusion(self) -> ConfusionMatrix:
		total = self.iterations[0].confusion
		for it in self.iterations[1:]:
			total = total + it.confusion
		return total


def mccv(
	method: str,
	hyperparams: dict | None,
	d: Dictionary,
	iterations: int,
	test_fraction: float = DEFAULT_TEST_FRACTION,
	rng_seed: Seed = 0,
	test_source: Dictionary | None = None,
	threads: int = 1,
) -> McCvReport:
	"""
	``iterations`` independent stratified splits of ``d``; iteration i splits
	and trains with seed (rng_seed, i).
	"""
	if iterations < 1:
		raise ValidationError(f"MCCV needs at least one iteration, got {iterations}")

	def run(i):
		seed = seed_key(rng_seed, i)
		s = split(d, test_fraction, seed, test_source)
		model = train(method, hyperparams, s.train, seed)
		c = confusion_matrix(model, s.test)
		return McCvIteration(i, kappa(c), c, class_metrics(c), model.converged)

	report = McCvReport(method, dict(hyperparams or {}), parallel_map(run, range(iterations), threads))
	summary = report.kappa_summary
	log.info(
		"MCCV %s x%d: kappa median %.4f [%.4f, %.4f]", method, iterations, summary.median, summary.q1, summary.q3
	)
	return report
