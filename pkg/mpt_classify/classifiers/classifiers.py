import numpy as np

from mpt_classify import get_attr, hooks, logger
from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.classifiers.mlp import mlp_gradient  # noqa: F401
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary
from mpt_classify.exceptions import ValidationError
from mpt_classify.utils import Seed

log = logger("classifiers")

METHODS = tuple(hooks.classifier_methods)


def model_class(method: str) -> type[ClassifierModel]:
	path = hooks.classifier_methods.get(method)
	if path is None:
		raise ValidationError(f"Unknown method {method!r}; expected one of {', '.join(METHODS)}")
	return get_attr(path)


def make_model(method: str, hyperparams: dict | None = None) -> ClassifierModel:
	return model_class(method)(hyperparams)


def train(method: str, hyperparams: dict | None, d_train: Dictionary, rng_seed: Seed = 0) -> ClassifierModel:
	"""Fit ``method`` on ``d_train``; normalisation statistics come from ``d_train`` only."""
	model = make_model(method, hyperparams).fit(d_train, rng_seed)
	log.debug("Trained %s on P=%d F=%d (converged=%s)", method, d_train.P, d_train.F, model.converged)
	return model


def predict_proba(model: ClassifierModel, x) -> np.ndarray:
	return model.predict_proba(x)


def predict(model: ClassifierModel, x) -> int:
	return model.predict(x)
