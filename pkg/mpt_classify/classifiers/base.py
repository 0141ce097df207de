# Shared classifier interface.
#
# Every method standardises features with statistics frozen at fit time, fits on
# the z-scored matrix with 0-based labels, and answers with a (n, K) probability
# matrix. Decisions are MAP with ties going to the lowest class index.

import numpy as np

from mpt_classify import logger
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary
from mpt_classify.exceptions import DimensionMismatch, MissingClass, ValidationError
from mpt_classify.utils import TRAIN_STREAM, Seed, derive_rng

log = logger("classifiers")


def normalize_rows(P: np.ndarray) -> np.ndarray:
	P = np.clip(np.asarray(P, dtype=float), 0.0, None)
	s = P.sum(axis=1, keepdims=True)
	s[s == 0] = 1.0
	return P / s


class ClassifierModel:
	method: str = ""
	probabilistic: bool = True
	DEFAULTS: dict = {}

	def __init__(self, hyperparams: dict | None = None):
		hyperparams = dict(hyperparams or {})
		unknown = sorted(set(hyperparams) - set(self.DEFAULTS))
		if unknown:
			raise ValidationError(f"Unknown {self.method} hyperparameters: {', '.join(unknown)}")
		self.hyperparams = {**self.DEFAULTS, **hyperparams}
		self.K: int | None = None
		self.F: int | None = None
		self.mean_: np.ndarray | None = None
		self.scale_: np.ndarray | None = None
		self.converged = True
		self.final_loss: float | None = None

	@property
	def fitted(self) -> bool:
		return self.mean_ is not None

	def fit(self, d_train: Dictionary, rng_seed: Seed = 0) -> "ClassifierModel":
		if len(d_train) == 0:
			raise ValidationError("Training dictionary is empty")
		missing = [k for k, n in d_train.class_counts.items() if n == 0]
		if missing:
			raise MissingClass(f"Classes {missing} have no training samples")

		self.K, self.F = d_train.K, d_train.F
		X = d_train.X
		self.mean_ = X.mean(axis=0)
		scale = X.std(axis=0)
		scale[scale == 0] = 1.0
		self.scale_ = scale

		self._fit(self._standardize(X), d_train.labels - 1, derive_rng(rng_seed, TRAIN_STREAM))
		if not self.converged:
			log.warning("%s did not converge; final loss %s", self.method, self.final_loss)
		return self

	def _standardize(self, X) -> np.ndarray:
		X = np.asarray(X, dtype=float)
		if X.ndim == 1:
			X = X.reshape(1, -1)
		if X.shape[1] != self.F:
			raise DimensionMismatch(f"Expected {self.F} features, got {X.shape[1]}")
		return (X - self.mean_) / self.scale_

	def predict_proba_batch(self, X) -> np.ndarray:
		if not self.fitted:
			raise ValidationError(f"{self.method} model is not trained")
		return normalize_rows(self._proba(self._standardize(X)))

	def predict_proba(self, x) -> np.ndarray:
		x = np.asarray(x, dtype=float)
		if x.ndim != 1:
			raise DimensionMismatch(f"Expected a single feature vector, got shape {x.shape}")
		return self.predict_proba_batch(x)[0]

	def predict_batch(self, X) -> np.ndarray:
		# np.argmax returns the first maximum, i.e. the lowest class index on ties
		return np.argmax(self.predict_proba_batch(X), axis=1) + 1

	def predict(self, x) -> int:
		return int(np.argmax(self.predict_proba(x))) + 1

	# -- method hooks -----------------------------------------------------
	def _fit(self, Z: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
		raise NotImplementedError

	def _proba(self, Z: np.ndarray) -> np.ndarray:
		raise NotImplementedError

	def _get_state(self) -> dict:
		raise NotImplementedError

	def _set_state(self, state: dict) -> None:
		raise NotImplementedError

	def get_state(self) -> dict:
		return {
			"method": self.method,
			"hyperparams": dict(self.hyperparams),
			"K": self.K,
			"F": self.F,
			"mean": self.mean_,
			"scale": self.scale_,
			"converged": self.converged,
			"final_loss": self.final_loss,
			"params": self._get_state(),
		}

	def set_state(self, state: dict) -> "ClassifierModel":
		self.K, self.F = int(state["K"]), int(state["F"])
		self.mean_ = np.asarray(state["mean"], dtype=float)
		self.scale_ = np.asarray(state["scale"], dtype=float)
		self.converged = bool(state["converged"])
		self.final_loss = state["final_loss"]
		self._set_state(state["params"])
		return self
