# Multilayer perceptron with L hidden layers of J units and a softmax output.
#
# Training minimises (E + alpha/2 |W|^2) / N over the flat parameter vector
# with L-BFGS-B, where E = -sum_n sum_k t_nk ln gamma_k(x_n) is the logloss and
# the penalty covers weights only. mlp_gradient returns dE alone.

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, softmax

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.dictionary_builder.dictionary_builder import Dictionary
from mpt_classify.exceptions import DimensionMismatch, ValidationError
from mpt_classify.utils import Seed, derive_rng

HIDDEN_ACTIVATIONS = ("logistic", "softmax")


def mlp_parameter_count(F: int, J: int, L: int, K: int) -> int:
	return J * J * (L - 1) + J * (F + L + K) + K


def layer_shapes(F: int, J: int, L: int, K: int) -> list[tuple[tuple[int, int], tuple[int]]]:
	widths = [F] + [J] * L + [K]
	return [((widths[i + 1], widths[i]), (widths[i + 1],)) for i in range(L + 1)]


class MultilayerPerceptron(ClassifierModel):
	method = "mlp"
	DEFAULTS = {
		"hidden_layers": 3,
		"hidden_units": 50,
		"hidden_activation": "logistic",
		"alpha": 1e-4,
		"max_iter": 300,
		"tol": 1e-5,
	}

	def __init__(self, hyperparams=None):
		super().__init__(hyperparams)
		hp = self.hyperparams
		if hp["hidden_activation"] not in HIDDEN_ACTIVATIONS:
			raise ValidationError(f"hidden_activation must be one of {HIDDEN_ACTIVATIONS}")
		if int(hp["hidden_layers"]) < 1 or int(hp["hidden_units"]) < 1:
			raise ValidationError("hidden_layers and hidden_units must be >= 1")
		self.weights: list[np.ndarray] = []
		self.biases: list[np.ndarray] = []
		self.n_iter_: int | None = None

	@property
	def L(self) -> int:
		return int(self.hyperparams["hidden_layers"])

	@property
	def J(self) -> int:
		return int(self.hyperparams["hidden_units"])

	@property
	def parameter_count(self) -> int:
		return sum(w.size + b.size for w, b in zip(self.weights, self.biases, strict=True))

	# -- parameters -------------------------------------------------------
	def initialize(self, F: int, K: int, rng: np.random.Generator) -> None:
		"""Glorot-uniform weights and biases for an F -> J^L -> K network."""
		self.F, self.K = F, K
		self.weights, self.biases = [], []
		for w_shape, b_shape in layer_shapes(F, self.J, self.L, K):
			bound = np.sqrt(6.0 / (w_shape[0] + w_shape[1]))
			self.weights.append(rng.uniform(-bound, bound, w_shape))
			self.biases.append(rng.uniform(-bound, bound, b_shape))

	def get_flat_params(self) -> np.ndarray:
		return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases, strict=True)])

	def set_flat_params(self, theta: np.ndarray) -> None:
		theta = np.asarray(theta, dtype=float)
		expected = mlp_parameter_count(self.F, self.J, self.L, self.K)
		if theta.size != expected:
			raise DimensionMismatch(f"Expected {expected} parameters, got {theta.size}")
		self.weights, self.biases = [], []
		pos = 0
		for w_shape, b_shape in layer_shapes(self.F, self.J, self.L, self.K):
			n = w_shape[0] * w_shape[1]
			self.weights.append(theta[pos : pos + n].reshape(w_shape).copy())
			pos += n
			self.biases.append(theta[pos : pos + b_shape[0]].copy())
			pos += b_shape[0]

	# -- forward / backward -----------------------------------------------
	def _hidden(self, a):
		if self.hyperparams["hidden_activation"] == "softmax":
			return softmax(a, axis=-1)
		return expit(a)

	def forward(self, Z: np.ndarray) -> list[np.ndarray]:
		"""Activations [Z, h_1, .., h_L, gamma]."""
		acts = [Z]
		for w, b in zip(self.weights[:-1], self.biases[:-1], strict=True):
			acts.append(self._hidden(acts[-1] @ w.T + b))
		acts.append(softmax(acts[-1] @ self.weights[-1].T + self.biases[-1], axis=-1))
		return acts

	def logloss_and_gradient(self, Z: np.ndarray, T: np.ndarray) -> tuple[float, np.ndarray]:
		"""Summed logloss E over the rows and its gradient in flat parameter order."""
		acts = self.forward(Z)
		gamma = acts[-1]
		loss = -float(np.sum(T * np.log(np.clip(gamma, 1e-300, None))))

		grads_w, grads_b = [], []
		delta = gamma - T
		softmax_hidden = self.hyperparams["hidden_activation"] == "softmax"
		for layer in range(len(self.weights) - 1, -1, -1):
			grads_w.append(delta.T @ acts[layer])
			grads_b.append(delta.sum(axis=0))
			if layer == 0:
				break
			d_h = delta @ self.weights[layer]
			h = acts[layer]
			if softmax_hidden:
				delta = h * (d_h - np.sum(d_h * h, axis=1, keepdims=True))
			else:
				delta = d_h * h * (1.0 - h)
		grads_w.reverse()
		grads_b.reverse()
		grad = np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in zip(grads_w, grads_b, strict=True)])
		return loss, grad

	def _weight_mask(self) -> np.ndarray:
		return np.concatenate(
			[np.concatenate([np.ones(w.size), np.zeros(b.size)]) for w, b in zip(self.weights, self.biases, strict=True)]
		)

	def _fit(self, Z, y, rng):
		hp = self.hyperparams
		N = y.size
		T = np.zeros((N, self.K))
		T[np.arange(N), y] = 1.0
		self.initialize(self.F, self.K, rng)
		mask = self._weight_mask()
		alpha = float(hp["alpha"])

		def objective(theta):
			self.set_flat_params(theta)
			loss, grad = self.logloss_and_gradient(Z, T)
			w = theta * mask
			return (loss + 0.5 * alpha * float(w @ w)) / N, (grad + alpha * w) / N

		res = minimize(
			objective,
			self.get_flat_params(),
			jac=True,
			method="L-BFGS-B",
			options={"maxiter": int(hp["max_iter"]), "gtol": float(hp["tol"])},
		)
		self.set_flat_params(res.x)
		self.converged = bool(res.success)
		self.final_loss = float(res.fun)
		self.n_iter_ = int(res.nit)

	def _proba(self, Z):
		return self.forward(Z)[-1]

	def _get_state(self):
		return {"weights": self.weights, "biases": self.biases}

	def _set_state(self, state):
		self.weights = [np.asarray(w, dtype=float) for w in state["weights"]]
		self.biases = [np.asarray(b, dtype=float) for b in state["biases"]]


def initialize_mlp(F: int, K: int, rng_seed: Seed = 0, hyperparams: dict | None = None) -> MultilayerPerceptron:
	"""Untrained network with identity feature scaling, for gradient checks."""
	model = MultilayerPerceptron(hyperparams)
	model.initialize(F, K, derive_rng(rng_seed))
	model.mean_ = np.zeros(F)
	model.scale_ = np.ones(F)
	return model


def _batch_arrays(model: MultilayerPerceptron, batch) -> tuple[np.ndarray, np.ndarray]:
	if isinstance(batch, Dictionary):
		X, labels = batch.X, batch.labels
	else:
		X, labels = batch
	labels = np.asarray(labels, dtype=int).reshape(-1)
	Z = model._standardize(X)
	if Z.shape[0] == 0 or Z.shape[0] != labels.size:
		raise DimensionMismatch("Batch must be non-empty with one label per row")
	T = np.zeros((labels.size, model.K))
	T[np.arange(labels.size), labels - 1] = 1.0
	return Z, T


def mlp_loss(model: MultilayerPerceptron, batch) -> float:
	return model.logloss_and_gradient(*_batch_arrays(model, batch))[0]


def mlp_gradient(model: MultilayerPerceptron, batch) -> np.ndarray:
	"""
	Backpropagation gradient of the summed logloss over ``batch`` with respect
	to every weight and bias, in ``get_flat_params`` order.

	``batch`` is a Dictionary or an ``(X, labels)`` pair with 1-based labels.
	"""
	return model.logloss_and_gradient(*_batch_arrays(model, batch))[1]
