# Multinomial logistic regression.
#
# "discriminative" minimises the logloss of the softmax of linear scores with
# the K-th class as the zero reference and an L2 penalty 1/(2C)|W|^2, using
# L-BFGS-B. "generative" fits Gaussian class conditionals with one pooled
# covariance and reads the linear scores off the class means and priors.

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.exceptions import SingularCovariance, ValidationError

RIDGE = 1e-8
SOLVERS = ("discriminative", "generative")


def discriminative_loss(theta: np.ndarray, Z: np.ndarray, T: np.ndarray, C: float):
	"""Penalised logloss and its gradient; theta packs (K-1) x (F+1) weights, bias last."""
	N, F = Z.shape
	K = T.shape[1]
	Wb = theta.reshape(K - 1, F + 1)
	A = np.zeros((N, K))
	A[:, : K - 1] = Z @ Wb[:, :F].T + Wb[:, F]
	lse = logsumexp(A, axis=1)
	loss = float(np.sum(lse - np.sum(T * A, axis=1)))
	loss += 0.5 / C * float(np.sum(Wb[:, :F] ** 2))

	R = softmax(A, axis=1)[:, : K - 1] - T[:, : K - 1]
	grad = np.empty_like(Wb)
	grad[:, :F] = R.T @ Z + Wb[:, :F] / C
	grad[:, F] = R.sum(axis=0)
	return loss, grad.reshape(-1)


class LogisticRegression(ClassifierModel):
	method = "logistic"
	DEFAULTS = {"solver": "discriminative", "C": 1.0, "max_iter": 1000, "tol": 1e-6}

	def __init__(self, hyperparams=None):
		super().__init__(hyperparams)
		if self.hyperparams["solver"] not in SOLVERS:
			raise ValidationError(f"Unknown logistic solver {self.hyperparams['solver']!r}")
		if not self.hyperparams["C"] > 0:
			raise ValidationError("C must be > 0")
		self.W: np.ndarray | None = None
		self.b: np.ndarray | None = None
		self.means_: np.ndarray | None = None
		self.covariance_: np.ndarray | None = None

	def scores(self, Z: np.ndarray) -> np.ndarray:
		return Z @ self.W.T + self.b

	def _proba(self, Z):
		return softmax(self.scores(Z), axis=1)

	def _fit(self, Z, y, rng):
		if self.hyperparams["solver"] == "generative":
			self._fit_generative(Z, y)
		else:
			self._fit_discriminative(Z, y)

	def _fit_discriminative(self, Z, y):
		N, F = Z.shape
		K = self.K
		T = np.zeros((N, K))
		T[np.arange(N), y] = 1.0
		res = minimize(
			discriminative_loss,
			np.zeros((K - 1) * (F + 1)),
			args=(Z, T, float(self.hyperparams["C"])),
			jac=True,
			method="L-BFGS-B",
			options={"maxiter": int(self.hyperparams["max_iter"]), "gtol": float(self.hyperparams["tol"])},
		)
		Wb = res.x.reshape(K - 1, F + 1)
		self.W = np.vstack([Wb[:, :F], np.zeros((1, F))])
		self.b = np.concatenate([Wb[:, F], [0.0]])
		self.converged = bool(res.success)
		self.final_loss = float(res.fun)

	def _fit_generative(self, Z, y):
		N, F = Z.shape
		K = self.K
		means = np.stack([Z[y == k].mean(axis=0) for k in range(K)])
		priors = np.bincount(y, minlength=K) / N
		R = Z - means[y]
		cov = R.T @ R / N
		trace = float(np.trace(cov))
		if not np.isfinite(trace) or trace <= 0:
			raise SingularCovariance("Pooled covariance has zero trace")
		cov_reg = cov + RIDGE * trace * np.eye(F)
		try:
			factor = cho_factor(cov_reg)
		except LinAlgError as e:
			raise SingularCovariance(f"Pooled covariance is not positive definite: {e}") from e

		W = cho_solve(factor, means.T).T
		self.W = W
		self.b = -0.5 * np.sum(W * means, axis=1) + np.log(priors)
		self.means_ = means
		self.covariance_ = cov
		self.converged = True
		A = self.scores(Z)
		self.final_loss = float(np.sum(logsumexp(A, axis=1) - A[np.arange(N), y]))

	def _get_state(self):
		state = {"W": self.W, "b": self.b}
		if self.means_ is not None:
			state.update(means=self.means_, covariance=self.covariance_)
		return state

	def _set_state(self, state):
		self.W = np.asarray(state["W"], dtype=float)
		self.b = np.asarray(state["b"], dtype=float)
		if "means" in state:
			self.means_ = np.asarray(state["means"], dtype=float)
			self.covariance_ = np.asarray(state["covariance"], dtype=float)
