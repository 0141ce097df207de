# Soft-margin RBF support vector machines combined one-versus-one.
#
# Each of the K(K-1)/2 class pairs solves the C-SVC dual
#     min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0,  Q_ij = y_i y_j k(x_i, x_j)
# by sequential minimal optimisation on the maximal violating pair. The class
# scores are vote frequencies, so the model is not probabilistic.

import numpy as np
from numba import njit
from scipy.spatial.distance import cdist

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.exceptions import ValidationError
from mpt_classify.utils import parallel_map

TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
	return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


@njit(cache=True, nogil=True)
def smo_solve(Kmat, y, C, tol, max_iter):
	"""Returns (alpha, rho, iterations, converged)."""
	n = y.shape[0]
	alpha = np.zeros(n)
	G = -np.ones(n)
	it = 0
	converged = False
	while it < max_iter:
		# maximal violating pair
		g_max = -np.inf
		g_min = np.inf
		i = -1
		j = -1
		for t in range(n):
			yg = -y[t] * G[t]
			if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
				if yg > g_max:
					g_max = yg
					i = t
			if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
				if yg < g_min:
					g_min = yg
					j = t
		if i < 0 or j < 0 or g_max - g_min < tol:
			converged = True
			break
		it += 1

		q_ij = y[i] * y[j] * Kmat[i, j]
		old_ai = alpha[i]
		old_aj = alpha[j]
		if y[i] != y[j]:
			quad = Kmat[i, i] + Kmat[j, j] + 2.0 * q_ij
			if quad <= 0:
				quad = TAU
			delta = (-G[i] - G[j]) / quad
			diff = alpha[i] - alpha[j]
			alpha[i] += delta
			alpha[j] += delta
			if diff > 0:
				if alpha[j] < 0:
					alpha[j] = 0.0
					alpha[i] = diff
			else:
				if alpha[i] < 0:
					alpha[i] = 0.0
					alpha[j] = -diff
			if diff > 0:
				if alpha[i] > C:
					alpha[i] = C
					alpha[j] = C - diff
			else:
				if alpha[j] > C:
					alpha[j] = C
					alpha[i] = C + diff
		else:
			quad = Kmat[i, i] + Kmat[j, j] - 2.0 * q_ij
			if quad <= 0:
				quad = TAU
			delta = (G[i] - G[j]) / quad
			total = alpha[i] + alpha[j]
			alpha[i] -= delta
			alpha[j] += delta
			if total > C:
				if alpha[i] > C:
					alpha[i] = C
					alpha[j] = total - C
			else:
				if alpha[j] < 0:
					alpha[j] = 0.0
					alpha[i] = total
			if total > C:
				if alpha[j] > C:
					alpha[j] = C
					alpha[i] = total - C
			else:
				if alpha[i] < 0:
					alpha[i] = 0.0
					alpha[j] = total

		d_i = alpha[i] - old_ai
		d_j = alpha[j] - old_aj
		for t in range(n):
			G[t] += y[t] * (y[i] * Kmat[t, i] * d_i + y[j] * Kmat[t, j] * d_j)

	# bias from free vectors, else the middle of the feasible interval
	ub = np.inf
	lb = -np.inf
	free_sum = 0.0
	n_free = 0
	for t in range(n):
		yg = y[t] * G[t]
		if alpha[t] >= C:
			if y[t] < 0:
				ub = min(ub, yg)
			else:
				lb = max(lb, yg)
		elif alpha[t] <= 0:
			if y[t] > 0:
				ub = min(ub, yg)
			else:
				lb = max(lb, yg)
		else:
			n_free += 1
			free_sum += yg
	rho = free_sum / n_free if n_free > 0 else 0.5 * (ub + lb)
	return alpha, rho, it, converged


def class_pairs(K: int) -> list[tuple[int, int]]:
	return [(a, b) for a in range(K) for b in range(a + 1, K)]


class SupportVectorMachine(ClassifierModel):
	method = "svm"
	probabilistic = False
	DEFAULTS = {"C": 1.0, "gamma": "scale", "tol": 1e-3, "max_iter": 10_000_000, "n_jobs": 1}

	def __init__(self, hyperparams=None):
		super().__init__(hyperparams)
		if not self.hyperparams["C"] > 0:
			raise ValidationError("C must be > 0")
		self.gamma_: float | None = None
		self.machines: list[dict] = []

	def _resolve_gamma(self, Z) -> float:
		gamma = self.hyperparams["gamma"]
		if gamma == "scale":
			var = float(Z.var())
			return 1.0 / (Z.shape[1] * var) if var > 0 else 1.0
		if isinstance(gamma, str) or not gamma > 0:
			raise ValidationError(f"Invalid gamma {gamma!r}")
		return float(gamma)

	def _fit(self, Z, y, rng):
		hp = self.hyperparams
		self.gamma_ = self._resolve_gamma(Z)
		C, tol, max_iter = float(hp["C"]), float(hp["tol"]), int(hp["max_iter"])

		def fit_pair(pair):
			a, b = pair
			rows = np.flatnonzero((y == a) | (y == b))
			sign = np.where(y[rows] == a, 1.0, -1.0)
			Kmat = rbf_kernel(Z[rows], Z[rows], self.gamma_)
			alpha, rho, n_iter, converged = smo_solve(Kmat, sign, C, tol, max_iter)
			sv = alpha > 0
			return {
				"classes": [a, b],
				"support_vectors": Z[rows][sv],
				"dual_coef": (alpha * sign)[sv],
				"rho": float(rho),
				"n_iter": int(n_iter),
				"converged": bool(converged),
			}

		self.machines = parallel_map(fit_pair, class_pairs(self.K), int(hp["n_jobs"]))
		self.converged = all(m["converged"] for m in self.machines)

	def decision_function(self, Z: np.ndarray) -> np.ndarray:
		"""(n, K(K-1)/2) pairwise decision values; positive favours the first class."""
		out = np.empty((Z.shape[0], len(self.machines)))
		for p, m in enumerate(self.machines):
			out[:, p] = rbf_kernel(Z, m["support_vectors"], self.gamma_) @ m["dual_coef"] - m["rho"]
		return out

	def _proba(self, Z):
		votes = np.zeros((Z.shape[0], self.K))
		dec = self.decision_function(Z)
		rows = np.arange(Z.shape[0])
		for p, m in enumerate(self.machines):
			a, b = m["classes"]
			winner = np.where(dec[:, p] > 0, a, b)
			np.add.at(votes, (rows, winner), 1.0)
		return votes / len(self.machines)

	def _get_state(self):
		return {"gamma": self.gamma_, "machines": self.machines}

	def _set_state(self, state):
		self.gamma_ = float(state["gamma"])
		self.machines = [
			{
				**m,
				"classes": [int(c) for c in m["classes"]],
				"support_vectors": np.asarray(m["support_vectors"], dtype=float).reshape(-1, self.F),
				"dual_coef": np.asarray(m["dual_coef"], dtype=float),
				"rho": float(m["rho"]),
			}
			for m in state["machines"]
		]
