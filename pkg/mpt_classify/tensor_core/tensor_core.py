# Symmetric 3x3 tensor arithmetic used by every feature computation.
#
# Tensors are stored as their 6 independent entries in the order
#   11, 22, 33, 12, 13, 23
# and every function also accepts stacked (..., 3, 3) arrays so whole
# spectral signatures are handled in one call.

from dataclasses import dataclass

import numpy as np

from mpt_classify.exceptions import NonOrthogonal, ValidationError

ENTRY_ORDER = ("11", "22", "33", "12", "13", "23")
_ROWS = np.array([0, 1, 2, 0, 0, 1])
_COLS = np.array([0, 1, 2, 1, 2, 2])
ORTHOGONALITY_TOL = 1e-9


# ---------------------------------------------------------------------------
# Entry <-> matrix helpers
# ---------------------------------------------------------------------------
def entries_to_matrix(entries) -> np.ndarray:
	"""(..., 6) entries -> (..., 3, 3) symmetric matrices."""
	e = np.asarray(entries)
	if e.shape[-1] != 6:
		raise ValidationError(f"Expected 6 independent entries, got shape {e.shape}")
	m = np.empty(e.shape[:-1] + (3, 3), dtype=e.dtype)
	m[..., _ROWS, _COLS] = e
	m[..., _COLS, _ROWS] = e
	return m


def matrix_to_entries(matrix) -> np.ndarray:
	"""(..., 3, 3) -> (..., 6), reading the upper triangle."""
	m = np.asarray(matrix)
	if m.shape[-2:] != (3, 3):
		raise ValidationError(f"Expected (..., 3, 3) matrices, got shape {m.shape}")
	return m[..., _ROWS, _COLS]


@dataclass(frozen=True, eq=False)
class RealTensor3:
	entries: np.ndarray

	def __post_init__(self):
		e = np.array(self.entries, dtype=float).reshape(6)
		e.setflags(write=False)
		object.__setattr__(self, "entries", e)

	@classmethod
	def from_matrix(cls, matrix) -> "RealTensor3":
		m = np.asarray(matrix, dtype=float)
		return cls(matrix_to_entries(0.5 * (m + m.T)))

	@classmethod
	def diag(cls, a: float, b: float, c: float) -> "RealTensor3":
		return cls([a, b, c, 0.0, 0.0, 0.0])

	@classmethod
	def identity(cls) -> "RealTensor3":
		return cls.diag(1.0, 1.0, 1.0)

	@property
	def matrix(self) -> np.ndarray:
		return entries_to_matrix(self.entries)

	def __eq__(self, other):
		return isinstance(other, RealTensor3) and np.array_equal(self.entries, other.entries)

	def __hash__(self):
		return hash(self.entries.tobytes())


@dataclass(frozen=True, eq=False)
class ComplexTensor3:
	entries: np.ndarray

	def __post_init__(self):
		e = np.array(self.entries, dtype=complex).reshape(6)
		e.setflags(write=False)
		object.__setattr__(self, "entries", e)

	@classmethod
	def from_parts(cls, real: RealTensor3, imag: RealTensor3) -> "ComplexTensor3":
		return cls(real.entries + 1j * imag.entries)

	@property
	def matrix(self) -> np.ndarray:
		return entries_to_matrix(self.entries)

	@property
	def real(self) -> RealTensor3:
		return RealTensor3(self.entries.real)

	@property
	def imag(self) -> RealTensor3:
		return RealTensor3(self.entries.imag)

	def __eq__(self, other):
		return isinstance(other, ComplexTensor3) and np.array_equal(self.entries, other.entries)

	def __hash__(self):
		return hash(self.entries.tobytes())


@dataclass(frozen=True)
class Invariants:
	"""Principal invariants; fields are floats, or arrays for stacked input."""

	i1: float | np.ndarray
	i2: float | np.ndarray
	i3: float | np.ndarray

	def as_array(self) -> np.ndarray:
		return np.stack(np.broadcast_arrays(self.i1, self.i2, self.i3), axis=-1)


def _as_matrix(a) -> np.ndarray:
	if isinstance(a, RealTensor3):
		return a.matrix
	m = np.asarray(a, dtype=float)
	if m.shape[-1] == 6 and m.shape[-2:] != (3, 3):
		return entries_to_matrix(m)
	if m.shape[-2:] != (3, 3):
		raise ValidationError(f"Expected a symmetric tensor, got shape {m.shape}")
	return m


# ---------------------------------------------------------------------------
# Invariants and eigenvalues
# ---------------------------------------------------------------------------
def principal_invariants(a) -> Invariants:
	"""
	I1 = tr(a), I2 = (tr(a)^2 - tr(a^2)) / 2, I3 = det(a).

	Stacked input returns array-valued fields.
	"""
	m = _as_matrix(a)
	tr = np.trace(m, axis1=-2, axis2=-1)
	tr_sq = np.einsum("...ij,...ji->...", m, m)
	i1 = tr
	i2 = 0.5 * (tr * tr - tr_sq)
	i3 = _det3(m)
	if np.ndim(i1) == 0:
		return Invariants(float(i1), float(i2), float(i3))
	return Invariants(i1, i2, i3)


def _det3(m: np.ndarray) -> np.ndarray:
	return (
		m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
		- m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
		+ m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
	)


def _char_poly(lam, i1, i2, i3):
	return ((lam - i1) * lam + i2) * lam - i3


def eigenvalues_sym(a) -> np.ndarray:
	"""
	Eigenvalues of a real symmetric 3x3 tensor, sorted ascending and repeated
	according to multiplicity.

	Returns shape (3,) for a single tensor or (..., 3) for stacked input.
	"""
	m = _as_matrix(a)
	return np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))


def char_poly_residual(a, lam) -> np.ndarray:
	"""|lam^3 - I1 lam^2 + I2 lam - I3| for each candidate root."""
	inv = principal_invariants(a)
	return np.abs(_char_poly(np.asarray(lam), inv.i1, inv.i2, inv.i3))


# ---------------------------------------------------------------------------
# Rotations
# ---------------------------------------------------------------------------
def check_orthogonal(r) -> np.ndarray:
	r = np.asarray(r, dtype=float)
	if r.shape != (3, 3):
		raise NonOrthogonal(f"Rotation must be 3x3, got shape {r.shape}")
	err = np.max(np.abs(r.T @ r - np.eye(3)))
	if err > ORTHOGONALITY_TOL:
		raise NonOrthogonal(f"|r^T r - I|_max = {err:.3e} exceeds {ORTHOGONALITY_TOL:g}")
	return r


def rotate(a: RealTensor3, r) -> RealTensor3:
	"""r a r^T, re-symmetrized."""
	r = check_orthogonal(r)
	out = r @ _as_matrix(a) @ r.T
	return RealTensor3.from_matrix(out)


def rotate_stack(matrices, r) -> np.ndarray:
	"""Rotate a stack of (..., 3, 3) matrices (real or complex) with one rotation."""
	r = check_orthogonal(r)
	out = np.einsum("ij,...jk,lk->...il", r, np.asarray(matrices), r)
	return 0.5 * (out + np.swapaxes(out, -1, -2))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
	"""Uniformly distributed proper rotation via QR of a Gaussian matrix."""
	q, rr = np.linalg.qr(rng.standard_normal((3, 3)))
	q = q * np.sign(np.diag(rr))
	if np.linalg.det(q) < 0:
		q[:, 0] = -q[:, 0]
	return q


def axis_rotation(axis: str, angle: float) -> np.ndarray:
	c, s = np.cos(angle), np.sin(angle)
	if axis == "x":
		return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
	if axis == "y":
		return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
	if axis == "z":
		return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
	raise ValidationError(f"Unknown rotation axis: {axis}")
