import numpy as np

from mpt_classify.exceptions import ValidationError
from mpt_classify.signature_source.signature_source import SpectralSignature, interpolate_coefficients
from mpt_classify.tensor_core.tensor_core import eigenvalues_sym, entries_to_matrix, principal_invariants

FEATURE_KINDS = ("invariants", "eigenvalues")


def _per_frequency(matrices: np.ndarray, kind: str) -> np.ndarray:
	if kind == "invariants":
		return principal_invariants(matrices).as_array()
	return eigenvalues_sym(matrices)


def features_from_coefficients(coefficients, kind: str = "invariants") -> np.ndarray:
	"""
	(M, 6) complex coefficients -> x of length 6M.

	Block 1 holds the real-part quantities and block 2 the imaginary-part ones,
	each frequency-major with j = 1..3 inside.
	"""
	if kind not in FEATURE_KINDS:
		raise ValidationError(f"Unknown feature kind {kind!r}; expected one of {FEATURE_KINDS}")
	c = np.asarray(coefficients, dtype=complex)
	m = entries_to_matrix(c)
	real_block = _per_frequency(m.real, kind).reshape(-1)
	imag_block = _per_frequency(m.imag, kind).reshape(-1)
	return np.concatenate([real_block, imag_block])


def build_features(sig: SpectralSignature, eval_freqs, kind: str = "invariants") -> np.ndarray:
	"""Feature vector x in R^(6M) for ``sig`` at ``eval_freqs`` (OutOfGrid if any lies outside)."""
	return features_from_coefficients(interpolate_coefficients(sig, eval_freqs), kind)


def feature_names(eval_freqs, kind: str = "invariants") -> list[str]:
	stem = "I" if kind == "invariants" else "lambda"
	names = []
	for part in ("re", "im"):
		for m in range(len(eval_freqs)):
			names.extend(f"{stem}{j}_{part}_w{m + 1}" for j in (1, 2, 3))
	return names
