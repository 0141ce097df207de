# Additive complex Gaussian noise on MPT coefficients at a given SNR.
#
# For each independent coefficient v:
#   noise = |v|^2 / 10^(SNR/10)
#   v' = v + sqrt(noise / 2) * (u + i w),  u, w ~ N(0, 1)
# so E|e|^2 / |v|^2 = 10^(-SNR/10). Only the 6 independent entries are
# perturbed, which keeps every tensor symmetric.

import math
from dataclasses import dataclass

import numpy as np

from mpt_classify.exceptions import ValidationError
from mpt_classify.signature_source.signature_source import SpectralSignature
from mpt_classify.utils import Seed, derive_rng

NOISELESS = math.inf


def is_noiseless(snr_db: float | None) -> bool:
	return snr_db is None or (math.isinf(snr_db) and snr_db > 0)


def noise_power_ratio(snr_db: float) -> float:
	return 10.0 ** (-snr_db / 10.0)


def add_noise_coefficients(coefficients, snr_db: float, rng: np.random.Generator) -> np.ndarray:
	v = np.asarray(coefficients, dtype=complex)
	if is_noiseless(snr_db):
		return v.copy()
	if not math.isfinite(snr_db):
		raise ValidationError(f"SNR must be finite or +inf, got {snr_db}")
	noise = (np.conj(v) * v).real * noise_power_ratio(snr_db)
	u = rng.standard_normal(v.shape)
	w = rng.standard_normal(v.shape)
	return v + np.sqrt(noise / 2.0) * (u + 1j * w)


def add_noise(sig: SpectralSignature, snr_db: float, rng_seed: Seed) -> SpectralSignature:
	"""Noisy copy of ``sig``; ``snr_db = inf`` returns the signature unchanged."""
	if is_noiseless(snr_db):
		return sig
	rng = derive_rng(rng_seed)
	return sig.with_coefficients(add_noise_coefficients(sig.coefficients, snr_db, rng))


@dataclass(frozen=True)
class NoiseRatioStats:
	snr_db: float
	n: int
	mean_ratio: float
	rms_ratio: float
	mean_power_ratio: float

	@property
	def expected_rms_ratio(self) -> float:
		return 10.0 ** (-self.snr_db / 20.0)

	@property
	def expected_power_ratio(self) -> float:
		return noise_power_ratio(self.snr_db)


def noise_ratio_statistics(
	v: complex, snr_db: float, n: int = 10_000, rng_seed: Seed = 0
) -> NoiseRatioStats:
	"""Empirical |e/v| statistics over ``n`` noisy draws of a fixed coefficient."""
	if v == 0:
		raise ValidationError("Noise ratios are undefined for a zero coefficient")
	rng = derive_rng(rng_seed)
	draws = add_noise_coefficients(np.full(n, v, dtype=complex), snr_db, rng)
	r = np.abs(draws - v) / abs(v)
	return NoiseRatioStats(
		snr_db=float(snr_db),
		n=int(n),
		mean_ratio=float(r.mean()),
		rms_ratio=float(np.sqrt(np.mean(r**2))),
		mean_power_ratio=float(np.mean(r**2)),
	)
