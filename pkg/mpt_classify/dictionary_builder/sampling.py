# Size/conductivity variation sampling and the similarity scaling that turns
# one base signature into the signature of a resized, re-conducting object.

from dataclasses import replace

import numpy as np

from mpt_classify.exceptions import DegenerateSpec
from mpt_classify.signature_source.signature_source import (
	ClassSpec,
	SpectralSignature,
	clip_to_grid,
	interpolate_coefficients,
)
from mpt_classify.utils import Seed, derive_rng

# Standard deviations relative to the mean: (s_alpha / m_alpha, s_sigma / m_sigma)
REGIME_LADDER = {
	"control": (0.0084, 0.0236333),
	"a": (0.02, 0.05),
	"b": (0.05, 0.1),
	"c": (0.1, 0.2),
}
_MAX_REDRAW_ROUNDS = 1000


def _positive_normal(rng: np.random.Generator, mean: float, sd: float, n: int) -> np.ndarray:
	out = rng.normal(mean, sd, n)
	for _ in range(_MAX_REDRAW_ROUNDS):
		bad = out <= 0
		if not bad.any():
			return out
		out[bad] = rng.normal(mean, sd, int(bad.sum()))
	raise DegenerateSpec(f"Could not draw positive values from N({mean}, {sd})")


def sample_variations(spec: ClassSpec, rng_seed: Seed) -> list[tuple[float, float]]:
	"""
	V^(k) i.i.d. draws alpha ~ N(m_alpha, s_alpha), sigma ~ N(m_sigma, s_sigma).

	Non-positive draws are rejected and redrawn.
	"""
	if not spec.m_alpha > 0:
		raise DegenerateSpec(f"Class {spec.class_id}: m_alpha must be > 0, got {spec.m_alpha}")
	if not spec.m_sigma > 0:
		raise DegenerateSpec(f"Class {spec.class_id}: m_sigma must be > 0, got {spec.m_sigma}")

	rng = derive_rng(rng_seed)
	n = spec.v_count
	alphas = _positive_normal(rng, spec.m_alpha, spec.s_alpha, n)
	sigmas = _positive_normal(rng, spec.m_sigma, spec.s_sigma, n)
	return [(float(a), float(s)) for a, s in zip(alphas, sigmas, strict=True)]


def scale_signature(
	base: SpectralSignature,
	alpha_new: float,
	sigma_new: float,
	frequencies=None,
) -> SpectralSignature:
	"""
	Signature of ``base`` resized to ``alpha_new`` with conductivity ``sigma_new``.

	The MPT depends on (omega, sigma, alpha) through omega * sigma * alpha^2 plus an
	alpha^3 volume factor, so each output frequency omega is read from the base at
	omega' = omega * (sigma_new * alpha_new^2) / (base.sigma * base.alpha^2) and the
	result multiplied by (alpha_new / base.alpha)^3. ``frequencies`` defaults to the
	base grid. Raises OutOfGrid if any omega' leaves the base grid.
	"""
	w = base.frequencies if frequencies is None else np.asarray(frequencies, dtype=float)
	ratio = (sigma_new * alpha_new**2) / (base.sigma * base.alpha**2)
	if ratio == 1.0 and alpha_new == base.alpha and frequencies is None:
		return replace(base, sigma=sigma_new, alpha=alpha_new)

	source = clip_to_grid(base.frequencies, w * ratio)
	coef = interpolate_coefficients(base, source) * (alpha_new / base.alpha) ** 3
	return replace(base, frequencies=w, coefficients=coef, alpha=alpha_new, sigma=sigma_new)


def regime_specs(specs: list[ClassSpec], s_alpha_rel: float, s_sigma_rel: float) -> list[ClassSpec]:
	"""Copies of ``specs`` with s_alpha = s_alpha_rel * m_alpha and s_sigma = s_sigma_rel * m_sigma."""
	return [
		replace(spec, s_alpha=s_alpha_rel * spec.m_alpha, s_sigma=s_sigma_rel * spec.m_sigma)
		for spec in specs
	]
