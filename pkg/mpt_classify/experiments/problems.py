# Built-in desk-scale problems made of analytic sphere signatures, so every
# experiment verb can run without any signature files.

import numpy as np

from mpt_classify.dictionary_builder.sampling import REGIME_LADDER
from mpt_classify.signature_source.signature_source import (
	ClassSpec,
	GeometrySpec,
	log_frequency_grid,
	sphere_signature,
)

BASE_GRID_RADPS = (1.0, 1.0e10)
BASE_GRID_POINTS = 161

# coin-like conductivities, S/m
SPHERE_CLASS_SIGMAS = (5.96e7, 4.03e7, 3.77e7, 2.5e7, 1.5e7, 1.0e7, 6.0e6, 3.5e6)
LOO_GEOMETRY_SCALES = {"small": 0.99, "medium": 1.0, "large": 1.01}


def base_grid() -> np.ndarray:
	return log_frequency_grid(*BASE_GRID_RADPS, BASE_GRID_POINTS)


def default_sphere_classes(v_count: int = 200, regime: str = "control") -> list[ClassSpec]:
	"""
	Eight sphere classes with alpha_k = 1 mm * (1 + 0.2 (k - 1)) and distinct
	conductivities, one geometry each.
	"""
	a_rel, s_rel = REGIME_LADDER[regime]
	grid = base_grid()
	specs = []
	for k, sigma in enumerate(SPHERE_CLASS_SIGMAS, start=1):
		alpha = 1e-3 * (1 + 0.2 * (k - 1))
		base = sphere_signature(alpha, sigma, frequencies=grid, geometry_id="sphere", class_id=k)
		specs.append(
			ClassSpec(k, [GeometrySpec("sphere", base)], alpha, a_rel * alpha, sigma, s_rel * sigma, v_count,
					  name=f"sphere-{k}")
		)
	return specs


def default_loo_classes(v_count: int = 100, regime: str = "control", K: int = 4) -> list[ClassSpec]:
	"""
	K classes of three sphere "geometries" each, sized 0.99, 1.00 and 1.01 times
	the class mean radius; any one of them can be held out.
	"""
	a_rel, s_rel = REGIME_LADDER[regime]
	grid = base_grid()
	specs = []
	for k in range(1, K + 1):
		alpha = 1e-3 * (1 + 0.25 * (k - 1))
		sigma = SPHERE_CLASS_SIGMAS[(2 * (k - 1)) % len(SPHERE_CLASS_SIGMAS)]
		geometries = [
			GeometrySpec(gid, sphere_signature(alpha * scale, sigma, frequencies=grid, geometry_id=gid, class_id=k))
			for gid, scale in LOO_GEOMETRY_SCALES.items()
		]
		specs.append(ClassSpec(k, geometries, alpha, a_rel * alpha, sigma, s_rel * sigma, v_count, name=f"loo-{k}"))
	return specs
