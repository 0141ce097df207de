# Analytical eddy-current response of a homogeneous conducting, permeable sphere.
#
# For a sphere of radius alpha the MPT is m(omega) * I with
#   z = alpha * sqrt(i * omega * sigma * mu0 * mu_r),  t = tanh(z),  h = z - t
#   m = conj( 2 pi alpha^3 * [(2 mu_r + 1) h - z^2 t] / [(mu_r - 1) h + z^2 t] )
# which is the usual spherical-Bessel closed form divided through by cosh(z).
# Near z = 0 both h and the mu_r = 1 numerator cancel catastrophically, so they
# are summed from the tanh Taylor series instead.

import math

import numpy as np
from scipy.special import bernoulli

MU0 = 4.0e-7 * np.pi
SERIES_RADIUS = 0.5
_SERIES_TERMS = 20


def _tanh_coefficients(n_terms: int) -> np.ndarray:
	"""c_n with tanh z = sum_{n>=1} c_n z^(2n-1)."""
	b = bernoulli(2 * n_terms)
	c = np.zeros(n_terms + 1)
	for n in range(1, n_terms + 1):
		c[n] = 2 ** (2 * n) * (2 ** (2 * n) - 1) * b[2 * n] / math.factorial(2 * n)
	return c


_C = _tanh_coefficients(_SERIES_TERMS)
# h = z - tanh z      = sum_{n>=2} -c_n z^(2n-1)
# q = 3h - z^2 tanh z = sum_{n>=3} (-3 c_n - c_{n-1}) z^(2n-1)   (the z^3 term vanishes)
_H_COEF = np.array([-_C[n] for n in range(2, _SERIES_TERMS + 1)])
_Q_COEF = np.array([-3.0 * _C[n] - _C[n - 1] for n in range(3, _SERIES_TERMS + 1)])


def induction_number(alpha, sigma, mu_r, omega):
	"""x = alpha * sqrt(omega * sigma * mu0 * mu_r)."""
	return alpha * np.sqrt(np.asarray(omega, dtype=float) * sigma * MU0 * mu_r)


def _odd_series(coef: np.ndarray, first_power: int, z: np.ndarray) -> np.ndarray:
	z2 = z * z
	acc = np.zeros_like(z)
	for c in coef[::-1]:
		acc = acc * z2 + c
	return acc * z**first_power


def _tanh(z: np.ndarray) -> np.ndarray:
	# Re(z) > 0 always here, so exp(-2z) never overflows.
	e = np.expm1(-2.0 * z)
	return -e / (2.0 + e)


def mpt_polarizability_sphere(alpha: float, sigma: float, mu_r: float, omega) -> np.ndarray:
	"""
	Scalar m(omega) in m^3 (complex, Im >= 0) for a conducting permeable sphere.

	``omega`` may be a scalar or an array; omega = 0 returns the magnetostatic
	value 4 pi alpha^3 (mu_r - 1)/(mu_r + 2).
	"""
	omega = np.asarray(omega, dtype=float)
	scalar = omega.ndim == 0
	omega = np.atleast_1d(omega)

	z = alpha * np.sqrt(1j * omega * sigma * MU0 * mu_r)
	out = np.empty(z.shape, dtype=complex)
	vol = 2.0 * np.pi * alpha**3

	small = np.abs(z) < SERIES_RADIUS
	if np.any(small):
		zs = z[small]
		# h and q divided by z^3; with z^2 t = 3h - q the ratio stays finite at omega = 0
		h3 = _odd_series(_H_COEF, 0, zs)
		q3 = _odd_series(_Q_COEF, 2, zs)
		num = q3 + 2.0 * (mu_r - 1.0) * h3
		den = (mu_r - 1.0) * h3 + 3.0 * h3 - q3
		out[small] = num / den

	big = ~small
	if np.any(big):
		zb = z[big]
		t = _tanh(zb)
		h = zb - t
		z2t = zb * zb * t
		out[big] = ((2.0 * mu_r + 1.0) * h - z2t) / ((mu_r - 1.0) * h + z2t)

	m = np.conj(vol * out)
	return m[0] if scalar else m


def static_limit(alpha: float, mu_r: float) -> float:
	return 4.0 * np.pi * alpha**3 * (mu_r - 1.0) / (mu_r + 2.0)


def conductor_limit(alpha: float) -> float:
	"""Perfect-conductor (omega -> inf) value."""
	return -2.0 * np.pi * alpha**3
