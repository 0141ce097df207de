# Copyright (c) 2026, MPT Classify Contributors
# See license.txt

import unittest

import numpy as np
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from mpt_classify.signature_source.signature_source import log_frequency_grid, sphere_signature
from mpt_classify.signature_source.sphere import (
	MU0,
	conductor_limit,
	induction_number,
	mpt_polarizability_sphere,
	static_limit,
)
from mpt_classify.tensor_core.tensor_core import principal_invariants


def radial_ode_oracle(alpha, sigma, mu_r, omega):
	"""
	Integrate f'' + 2f'/s - 2f/s^2 - z^2 f = 0 on the unit ball (s = r/alpha),
	match to the exterior dipole and return m(omega).
	"""
	z2 = 1j * omega * sigma * MU0 * mu_r * alpha**2
	s0 = 1e-3

	def rhs(s, y):
		f, fp = y
		return [fp, -2.0 * fp / s + 2.0 * f / s**2 + z2 * f]

	y0 = [s0 + z2 * s0**3 / 10.0, 1.0 + 3.0 * z2 * s0**2 / 10.0]
	sol = solve_ivp(rhs, (s0, 1.0), np.array(y0, dtype=complex), method="DOP853", rtol=1e-12, atol=1e-15)
	f1, fp1 = sol.y[0, -1], sol.y[1, -1]
	rho = (fp1 + f1) / (mu_r * f1)
	return np.conj(2.0 * np.pi * alpha**3 * (2.0 - rho) / (1.0 + rho))


def bessel_closed_form(alpha, sigma, mu_r, omega):
	"""Spherical-Bessel form with k = sqrt(-i omega sigma mu), real-argument safe for small x."""
	mu = mu_r * MU0
	k = np.sqrt(-1j * omega * sigma * mu)
	ka = k * alpha
	j0 = np.sin(ka) / ka
	j2 = (3.0 / ka**2 - 1.0) * np.sin(ka) / ka - 3.0 * np.cos(ka) / ka**2
	m = 2.0 * np.pi * alpha**3 * (2.0 * (mu - MU0) * j0 + (2.0 * mu + MU0) * j2) / (
		(mu + 2.0 * MU0) * j0 + (mu - MU0) * j2
	)
	return m


class TestSpherePolarizability(unittest.TestCase):
	def test_induction_number_check_point(self):
		self.assertAlmostEqual(float(induction_number(1e-3, 5.96e7, 1.0, 1e5)), 2.7366, places=3)

	def test_matches_radial_ode(self):
		for mu_r, omega in [(1.0, 1e5), (1.0, 3e3), (1.0, 2e6), (50.0, 1e4), (5.0, 1e5)]:
			with self.subTest(mu_r=mu_r, omega=omega):
				got = mpt_polarizability_sphere(1e-3, 5.96e7, mu_r, omega)
				want = radial_ode_oracle(1e-3, 5.96e7, mu_r, omega)
				assert_allclose(got, want, rtol=1e-8)

	def test_matches_bessel_form_mid_band(self):
		# the Bessel form with k = sqrt(-i omega sigma mu) is the conjugate convention
		got = mpt_polarizability_sphere(1e-3, 5.96e7, 1.0, 1e5)
		assert_allclose(got, np.conj(bessel_closed_form(1e-3, 5.96e7, 1.0, 1e5)), rtol=1e-9)

	def test_series_and_direct_branches_agree(self):
		alpha, sigma = 1e-3, 5.96e7
		# |z| = 0.5 boundary sits at x = 0.5
		omega_edge = (0.5 / alpha) ** 2 / (sigma * MU0)
		below = mpt_polarizability_sphere(alpha, sigma, 1.0, omega_edge * (1 - 1e-9))
		above = mpt_polarizability_sphere(alpha, sigma, 1.0, omega_edge * (1 + 1e-9))
		assert_allclose(below, above, rtol=1e-7)
		assert_allclose(below, radial_ode_oracle(alpha, sigma, 1.0, omega_edge), rtol=1e-8)

	def test_low_frequency_non_permeable_vanishes(self):
		m = mpt_polarizability_sphere(1e-3, 5.96e7, 1.0, np.array([0.0, 1e-6, 1e-3]))
		self.assertEqual(m[0], 0.0)
		self.assertLess(abs(m[1]), 1e-6 * 1e-9)
		# leading behaviour i * 2 pi alpha^3 x^2 / 15
		x2 = 1e-3 * 5.96e7 * MU0 * 1e-6
		assert_allclose(m[2].imag, 2 * np.pi * 1e-9 * x2 / 15, rtol=1e-6)

	def test_limits(self):
		alpha = 2e-3
		assert_allclose(mpt_polarizability_sphere(alpha, 1e6, 20.0, 0.0), static_limit(alpha, 20.0), rtol=1e-14)
		hi = mpt_polarizability_sphere(alpha, 5.96e7, 1.0, 1e16)
		assert_allclose(hi.real, conductor_limit(alpha), rtol=1e-5)

	def test_vanishing_induction_stays_finite(self):
		alpha = 2e-3
		m = mpt_polarizability_sphere(alpha, 1e6, 20.0, np.array([0.0, 1e-300, 1e-200, 1e-12]))
		self.assertTrue(np.all(np.isfinite(m)))
		assert_allclose(m.real, static_limit(alpha, 20.0), rtol=1e-12)

	def test_absorption_positive_and_vanishing_at_both_ends(self):
		w = log_frequency_grid(1e-2, 1e14, 400)
		m = mpt_polarizability_sphere(1e-3, 5.96e7, 1.0, w)
		self.assertTrue(np.all(m.imag >= 0))
		peak = m.imag.max()
		self.assertLess(m.imag[0], 1e-6 * peak)
		self.assertLess(m.imag[-1], 1e-3 * peak)

	def test_no_overflow_at_high_induction(self):
		m = mpt_polarizability_sphere(0.1, 6e7, 100.0, 1e12)
		self.assertTrue(np.isfinite(m))


class TestSphereSignature(unittest.TestCase):
	def test_isotropic(self):
		sig = sphere_signature(1e-3, 5.96e7, 1.0)
		self.assertEqual(sig.frequencies.size, 13)
		assert_allclose(sig.frequencies[[0, -1]], [1.0, 1e10])
		self.assertTrue(np.all(sig.coefficients[:, 3:] == 0))
		self.assertTrue(np.all(sig.coefficients[:, 0] == sig.coefficients[:, 1]))
		self.assertTrue(np.all(sig.coefficients[:, 0] == sig.coefficients[:, 2]))

	def test_invariants_of_isotropic_tensor(self):
		sig = sphere_signature(1e-3, 5.96e7, 1.0)
		m = sig.coefficients[:, 0]
		for part, values in (("real", m.real), ("imag", m.imag)):
			mats = getattr(sig.matrices, part)
			inv = principal_invariants(mats)
			with self.subTest(part=part):
				assert_allclose(inv.i1, 3 * values, rtol=1e-12, atol=0)
				assert_allclose(inv.i2, 3 * values**2, rtol=1e-12, atol=0)
				assert_allclose(inv.i3, values**3, rtol=1e-12, atol=0)

	def test_low_frequency_tensor_vanishes(self):
		sig = sphere_signature(1e-3, 5.96e7, 1.0, frequencies=[1e-4, 1.0])
		self.assertLess(np.abs(sig.coefficients[0]).max(), 1e-6 * 1e-9)


if __name__ == "__main__":
	unittest.main()
