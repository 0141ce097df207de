# Copyright (c) 2026, MPT Classify Contributors
# See license.txt

import tempfile
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

from mpt_classify.exceptions import IoError, OutOfGrid, ParseError, ValidationError
from mpt_classify.signature_source.signature_source import (
	CSV_COLUMNS,
	ClassSpec,
	GeometrySpec,
	SpectralSignature,
	interpolate_coefficients,
	load_signature_dir,
	load_signatures,
	sphere_signature,
	write_signatures,
)


def _random_signature(rng, n=13, geometry_id="bolt", class_id=3):
	w = np.sort(rng.uniform(1.0, 1e6, n))
	coef = rng.standard_normal((n, 6)) * 1e-8 + 1j * rng.standard_normal((n, 6)) * 1e-9
	return SpectralSignature(w, coef, alpha=rng.uniform(1e-3, 2e-3), sigma=rng.uniform(1e6, 6e7),
							 mu_r=1.0 + rng.uniform(0, 5), geometry_id=geometry_id, class_id=class_id)


class TestSpectralSignature(unittest.TestCase):
	def test_rejects_unsorted_frequencies(self):
		with self.assertRaises(ValidationError):
			SpectralSignature([1.0, 3.0, 2.0], np.zeros((3, 6)), 1e-3, 1e7)

	def test_rejects_bad_material(self):
		for kwargs in ({"alpha": 0.0, "sigma": 1e7}, {"alpha": 1e-3, "sigma": -1.0},
					   {"alpha": 1e-3, "sigma": 1e7, "mu_r": 0.5}):
			with self.subTest(**kwargs), self.assertRaises(ValidationError):
				SpectralSignature([1.0, 2.0], np.zeros((2, 6)), **kwargs)

	def test_rejects_non_finite_coefficients(self):
		coef = np.zeros((2, 6), dtype=complex)
		coef[1, 4] = complex(np.nan, 0.0)
		with self.assertRaises(ValidationError):
			SpectralSignature([1.0, 2.0], coef, 1e-3, 1e7)

	def test_rejects_padded_geometry_id(self):
		with self.assertRaises(ValidationError):
			SpectralSignature([1.0, 2.0], np.zeros((2, 6)), 1e-3, 1e7, geometry_id=" bolt ")

	def test_one_tensor_per_frequency(self):
		with self.assertRaises(ValidationError):
			SpectralSignature([1.0, 2.0], np.zeros((3, 6)), 1e-3, 1e7)

	def test_accepts_full_matrices(self):
		m = np.zeros((2, 3, 3), dtype=complex)
		m[:, 0, 1] = m[:, 1, 0] = 2 + 1j
		sig = SpectralSignature([1.0, 2.0], m, 1e-3, 1e7)
		assert_allclose(sig.coefficients[:, 3], [2 + 1j, 2 + 1j])
		self.assertEqual(len(sig.tensors), 2)


class TestClassSpec(unittest.TestCase):
	def test_sample_count_counts_materials(self):
		base = sphere_signature(1e-3, 1e7)
		spec = ClassSpec(
			class_id=1,
			geometries=[GeometrySpec("a", [base, base]), GeometrySpec("b", base)],
			m_alpha=1e-3, s_alpha=0.0, m_sigma=1e7, s_sigma=0.0, v_count=5,
		)
		self.assertEqual(spec.sample_count, 15)
		self.assertEqual(spec.geometry_ids, ["a", "b"])

	def test_invalid(self):
		base = sphere_signature(1e-3, 1e7)
		with self.assertRaises(ValidationError):
			ClassSpec(1, [GeometrySpec("a", base)], 1e-3, -1.0, 1e7, 0.0, 5)
		with self.assertRaises(ValidationError):
			ClassSpec(1, [], 1e-3, 0.0, 1e7, 0.0, 5)
		with self.assertRaises(ValidationError):
			ClassSpec(1, [GeometrySpec("a", base)], 1e-3, 0.0, 1e7, 0.0, 0)


class TestSignatureFiles(unittest.TestCase):
	def setUp(self):
		self.tmp = tempfile.TemporaryDirectory()
		self.dir = Path(self.tmp.name)

	def tearDown(self):
		self.tmp.cleanup()

	def test_empty_list_writes_header(self):
		path = self.dir / "empty.csv"
		write_signatures([], path)
		self.assertEqual(path.read_text().strip(), ",".join(CSV_COLUMNS))
		self.assertEqual(load_signatures(path), [])

	def test_thirteen_rows(self):
		path = self.dir / "sphere.csv"
		write_signatures([sphere_signature(1e-3, 5.96e7, geometry_id="ball", class_id=2)], path)
		rows = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
		self.assertEqual(len(rows), 14)
		sigs = load_signatures(path)
		self.assertEqual(len(sigs), 1)
		self.assertEqual(len(sigs[0].tensors), 13)
		self.assertEqual((sigs[0].geometry_id, sigs[0].class_id), ("ball", 2))

	def test_round_trip_is_bit_exact(self):
		rng = np.random.default_rng(11)
		sigs = [_random_signature(rng, geometry_id=f"g{i}", class_id=i + 1) for i in range(3)]
		for fmt in ("csv", "json"):
			with self.subTest(fmt=fmt):
				path = self.dir / f"sigs.{fmt}"
				write_signatures(sigs, path)
				back = load_signatures(path)
				self.assertEqual(len(back), 3)
				for a, b in zip(sigs, back, strict=True):
					self.assertTrue(a.same_as(b))

	def test_unsorted_omega_rejected(self):
		path = self.dir / "bad.csv"
		sig = sphere_signature(1e-3, 5.96e7)
		write_signatures([sig], path)
		lines = path.read_text().splitlines()
		lines[6], lines[7] = lines[7], lines[6]
		path.write_text("\n".join(lines) + "\n")
		with self.assertRaises(ValidationError):
			load_signatures(path)

	def test_malformed_row(self):
		path = self.dir / "bad.csv"
		write_signatures([sphere_signature(1e-3, 5.96e7)], path)
		with path.open("a") as f:
			f.write("1e11,not-a-number\n")
		with self.assertRaises(ParseError):
			load_signatures(path)

	def test_nan_coefficient_rejected_on_load(self):
		path = self.dir / "nan.csv"
		write_signatures([sphere_signature(1e-3, 5.96e7)], path)
		lines = path.read_text().splitlines()
		cells = lines[-1].split(",")
		cells[1] = "nan"
		lines[-1] = ",".join(cells)
		path.write_text("\n".join(lines) + "\n")
		with self.assertRaises(ValidationError):
			load_signatures(path)

	def test_missing_header(self):
		path = self.dir / "bad.csv"
		path.write_text("# alpha=0.001\n" + ",".join(CSV_COLUMNS) + "\n" + ",".join(["1"] * 13) + "\n")
		with self.assertRaises(ParseError):
			load_signatures(path)

	def test_missing_file(self):
		with self.assertRaises(IoError):
			load_signatures(self.dir / "nope.csv")

	def test_directory_loader(self):
		write_signatures([sphere_signature(1e-3, 1e7, geometry_id="a")], self.dir / "a.csv")
		write_signatures([sphere_signature(2e-3, 1e7, geometry_id="b")], self.dir / "b.json")
		sigs = load_signature_dir(self.dir)
		self.assertEqual([s.geometry_id for s in sigs], ["a", "b"])


class TestInterpolation(unittest.TestCase):
	def test_exact_nodes(self):
		sig = sphere_signature(1e-3, 5.96e7)
		out = interpolate_coefficients(sig, sig.frequencies[2:5])
		self.assertTrue(np.array_equal(out, sig.coefficients[2:5]))

	def test_log_linear_midpoint(self):
		coef = np.zeros((2, 6), dtype=complex)
		coef[1] = 2.0 + 4.0j
		sig = SpectralSignature([10.0, 1000.0], coef, 1e-3, 1e7)
		assert_allclose(interpolate_coefficients(sig, [100.0])[0], [1.0 + 2.0j] * 6)

	def test_no_extrapolation(self):
		sig = sphere_signature(1e-3, 5.96e7)
		with self.assertRaises(OutOfGrid):
			interpolate_coefficients(sig, [0.5])
		with self.assertRaises(OutOfGrid):
			interpolate_coefficients(sig, [2e10])


if __name__ == "__main__":
	unittest.main()
