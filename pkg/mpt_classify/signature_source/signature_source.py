# MPT spectral signatures: the in-memory type, file formats, and the
# analytical sphere generator used for desk-scale problems.
#
# CSV layout (one or more signatures per file, each a metadata block + rows):
#   # alpha=<m>
#   # sigma=<S/m>
#   # mu_r=<1>
#   # geometry_id=<text>
#   # class_id=<int>
#   omega,re11,re22,re33,re12,re13,re23,im11,im22,im33,im12,im13,im23
#   <one row per frequency>
# An empty list is written as the column header alone.

import csv
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from mpt_classify import logger
from mpt_classify.exceptions import IoError, OutOfGrid, ParseError, ValidationError
from mpt_classify.signature_source.sphere import mpt_polarizability_sphere
from mpt_classify.tensor_core.tensor_core import ENTRY_ORDER, ComplexTensor3, entries_to_matrix
from mpt_classify.utils import fmt_float

log = logger("signature_source")

CSV_COLUMNS = (
	["omega"] + [f"re{e}" for e in ENTRY_ORDER] + [f"im{e}" for e in ENTRY_ORDER]
)
META_KEYS = ("alpha", "sigma", "mu_r", "geometry_id", "class_id")
FORMATS = ("csv", "json")

DEFAULT_GRID_RADPS = (1.0, 1.0e10)
DEFAULT_GRID_POINTS = 13
WALKTHROUGH_WINDOW_RADPS = (5.02e4, 8.67e4)
MEASUREMENT_WINDOW_RADPS = (7.53e2, 5.99e5)
# endpoint slack so exact-node scaling is not rejected for a rounding ulp
_GRID_EDGE_RTOL = 1e-12


def log_frequency_grid(lo: float, hi: float, n: int) -> np.ndarray:
	if n == 1:
		return np.array([float(lo)])
	return np.logspace(np.log10(lo), np.log10(hi), n)


def linear_frequency_grid(lo: float, hi: float, n: int) -> np.ndarray:
	if n == 1:
		return np.array([float(lo)])
	return np.linspace(lo, hi, n)


def default_frequency_grid() -> np.ndarray:
	return log_frequency_grid(*DEFAULT_GRID_RADPS, DEFAULT_GRID_POINTS)


@dataclass(eq=False)
class SpectralSignature:
	"""
	Complex symmetric MPT tabulated over ascending angular frequencies.

	``coefficients`` holds the 6 independent entries per frequency, shape (N, 6),
	in the order 11, 22, 33, 12, 13, 23.
	"""

	frequencies: np.ndarray
	coefficients: np.ndarray
	alpha: float
	sigma: float
	mu_r: float = 1.0
	geometry_id: str = ""
	class_id: int = 1

	def __post_init__(self):
		self.frequencies = np.asarray(self.frequencies, dtype=float).reshape(-1)
		coef = np.asarray(self.coefficients, dtype=complex)
		if coef.ndim == 3:
			coef = coef[:, [0, 1, 2, 0, 0, 1], [0, 1, 2, 1, 2, 2]]
		self.coefficients = coef
		self.alpha = float(self.alpha)
		self.sigma = float(self.sigma)
		self.mu_r = float(self.mu_r)
		self.class_id = int(self.class_id)
		self.geometry_id = str(self.geometry_id)
		self.validate()

	def validate(self):
		w = self.frequencies
		if w.size == 0:
			raise ValidationError("Signature has no frequencies")
		if not np.all(np.isfinite(w)) or np.any(w <= 0):
			raise ValidationError("Frequencies must be finite and > 0")
		if np.any(np.diff(w) <= 0):
			raise ValidationError("Frequencies must be strictly increasing")
		if self.coefficients.shape != (w.size, 6):
			raise ValidationError(
				f"Expected one tensor per frequency: coefficients shape {self.coefficients.shape}, "
				f"{w.size} frequencies"
			)
		if not np.all(np.isfinite(self.coefficients)):
			raise ValidationError("Coefficients must be finite")
		if not self.alpha > 0:
			raise ValidationError(f"alpha must be > 0, got {self.alpha}")
		if not self.sigma > 0:
			raise ValidationError(f"sigma must be > 0, got {self.sigma}")
		if not self.mu_r >= 1:
			raise ValidationError(f"mu_r must be >= 1, got {self.mu_r}")
		if self.geometry_id != self.geometry_id.strip():
			raise ValidationError(f"geometry_id {self.geometry_id!r} has surrounding whitespace")

	@property
	def tensors(self) -> list[ComplexTensor3]:
		return [ComplexTensor3(row) for row in self.coefficients]

	@property
	def matrices(self) -> np.ndarray:
		return entries_to_matrix(self.coefficients)

	def with_coefficients(self, coefficients, frequencies=None, **changes) -> "SpectralSignature":
		return replace(
			self,
			coefficients=coefficients,
			frequencies=self.frequencies if frequencies is None else frequencies,
			**changes,
		)

	def same_as(self, other: "SpectralSignature") -> bool:
		return (
			np.array_equal(self.frequencies, other.frequencies)
			and np.array_equal(self.coefficients, other.coefficients)
			and (self.alpha, self.sigma, self.mu_r, self.geometry_id, self.class_id)
			== (other.alpha, other.sigma, other.mu_r, other.geometry_id, other.class_id)
		)


@dataclass
class GeometrySpec:
	"""One geometry of a class; each material is a base signature of that shape."""

	geometry_id: str
	materials: list[SpectralSignature]

	def __post_init__(self):
		if isinstance(self.materials, SpectralSignature):
			self.materials = [self.materials]
		if not self.materials:
			raise ValidationError(f"Geometry {self.geometry_id!r} has no base signature")


@dataclass
class ClassSpec:
	class_id: int
	geometries: list[GeometrySpec]
	m_alpha: float
	s_alpha: float
	m_sigma: float
	s_sigma: float
	v_count: int
	name: str = ""
	metadata: dict = field(default_factory=dict)

	def __post_init__(self):
		if self.s_alpha < 0 or self.s_sigma < 0:
			raise ValidationError(f"Class {self.class_id}: standard deviations must be >= 0")
		if len(self.geometries) < 1:
			raise ValidationError(f"Class {self.class_id}: at least one geometry is required")
		if int(self.v_count) < 1:
			raise ValidationError(f"Class {self.class_id}: v_count must be >= 1")
		self.v_count = int(self.v_count)
		ids = [g.geometry_id for g in self.geometries]
		if len(set(ids)) != len(ids):
			raise ValidationError(f"Class {self.class_id}: duplicate geometry ids {ids}")

	@property
	def geometry_ids(self) -> list[str]:
		return [g.geometry_id for g in self.geometries]

	@property
	def sample_count(self) -> int:
		"""P^(k) = sum over geometries of materials x V^(k)."""
		return sum(len(g.materials) for g in self.geometries) * self.v_count

	def geometry(self, geometry_id: str) -> GeometrySpec | None:
		for g in self.geometries:
			if g.geometry_id == geometry_id:
				return g
		return None


# ---------------------------------------------------------------------------
# Sphere generator
# ---------------------------------------------------------------------------
def sphere_signature(
	alpha: float,
	sigma: float,
	mu_r: float = 1.0,
	frequencies=None,
	geometry_id: str = "sphere",
	class_id: int = 1,
) -> SpectralSignature:
	"""Isotropic signature m(omega) * I of a conducting permeable sphere."""
	if not alpha > 0 or not sigma > 0:
		raise ValidationError("Sphere alpha and sigma must be > 0")
	if not mu_r >= 1:
		raise ValidationError("Sphere mu_r must be >= 1")
	w = default_frequency_grid() if frequencies is None else np.asarray(frequencies, dtype=float)
	m = mpt_polarizability_sphere(alpha, sigma, mu_r, w)
	coef = np.zeros((w.size, 6), dtype=complex)
	coef[:, :3] = m[:, None]
	return SpectralSignature(w, coef, alpha, sigma, mu_r, geometry_id, class_id)


# ---------------------------------------------------------------------------
# Interpolation
# ---------------------------------------------------------------------------
def clip_to_grid(grid: np.ndarray, omega) -> np.ndarray:
	"""Snap values within rounding of the grid ends; raise OutOfGrid beyond that."""
	omega = np.atleast_1d(np.asarray(omega, dtype=float))
	lo, hi = grid[0], grid[-1]
	below = omega < lo * (1.0 - _GRID_EDGE_RTOL)
	above = omega > hi * (1.0 + _GRID_EDGE_RTOL)
	if np.any(below) or np.any(above):
		bad = omega[below | above]
		raise OutOfGrid(
			f"{bad.size} frequencies outside [{lo:.6g}, {hi:.6g}] rad/s (e.g. {bad[0]:.6g}); "
			"extrapolation is not allowed"
		)
	return np.clip(omega, lo, hi)


def interpolate_coefficients(sig: SpectralSignature, omega) -> np.ndarray:
	"""Linear interpolation in log(omega), real and imaginary parts separately."""
	omega = clip_to_grid(sig.frequencies, omega)
	x = np.log(omega)
	xp = np.log(sig.frequencies)
	out = np.empty((x.size, 6), dtype=complex)
	for j in range(6):
		re = np.interp(x, xp, sig.coefficients[:, j].real)
		im = np.interp(x, xp, sig.coefficients[:, j].imag)
		out[:, j] = re + 1j * im
	# exact nodes keep their stored value bit-for-bit
	idx = np.searchsorted(sig.frequencies, omega)
	hit = (idx < sig.frequencies.size) & (sig.frequencies[np.minimum(idx, sig.frequencies.size - 1)] == omega)
	out[hit] = sig.coefficients[idx[hit]]
	return out


def interpolate_signature(sig: SpectralSignature, frequencies) -> SpectralSignature:
	w = np.asarray(frequencies, dtype=float)
	return sig.with_coefficients(interpolate_coefficients(sig, w), frequencies=w)


# ---------------------------------------------------------------------------
# File IO
# ---------------------------------------------------------------------------
def _infer_format(path: Path, format: str | None) -> str:
	fmt = (format or path.suffix.lstrip(".")).lower()
	if fmt not in FORMATS:
		raise ValidationError(f"Unknown signature format {fmt!r}; expected one of {FORMATS}")
	return fmt


def load_signatures(path: str | Path, format: str | None = None) -> list[SpectralSignature]:
	path = Path(path)
	fmt = _infer_format(path, format)
	try:
		text = path.read_text(encoding="utf-8")
	except OSError as e:
		raise IoError(f"Cannot read signature file {path}: {e}") from e

	sigs = _parse_csv(text, path) if fmt == "csv" else _parse_json(text, path)
	log.debug("Loaded %d signatures from %s", len(sigs), path)
	return sigs


def load_signature_dir(path: str | Path) -> list[SpectralSignature]:
	"""Every ``*.csv`` and ``*.json`` signature file in a folder, in name order."""
	path = Path(path)
	if not path.is_dir():
		raise IoError(f"Signature folder not found: {path}")
	out = []
	for f in sorted(path.iterdir()):
		if f.suffix.lower() in (".csv", ".json"):
			out.extend(load_signatures(f))
	return out


def _finish_block(meta: dict, rows: list, path: Path, line_no: int) -> SpectralSignature:
	missing = [k for k in META_KEYS if k not in meta]
	if missing:
		raise ParseError(f"{path}:{line_no}: missing header lines {missing}")
	data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
	coef = data[:, 1:7] + 1j * data[:, 7:13]
	try:
		return SpectralSignature(
			frequencies=data[:, 0],
			coefficients=coef,
			alpha=float(meta["alpha"]),
			sigma=float(meta["sigma"]),
			mu_r=float(meta["mu_r"]),
			geometry_id=meta["geometry_id"],
			class_id=int(meta["class_id"]),
		)
	except ValueError as e:
		raise ParseError(f"{path}:{line_no}: bad header value: {e}") from e


def _parse_csv(text: str, path: Path) -> list[SpectralSignature]:
	sigs = []
	meta: dict = {}
	rows: list = []
	have_header = False
	line_no = 0

	for line_no, raw in enumerate(text.splitlines(), start=1):
		line = raw.strip()
		if not line:
			continue
		if line.startswith("#"):
			if rows:
				sigs.append(_finish_block(meta, rows, path, line_no))
				meta, rows, have_header = {}, [], False
			key, sep, value = line.lstrip("#").strip().partition("=")
			if not sep:
				continue
			meta[key.strip()] = value.strip()
			continue
		cells = next(csv.reader([line]))
		if cells[0].strip() == "omega":
			if [c.strip() for c in cells] != CSV_COLUMNS:
				raise ParseError(f"{path}:{line_no}: unexpected column header {cells}")
			have_header = True
			continue
		if not have_header:
			raise ParseError(f"{path}:{line_no}: data row before column header")
		if len(cells) != len(CSV_COLUMNS):
			raise ParseError(f"{path}:{line_no}: expected {len(CSV_COLUMNS)} columns, got {len(cells)}")
		try:
			rows.append([float(c) for c in cells])
		except ValueError as e:
			raise ParseError(f"{path}:{line_no}: {e}") from e

	if rows:
		sigs.append(_finish_block(meta, rows, path, line_no))
	elif meta:
		raise ParseError(f"{path}: signature header without data rows")
	return sigs


def _parse_json(text: str, path: Path) -> list[SpectralSignature]:
	try:
		payload = json.loads(text) if text.strip() else []
	except json.JSONDecodeError as e:
		raise ParseError(f"{path}: {e}") from e
	if not isinstance(payload, list):
		raise ParseError(f"{path}: expected a JSON array of signatures")

	sigs = []
	for i, obj in enumerate(payload):
		try:
			re = np.array(obj["re"], dtype=float)
			im = np.array(obj["im"], dtype=float)
			sigs.append(
				SpectralSignature(
					frequencies=obj["frequencies"],
					coefficients=re + 1j * im,
					alpha=obj["alpha"],
					sigma=obj["sigma"],
					mu_r=obj["mu_r"],
					geometry_id=obj["geometry_id"],
					class_id=obj["class_id"],
				)
			)
		except (KeyError, TypeError, ValueError) as e:
			raise ParseError(f"{path}: signature {i}: {e}") from e
	return sigs


def _csv_text(signatures: list[SpectralSignature]) -> str:
	buf = io.StringIO()
	writer = csv.writer(buf, lineterminator="\n")
	if not signatures:
		writer.writerow(CSV_COLUMNS)
	for sig in signatures:
		buf.write(f"# alpha={fmt_float(sig.alpha)}\n")
		buf.write(f"# sigma={fmt_float(sig.sigma)}\n")
		buf.write(f"# mu_r={fmt_float(sig.mu_r)}\n")
		buf.write(f"# geometry_id={sig.geometry_id}\n")
		buf.write(f"# class_id={sig.class_id}\n")
		writer.writerow(CSV_COLUMNS)
		for w, c in zip(sig.frequencies, sig.coefficients, strict=True):
			writer.writerow(
				[fmt_float(w)] + [fmt_float(v) for v in c.real] + [fmt_float(v) for v in c.imag]
			)
	return buf.getvalue()


def _json_text(signatures: list[SpectralSignature]) -> str:
	payload = [
		{
			"alpha": s.alpha,
			"sigma": s.sigma,
			"mu_r": s.mu_r,
			"geometry_id": s.geometry_id,
			"class_id": s.class_id,
			"frequencies": s.frequencies.tolist(),
			"re": s.coefficients.real.tolist(),
			"im": s.coefficients.imag.tolist(),
		}
		for s in signatures
	]
	return json.dumps(payload, indent=1) + "\n"


def write_signatures(signatures, path: str | Path, format: str | None = None) -> None:
	path = Path(path)
	fmt = _infer_format(path, format)
	signatures = list(signatures)
	text = _csv_text(signatures) if fmt == "csv" else _json_text(signatures)
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(text, encoding="utf-8")
	except OSError as e:
		raise IoError(f"Cannot write signature file {path}: {e}") from e
	log.debug("Wrote %d signatures to %s", len(signatures), path)
