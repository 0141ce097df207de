# Labeled feature dictionaries built from class definitions.
#
# build_dictionary walks classes -> geometries -> materials; each (class,
# geometry, material) unit draws V^(k) size/conductivity variations from its
# own RNG stream, scales the base signature straight onto the evaluation
# frequencies, adds noise per sample from a second stream and extracts
# features. Units run on a thread pool and are reassembled by index, so the
# dictionary never depends on the thread count.

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mpt_classify import logger
from mpt_classify.dictionary_builder.features import FEATURE_KINDS, build_features
from mpt_classify.dictionary_builder.noise import add_noise, is_noiseless
from mpt_classify.dictionary_builder.sampling import sample_variations, scale_signature
from mpt_classify.exceptions import (
	ClassTooSmall,
	DimensionMismatch,
	GeometryNotFound,
	IoError,
	LastGeometry,
	ParseError,
	ValidationError,
)
from mpt_classify.signature_source.signature_source import ClassSpec
from mpt_classify.utils import (
	NOISE_STREAM,
	SPLIT_STREAM,
	VARIATION_STREAM,
	Seed,
	derive_rng,
	fmt_float,
	parallel_map,
	seed_key,
	to_jsonable,
)

log = logger("dictionary_builder")

DEFAULT_TEST_FRACTION = 0.25
MIN_CLASS_SAMPLES = 4


@dataclass(frozen=True, eq=False)
class LabeledSample:
	x: np.ndarray
	t: np.ndarray

	def __post_init__(self):
		t = np.asarray(self.t, dtype=float)
		if np.count_nonzero(t) != 1 or t.sum() != 1.0 or t.max() != 1.0:
			raise ValidationError(f"Label must be 1-of-K, got {t}")
		if np.asarray(self.x).size % 6:
			raise ValidationError(f"Feature length must be a multiple of 6, got {np.asarray(self.x).size}")

	@property
	def class_id(self) -> int:
		return int(np.argmax(self.t)) + 1


def one_hot(labels, K: int) -> np.ndarray:
	labels = np.asarray(labels, dtype=int)
	t = np.zeros((labels.size, K))
	t[np.arange(labels.size), labels - 1] = 1.0
	return t


@dataclass(eq=False)
class Dictionary:
	"""
	Labeled samples held column-wise: X is (P, F), labels are 1-based class ids.
	"""

	X: np.ndarray
	labels: np.ndarray
	K: int
	eval_freqs: np.ndarray
	feature_kind: str = "invariants"
	geometry_ids: np.ndarray | None = None
	snr_db: float = math.inf
	meta: dict = field(default_factory=dict)

	def __post_init__(self):
		self.X = np.asarray(self.X, dtype=float)
		if self.X.ndim == 1:
			self.X = self.X.reshape(1, -1)
		self.labels = np.asarray(self.labels, dtype=int).reshape(-1)
		self.eval_freqs = np.asarray(self.eval_freqs, dtype=float).reshape(-1)
		self.K = int(self.K)
		if self.geometry_ids is None:
			self.geometry_ids = np.array([""] * self.labels.size, dtype=object)
		self.geometry_ids = np.asarray(self.geometry_ids, dtype=object).reshape(-1)
		if self.feature_kind not in FEATURE_KINDS:
			raise ValidationError(f"Unknown feature kind {self.feature_kind!r}")
		if self.X.shape[0] != self.labels.size or self.geometry_ids.size != self.labels.size:
			raise DimensionMismatch("X, labels and geometry_ids must have the same length")
		if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.K):
			raise ValidationError(f"Labels must lie in [1, {self.K}]")

	def __len__(self) -> int:
		return int(self.labels.size)

	@property
	def P(self) -> int:
		return len(self)

	@property
	def F(self) -> int:
		return int(self.X.shape[1]) if self.X.ndim == 2 else 0

	@property
	def M(self) -> int:
		return int(self.eval_freqs.size)

	@property
	def T(self) -> np.ndarray:
		return one_hot(self.labels, self.K)

	@property
	def class_counts(self) -> dict[int, int]:
		"""P^(k) for k = 1..K."""
		counts = np.bincount(self.labels, minlength=self.K + 1)[1:]
		return {k + 1: int(c) for k, c in enumerate(counts)}

	@property
	def samples(self) -> list[LabeledSample]:
		T = self.T
		return [LabeledSample(self.X[i], T[i]) for i in range(len(self))]

	def subset(self, index) -> "Dictionary":
		index = np.asarray(index, dtype=int)
		return Dictionary(
			X=self.X[index].reshape(index.size, self.F),
			labels=self.labels[index],
			K=self.K,
			eval_freqs=self.eval_freqs,
			feature_kind=self.feature_kind,
			geometry_ids=self.geometry_ids[index],
			snr_db=self.snr_db,
			meta=dict(self.meta),
		)

	def for_class(self, class_id: int) -> "Dictionary":
		return self.subset(np.flatnonzero(self.labels == class_id))

	def same_layout(self, other: "Dictionary") -> bool:
		return (
			self.K == other.K
			and self.F == other.F
			and self.feature_kind == other.feature_kind
			and np.array_equal(self.eval_freqs, other.eval_freqs)
		)


def concat(parts: list[Dictionary]) -> Dictionary:
	first = parts[0]
	for p in parts[1:]:
		if not first.same_layout(p):
			raise DimensionMismatch("Cannot concatenate dictionaries with different layouts")
	return Dictionary(
		X=np.concatenate([p.X.reshape(len(p), first.F) for p in parts]),
		labels=np.concatenate([p.labels for p in parts]),
		K=first.K,
		eval_freqs=first.eval_freqs,
		feature_kind=first.feature_kind,
		geometry_ids=np.concatenate([p.geometry_ids for p in parts]),
		snr_db=first.snr_db,
		meta=dict(first.meta),
	)


def dictionary_from_arrays(X, labels, K: int | None = None, feature_kind: str = "invariants") -> Dictionary:
	"""Wrap plain arrays (synthetic problems); eval_freqs are placeholders 1..F/6."""
	X = np.asarray(X, dtype=float)
	labels = np.asarray(labels, dtype=int)
	K = int(K if K is not None else labels.max())
	m = max(1, X.shape[1] // 6)
	return Dictionary(X, labels, K, np.arange(1, m + 1, dtype=float), feature_kind)


@dataclass(eq=False)
class SplitDictionary:
	train: Dictionary
	test: Dictionary
	train_index: np.ndarray | None = None
	test_index: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Build
# ---------------------------------------------------------------------------
def _check_specs(specs: list[ClassSpec]) -> int:
	K = len(specs)
	if K < 2:
		raise ValidationError(f"At least 2 classes are required, got {K}")
	ids = sorted(s.class_id for s in specs)
	if ids != list(range(1, K + 1)):
		raise ValidationError(f"Class ids must be 1..{K}, got {ids}")
	return K


def _build_unit(unit) -> tuple[np.ndarray, int, str]:
	spec, g_index, m_index, eval_freqs, snr_db, kind, seed, noise_key = unit
	geometry = spec.geometries[g_index]
	base = geometry.materials[m_index]
	draws = sample_variations(spec, seed_key(seed, VARIATION_STREAM, spec.class_id, g_index, m_index))

	rows = np.empty((len(draws), 6 * len(eval_freqs)))
	for v, (alpha, sigma) in enumerate(draws):
		# draws are relative to the class means, applied to the base material
		alpha_new = base.alpha * alpha / spec.m_alpha
		sigma_new = base.sigma * sigma / spec.m_sigma
		sig = scale_signature(base, alpha_new, sigma_new, frequencies=eval_freqs)
		if not is_noiseless(snr_db):
			sig = add_noise(
				sig, snr_db, seed_key(seed, NOISE_STREAM, noise_key, spec.class_id, g_index, m_index, v)
			)
		rows[v] = build_features(sig, eval_freqs, kind)
	return rows, spec.class_id, geometry.geometry_id


def build_dictionary(
	specs: list[ClassSpec],
	eval_freqs,
	snr_db: float = math.inf,
	kind: str = "invariants",
	rng_seed: Seed = 0,
	threads: int = 1,
	noise_key: int = 0,
) -> Dictionary:
	"""
	Labeled dictionary over every class, geometry and material in ``specs``.

	``noise_key`` separates noise streams of dictionaries that share a seed
	(for example a noiseless training set and a noisy test set).
	"""
	K = _check_specs(specs)
	if kind not in FEATURE_KINDS:
		raise ValidationError(f"Unknown feature kind {kind!r}")
	eval_freqs = np.asarray(eval_freqs, dtype=float)
	if eval_freqs.size < 1 or np.any(np.diff(eval_freqs) <= 0):
		raise ValidationError("Evaluation frequencies must be non-empty and strictly increasing")

	units = [
		(spec, g, m, eval_freqs, snr_db, kind, rng_seed, noise_key)
		for spec in sorted(specs, key=lambda s: s.class_id)
		for g, geom in enumerate(spec.geometries)
		for m in range(len(geom.materials))
	]
	results = parallel_map(_build_unit, units, threads)

	X = np.concatenate([r[0] for r in results])
	labels = np.concatenate([np.full(len(r[0]), r[1]) for r in results])
	geometry_ids = np.concatenate([np.array([r[2]] * len(r[0]), dtype=object) for r in results])

	d = Dictionary(
		X, labels, K, eval_freqs, kind, geometry_ids, snr_db,
		meta={"seed": seed_key(rng_seed), "noise_key": noise_key},
	)
	log.info("Built dictionary: P=%d F=%d counts=%s snr_db=%s", d.P, d.F, d.class_counts, snr_db)
	return d


# ---------------------------------------------------------------------------
# Split
# ---------------------------------------------------------------------------
def split_indices(labels, K: int, test_fraction: float, rng_seed: Seed) -> tuple[np.ndarray, np.ndarray]:
	"""Stratified split; each class gives round-half-up(test_fraction * P^(k)) test rows."""
	if not 0.0 < test_fraction < 1.0:
		raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
	labels = np.asarray(labels)
	train, test = [], []
	for k in range(1, K + 1):
		idx = np.flatnonzero(labels == k)
		if idx.size < MIN_CLASS_SAMPLES:
			raise ClassTooSmall(f"Class {k} has {idx.size} samples; at least {MIN_CLASS_SAMPLES} are needed")
		n_test = int(math.floor(test_fraction * idx.size + 0.5))
		perm = derive_rng(rng_seed, SPLIT_STREAM, k).permutation(idx)
		test.append(perm[:n_test])
		train.append(perm[n_test:])
	return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(
	d: Dictionary,
	test_fraction: float = DEFAULT_TEST_FRACTION,
	rng_seed: Seed = 0,
	test_source: Dictionary | None = None,
) -> SplitDictionary:
	"""
	Stratified train/test split of ``d``.

	With ``test_source`` (a dictionary built with the same seed, typically at a
	different SNR) the test rows are taken from it instead of from ``d``.
	"""
	if test_source is not None:
		if len(test_source) != len(d) or not np.array_equal(test_source.labels, d.labels):
			raise DimensionMismatch("test_source must mirror the training dictionary row for row")
		if not d.same_layout(test_source):
			raise DimensionMismatch("test_source has a different feature layout")
	train_idx, test_idx = split_indices(d.labels, d.K, test_fraction, rng_seed)
	test_from = d if test_source is None else test_source
	return SplitDictionary(d.subset(train_idx), test_from.subset(test_idx), train_idx, test_idx)


def build_loo_dictionary(
	specs: list[ClassSpec],
	held_out: tuple[int, str],
	eval_freqs,
	snr_db: float = math.inf,
	kind: str = "invariants",
	rng_seed: Seed = 0,
	test_snr_db: float | None = None,
	test_fraction: float = DEFAULT_TEST_FRACTION,
	threads: int = 1,
) -> SplitDictionary:
	"""
	Leave-one-geometry-out split.

	The held-out class trains on all samples of its remaining geometries and is
	tested only on the held-out geometry; other classes get the usual
	stratified split.
	"""
	class_id, geometry_id = int(held_out[0]), str(held_out[1])
	spec = next((s for s in specs if s.class_id == class_id), None)
	if spec is None or spec.geometry(geometry_id) is None:
		raise GeometryNotFound(f"No geometry {geometry_id!r} in class {class_id}")
	if len(spec.geometries) < 2:
		raise LastGeometry(f"Class {class_id} has a single geometry; it cannot be held out")

	full = build_dictionary(specs, eval_freqs, snr_db, kind, rng_seed, threads)
	if test_snr_db is None or test_snr_db == snr_db:
		full_test = full
	else:
		full_test = build_dictionary(specs, eval_freqs, test_snr_db, kind, rng_seed, threads, noise_key=1)

	held = (full.labels == class_id) & (full.geometry_ids == geometry_id)
	kept = np.flatnonzero(~held)
	reduced = full.subset(kept)
	train_idx, test_idx = split_indices(reduced.labels, reduced.K, test_fraction, rng_seed)

	# the held-out class keeps every remaining-geometry sample for training
	own = reduced.labels[test_idx] == class_id
	train_rows = np.sort(np.concatenate([kept[train_idx], kept[test_idx[own]]]))
	test_rows = np.concatenate([kept[test_idx[~own]], np.flatnonzero(held)])
	test_rows = np.sort(test_rows)

	return SplitDictionary(full.subset(train_rows), full_test.subset(test_rows), train_rows, test_rows)


def samples_per_geometry(spec: ClassSpec, samples_per_class: int) -> int:
	"""V^(k) giving about ``samples_per_class`` samples for this class's composition."""
	units = sum(len(g.materials) for g in spec.geometries)
	return max(1, int(math.floor(samples_per_class / units + 0.5)))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------
def write_dictionary(d: Dictionary, path: str | Path, extra: dict | None = None) -> list[Path]:
	"""CSV ``class_id, t_1..t_K, x_1..x_F`` plus a JSON sidecar; returns both paths."""
	path = Path(path)
	sidecar = path.with_suffix(".json")
	buf = io.StringIO()
	writer = csv.writer(buf, lineterminator="\n")
	writer.writerow(["class_id"] + [f"t_{k}" for k in range(1, d.K + 1)] + [f"x_{f}" for f in range(1, d.F + 1)])
	T = d.T
	for i in range(len(d)):
		writer.writerow(
			[str(d.labels[i])] + [str(int(v)) for v in T[i]] + [fmt_float(v) for v in d.X[i]]
		)
	meta = {
		"K": d.K,
		"F": d.F,
		"P": d.P,
		"class_counts": d.class_counts,
		"eval_freqs_radps": d.eval_freqs,
		"feature_kind": d.feature_kind,
		"snr_db": d.snr_db,
		"geometry_ids": list(d.geometry_ids),
		**d.meta,
		**(extra or {}),
	}
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(buf.getvalue(), encoding="utf-8")
		sidecar.write_text(json.dumps(to_jsonable(meta), indent=1, sort_keys=True) + "\n", encoding="utf-8")
	except OSError as e:
		raise IoError(f"Cannot write dictionary {path}: {e}") from e
	return [path, sidecar]


def read_dictionary(path: str | Path) -> Dictionary:
	path = Path(path)
	try:
		meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
		lines = path.read_text(encoding="utf-8").splitlines()
	except OSError as e:
		raise IoError(f"Cannot read dictionary {path}: {e}") from e
	except json.JSONDecodeError as e:
		raise ParseError(f"{path}: bad sidecar: {e}") from e

	K, F = int(meta["K"]), int(meta["F"])
	rows = list(csv.reader(lines[1:]))
	try:
		labels = np.array([int(r[0]) for r in rows], dtype=int)
		X = np.array([[float(v) for v in r[1 + K:]] for r in rows], dtype=float).reshape(len(rows), F)
	except (ValueError, IndexError) as e:
		raise ParseError(f"{path}: {e}") from e
	snr = meta.get("snr_db", "inf")
	return Dictionary(
		X=X,
		labels=labels,
		K=K,
		eval_freqs=meta["eval_freqs_radps"],
		feature_kind=meta["feature_kind"],
		geometry_ids=np.array(meta.get("geometry_ids", [""] * len(rows)), dtype=object),
		snr_db=float(snr),
		meta={k: meta[k] for k in ("seed", "noise_key") if k in meta},
	)
