# Experiment configuration.
#
# Values resolve with precedence: explicit override (CLI flag) -> experiment
# config file (TOML) -> built-in default. Each logical key may be read from
# several dotted paths in the file; empty strings and None fall through.

import dataclasses
import hashlib
import json
import math
try:
	import tomllib
except ModuleNotFoundError:  # Python < 3.11
	import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mpt_classify import hooks, logger
from mpt_classify.dictionary_builder.dictionary_builder import DEFAULT_TEST_FRACTION, samples_per_geometry
from mpt_classify.dictionary_builder.features import FEATURE_KINDS
from mpt_classify.dictionary_builder.sampling import REGIME_LADDER
from mpt_classify.exceptions import ConfigError, MptClassifyError
from mpt_classify.signature_source.signature_source import (
	WALKTHROUGH_WINDOW_RADPS,
	ClassSpec,
	GeometrySpec,
	linear_frequency_grid,
	load_signatures,
	log_frequency_grid,
	sphere_signature,
)
from mpt_classify.utils import to_jsonable

log = logger("config")

# Aliases: read any of these dotted paths for the given logical key
_CONF_ALIASES = {
	"seed": ["experiment.seed", "seed"],
	"out_dir": ["experiment.out_dir", "experiment.out"],
	"threads": ["experiment.threads"],
	"feature_kind": ["features.kind", "features.feature_kind"],
	"freq_min_radps": ["features.freq_min_radps"],
	"freq_max_radps": ["features.freq_max_radps"],
	"freq_count": ["features.freq_count", "features.M"],
	"spacing": ["features.spacing"],
	"train_snr_db": ["noise.train_snr_db", "noise.snr_db"],
	"test_snr_db": ["noise.test_snr_db", "noise.snr_db"],
	"samples_per_class": ["dictionary.samples_per_class", "dictionary.P"],
	"test_fraction": ["dictionary.test_fraction"],
	"mccv_iterations": ["mccv.iterations", "mccv.l"],
	"methods": ["methods"],
	"sweep_axes": ["sweep.axes"],
	"sweep_method": ["sweep.method"],
	"loo_held_out": ["loo.held_out"],
	"loo_regimes": ["loo.regimes"],
	"noise_check_snr_db": ["noise_check.snr_db"],
	"problem": ["problem.builtin", "problem"],
}

DEFAULTS = {
	"out_dir": "out",
	"threads": 1,
	"feature_kind": "invariants",
	"freq_min_radps": WALKTHROUGH_WINDOW_RADPS[0],
	"freq_max_radps": WALKTHROUGH_WINDOW_RADPS[1],
	"freq_count": 10,
	"spacing": "linear",
	"train_snr_db": math.inf,
	"test_snr_db": None,  # same as train
	"samples_per_class": [200],
	"test_fraction": DEFAULT_TEST_FRACTION,
	"mccv_iterations": 20,
	"methods": {"logistic": {}, "gboost": {}},
	"sweep_axes": {"freq_count": [1, 2, 5, 10], "train_snr_db": [10.0, 20.0, 40.0]},
	"sweep_method": None,  # first configured method
	"loo_held_out": None,  # every geometry of every multi-geometry class
	"loo_regimes": {name: list(v) for name, v in REGIME_LADDER.items()},
	"noise_check_snr_db": [40.0, 20.0, 10.0],
	"problem": "spheres",
}

SWEEP_AXES = ("freq_count", "train_snr_db", "test_snr_db", "samples_per_class", "feature_kind")
BUILTIN_PROBLEMS = ("spheres", "loo")

# keys that never change an output file
_UNHASHED_OVERRIDES = ("out_dir", "threads")


def _blank(value) -> bool:
	if isinstance(value, str):
		return value.strip() == ""
	return value is None


def _lookup(data: dict, dotted: str):
	node = data
	for part in dotted.split("."):
		if not isinstance(node, dict) or part not in node:
			return None
		node = node[part]
	return node


class Settings:
	"""Layered key resolver over CLI overrides and one parsed config file."""

	def __init__(self, data: dict | None = None, overrides: dict | None = None):
		self.data = data or {}
		self.overrides = {k: v for k, v in (overrides or {}).items() if not _blank(v)}

	def from_file(self, key: str):
		for path in _CONF_ALIASES.get(key, [key]):
			val = _lookup(self.data, path)
			if isinstance(val, str):
				val = val.strip()
			if not _blank(val):
				return val
		return None

	def conf(self, key: str, default=None):
		"""Resolve ``key``: override -> config file -> ``default`` -> DEFAULTS."""
		if key in self.overrides:
			return self.overrides[key]
		val = self.from_file(key)
		if not _blank(val):
			return val
		return default if default is not None else DEFAULTS.get(key)


def parse_snr(value) -> float:
	"""dB value; None, "inf" and "noiseless" mean no noise."""
	if _blank(value):
		return math.inf
	if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "noiseless", "none"):
		return math.inf
	try:
		return float(value)
	except (TypeError, ValueError):
		raise ConfigError(f"Bad SNR value {value!r}")


# ---------------------------------------------------------------------------
# Classes
# ---------------------------------------------------------------------------
def _material(entry: dict, base_dir: Path, class_id: int, geometry_id: str, grid) -> list:
	if "sphere" in entry:
		s = entry["sphere"]
		try:
			return [
				sphere_signature(
					float(s["alpha_m"]), float(s["sigma_spm"]), float(s.get("mu_r", 1.0)),
					frequencies=grid, geometry_id=geometry_id, class_id=class_id,
				)
			]
		except KeyError as e:
			raise ConfigError(f"Class {class_id} geometry {geometry_id!r}: sphere needs {e.args[0]}")
	if "file" in entry:
		path = Path(entry["file"])
		if not path.is_absolute():
			path = base_dir / path
		if not path.exists():
			raise ConfigError(f"Class {class_id} geometry {geometry_id!r}: signature file {path} not found")
		return load_signatures(path)
	raise ConfigError(f"Class {class_id} geometry {geometry_id!r} needs a sphere or a file")


def parse_classes(entries: list[dict], base_dir: Path, grid) -> list[ClassSpec]:
	specs = []
	for entry in entries:
		try:
			class_id = int(entry["class_id"])
			geometries = []
			for g in entry.get("geometries", []):
				gid = str(g["geometry_id"])
				materials = []
				for m in g.get("materials", [g]):
					materials.extend(_material(m, base_dir, class_id, gid, grid))
				geometries.append(GeometrySpec(gid, materials))
			specs.append(
				ClassSpec(
					class_id=class_id,
					geometries=geometries,
					m_alpha=float(entry["m_alpha_m"]),
					s_alpha=float(entry["s_alpha_m"]),
					m_sigma=float(entry["m_sigma_spm"]),
					s_sigma=float(entry["s_sigma_spm"]),
					v_count=int(entry.get("v_count", 1)),
					name=str(entry.get("name", "")),
				)
			)
		except KeyError as e:
			raise ConfigError(f"Class entry {entry.get('class_id', '?')} is missing {e.args[0]}")
		except ConfigError:
			raise
		except MptClassifyError as e:
			raise ConfigError(str(e)) from e
	return specs


# ---------------------------------------------------------------------------
# Experiment config
# ---------------------------------------------------------------------------
@dataclass
class ExperimentConfig:
	seed: int
	classes: list[ClassSpec]
	out_dir: Path = Path("out")
	threads: int = 1
	feature_kind: str = "invariants"
	freq_min_radps: float = WALKTHROUGH_WINDOW_RADPS[0]
	freq_max_radps: float = WALKTHROUGH_WINDOW_RADPS[1]
	freq_count: int = 10
	spacing: str = "linear"
	train_snr_db: float = math.inf
	test_snr_db: float = math.inf
	samples_per_class: list[int] = field(default_factory=lambda: [200])
	test_fraction: float = DEFAULT_TEST_FRACTION
	mccv_iterations: int = 20
	methods: dict[str, dict] = field(default_factory=lambda: {"logistic": {}})
	sweep_axes: dict[str, list] = field(default_factory=dict)
	sweep_method: str = "logistic"
	loo_held_out: list[tuple[int, str]] = field(default_factory=list)
	loo_regimes: dict[str, tuple[float, float]] = field(default_factory=dict)
	noise_check_snr_db: list[float] = field(default_factory=lambda: [40.0, 20.0, 10.0])
	problem: str = "spheres"
	config_sha256: str = ""
	source: Path | None = None

	@property
	def eval_freqs(self) -> np.ndarray:
		grid = log_frequency_grid if self.spacing == "log" else linear_frequency_grid
		return grid(self.freq_min_radps, self.freq_max_radps, self.freq_count)

	def class_specs(self, samples_per_class: int | None = None) -> list[ClassSpec]:
		"""Class specs with V^(k) set so each class gives about ``samples_per_class`` samples."""
		P = self.samples_per_class[0] if samples_per_class is None else samples_per_class
		return [dataclasses.replace(s, v_count=samples_per_geometry(s, P)) for s in self.classes]

	def with_changes(self, **changes) -> "ExperimentConfig":
		return dataclasses.replace(self, **changes)

	def validate(self):
		if len(self.classes) < 2:
			raise ConfigError(f"At least 2 classes are required, got {len(self.classes)}")
		if self.feature_kind not in FEATURE_KINDS:
			raise ConfigError(f"Unknown feature kind {self.feature_kind!r}")
		if self.spacing not in ("linear", "log"):
			raise ConfigError(f"Unknown frequency spacing {self.spacing!r}")
		if self.freq_count < 1 or not 0 < self.freq_min_radps <= self.freq_max_radps:
			raise ConfigError("Frequency range must be positive with freq_count >= 1")
		if self.freq_count > 1 and self.freq_min_radps == self.freq_max_radps:
			raise ConfigError("freq_min_radps == freq_max_radps needs freq_count = 1")
		if not self.samples_per_class or min(self.samples_per_class) < 1:
			raise ConfigError("samples_per_class must list positive counts")
		if not 0.0 < self.test_fraction < 1.0:
			raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
		if self.mccv_iterations < 1:
			raise ConfigError("mccv.iterations must be >= 1")
		if self.threads < 1:
			raise ConfigError("threads must be >= 1")
		if not self.methods:
			raise ConfigError("At least one method is required")
		for method in [*self.methods, self.sweep_method]:
			if method not in hooks.classifier_methods:
				raise ConfigError(f"Unknown method {method!r}; known: {', '.join(hooks.classifier_methods)}")
		for axis in self.sweep_axes:
			if axis not in SWEEP_AXES and not axis.startswith("hp."):
				raise ConfigError(f"Unknown sweep axis {axis!r}")
		for axis, values in self.sweep_axes.items():
			if not values:
				raise ConfigError(f"Sweep axis {axis!r} is empty")
		self._validate_hyperparams()

	def _validate_hyperparams(self):
		from mpt_classify.classifiers.classifiers import make_model

		for method, hp in self.methods.items():
			try:
				make_model(method, hp)
			except MptClassifyError as e:
				raise ConfigError(f"[methods.{method}]: {e}") from e


def _config_hash(data: dict, overrides: dict) -> str:
	hashed = {k: v for k, v in overrides.items() if k not in _UNHASHED_OVERRIDES}
	text = json.dumps(to_jsonable({"file": data, "overrides": hashed}), sort_keys=True, separators=(",", ":"))
	return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _int_list(value, key: str) -> list[int]:
	values = value if isinstance(value, list) else [value]
	try:
		return [int(v) for v in values]
	except (TypeError, ValueError):
		raise ConfigError(f"{key} must be integers, got {value!r}")


def _held_out(value) -> list[tuple[int, str]]:
	if value is None:
		return []
	try:
		return [(int(h["class_id"]), str(h["geometry_id"])) for h in value]
	except (KeyError, TypeError, ValueError):
		raise ConfigError(f"loo.held_out entries need class_id and geometry_id, got {value!r}")


def _builtin_classes(problem: str, regime: str = "control") -> list[ClassSpec]:
	from mpt_classify.experiments.problems import default_loo_classes, default_sphere_classes

	if problem == "spheres":
		return default_sphere_classes(regime=regime)
	if problem == "loo":
		return default_loo_classes(regime=regime)
	raise ConfigError(f"Unknown built-in problem {problem!r}; known: {', '.join(BUILTIN_PROBLEMS)}")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
	"""
	Parse and validate an experiment config.

	``path`` may be None: the built-in sphere problem is used and the seed must
	come from ``overrides``.
	"""
	data, base_dir, source = {}, Path.cwd(), None
	if path is not None:
		source = Path(path)
		try:
			data = tomllib.loads(source.read_text(encoding="utf-8"))
		except FileNotFoundError:
			raise ConfigError(f"Config file {source} not found")
		except tomllib.TOMLDecodeError as e:
			raise ConfigError(f"{source}: {e}") from e
		base_dir = source.parent

	settings = Settings(data, overrides)
	seed = settings.conf("seed")
	if _blank(seed):
		raise ConfigError("A seed is required ([experiment] seed or --seed)")

	problem = str(settings.conf("problem"))
	if "classes" in data:
		# eval frequencies are not known yet; base signatures keep their own grid
		from mpt_classify.experiments.problems import base_grid

		classes = parse_classes(data["classes"], base_dir, base_grid())
	else:
		classes = _builtin_classes(problem)
		log.info("No [[classes]] in config; using the built-in %r problem", problem)

	methods = settings.conf("methods")
	if not isinstance(methods, dict):
		methods = {str(m): {} for m in (methods if isinstance(methods, list) else [methods])}
	methods = {str(m): dict(hp or {}) for m, hp in methods.items()}

	train_snr = parse_snr(settings.conf("train_snr_db"))
	test_snr = settings.conf("test_snr_db")
	regimes = settings.conf("loo_regimes")

	try:
		cfg = ExperimentConfig(
			seed=int(seed),
			classes=classes,
			out_dir=Path(settings.conf("out_dir")),
			threads=int(settings.conf("threads")),
			feature_kind=str(settings.conf("feature_kind")),
			freq_min_radps=float(settings.conf("freq_min_radps")),
			freq_max_radps=float(settings.conf("freq_max_radps")),
			freq_count=int(settings.conf("freq_count")),
			spacing=str(settings.conf("spacing")),
			train_snr_db=train_snr,
			test_snr_db=train_snr if _blank(test_snr) else parse_snr(test_snr),
			samples_per_class=_int_list(settings.conf("samples_per_class"), "samples_per_class"),
			test_fraction=float(settings.conf("test_fraction")),
			mccv_iterations=int(settings.conf("mccv_iterations")),
			methods=methods,
			sweep_axes=dict(settings.conf("sweep_axes")),
			sweep_method=str(settings.conf("sweep_method", next(iter(methods), "logistic"))),
			loo_held_out=_held_out(settings.conf("loo_held_out")),
			loo_regimes={str(k): (float(v[0]), float(v[1])) for k, v in regimes.items()},
			noise_check_snr_db=[parse_snr(v) for v in settings.conf("noise_check_snr_db")],
			problem=problem,
			config_sha256=_config_hash(data, settings.overrides),
			source=source,
		)
	except (TypeError, ValueError) as e:
		raise ConfigError(f"Bad config value: {e}") from e

	cfg.validate()
	return cfg
