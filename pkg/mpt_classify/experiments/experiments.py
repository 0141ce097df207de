# Experiment harness behind the CLI verbs.
#
# Every verb takes (config, args), writes its outputs under <out>/<verb>/ and
# finishes with a manifest.json listing each file with its sha256, the config
# hash, the seed, a status and counts. Grid cells are isolated: a failing cell
# is logged and counted, the rest of the grid still runs. Nothing in an output
# file depends on wall-clock time or on the thread count.

import itertools
import json
import threading
import traceback
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mpt_classify import __version__, log_error, logger
from mpt_classify.classifiers.classifiers import train
from mpt_classify.classifiers.serialization import load_model, save_model
from mpt_classify.config import SWEEP_AXES, ExperimentConfig, parse_snr
from mpt_classify.dictionary_builder.dictionary_builder import (
	Dictionary,
	build_dictionary,
	build_loo_dictionary,
	split,
	write_dictionary,
)
from mpt_classify.dictionary_builder.noise import noise_ratio_statistics
from mpt_classify.dictionary_builder.sampling import regime_specs
from mpt_classify.evaluation.metrics import accuracy, confusion_matrix, kappa, random_accuracy
from mpt_classify.evaluation.uncertainty import UncertaintySummary, percentile_table, uncertainty_by_class
from mpt_classify.evaluation.validation import kappa_summary, mccv
from mpt_classify.exceptions import ConfigError, DimensionMismatch, IoError, MptClassifyError
from mpt_classify.report import column, export, run_report, write_csv
from mpt_classify.utils import NOISE_STREAM, parallel_map, seed_key, sha256_file, to_jsonable

log = logger("experiments")

MANIFEST = "manifest.json"
DEFAULT_NOISE_DRAWS = 10_000


def _arg(args, name: str, default=None):
	value = getattr(args, name, None) if args is not None else None
	return default if value in (None, [], "") else value


def _write_json(path: Path, payload: dict) -> Path:
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(json.dumps(to_jsonable(payload), indent=1, sort_keys=True) + "\n", encoding="utf-8")
	except OSError as e:
		raise IoError(f"Cannot write {path}: {e}") from e
	return path


# ---------------------------------------------------------------------------
# Run log + manifest
# ---------------------------------------------------------------------------
@dataclass
class RunLog:
	verb: str
	cfg: ExperimentConfig
	files: list[Path] = field(default_factory=list)
	counts: dict = field(default_factory=lambda: {"cells": 0, "succeeded": 0, "failed": 0})
	errors: list[dict] = field(default_factory=list)
	_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

	@property
	def out_dir(self) -> Path:
		return Path(self.cfg.out_dir) / self.verb.replace("-", "_")

	@property
	def status(self) -> str:
		if self.counts["failed"] == 0:
			return "Success"
		return "Partial" if self.counts["succeeded"] else "Failed"

	def add(self, *paths) -> None:
		for p in paths:
			if isinstance(p, list | tuple):
				self.files.extend(Path(x) for x in p)
			else:
				self.files.append(Path(p))

	def cell(self, label: str, fn: Callable):
		"""Run one grid cell; library errors are logged and counted instead of aborting the run."""
		try:
			result = fn()
		except MptClassifyError as e:
			log_error(traceback.format_exc(), f"{self.verb} cell [{label}] failed: {e}")
			with self._lock:
				self.counts["cells"] += 1
				self.counts["failed"] += 1
				self.errors.append({"cell": label, "error": f"{type(e).__name__}: {e}"})
			return None
		with self._lock:
			self.counts["cells"] += 1
			self.counts["succeeded"] += 1
		return result

	def finish(self) -> "RunLog":
		files = sorted(set(self.files))
		manifest = {
			"verb": self.verb,
			"version": __version__,
			"status": self.status,
			"seed": self.cfg.seed,
			"config_sha256": self.cfg.config_sha256,
			"counts": self.counts,
			"errors": sorted(self.errors, key=lambda e: e["cell"]),
			"files": [
				{"path": p.relative_to(self.out_dir).as_posix(), "sha256": sha256_file(p)} for p in files
			],
		}
		_write_json(self.out_dir / MANIFEST, manifest)
		log.info("%s: %s, %d files written to %s", self.verb, self.status, len(files), self.out_dir)
		return self


# ---------------------------------------------------------------------------
# Shared steps
# ---------------------------------------------------------------------------
def build_pair(
	cfg: ExperimentConfig, samples_per_class: int, threads: int | None = None
) -> tuple[Dictionary, Dictionary | None]:
	"""Training dictionary plus, when the test SNR differs, its mirror built at the test SNR."""
	specs = cfg.class_specs(samples_per_class)
	threads = cfg.threads if threads is None else threads
	common = dict(kind=cfg.feature_kind, rng_seed=cfg.seed, threads=threads)
	d = build_dictionary(specs, cfg.eval_freqs, cfg.train_snr_db, **common)
	if cfg.test_snr_db == cfg.train_snr_db:
		return d, None
	return d, build_dictionary(specs, cfg.eval_freqs, cfg.test_snr_db, noise_key=1, **common)


def _method(cfg: ExperimentConfig, args) -> tuple[str, dict]:
	method = _arg(args, "method", next(iter(cfg.methods)))
	if method not in cfg.methods:
		log.info("Method %s has no [methods] section; using defaults", method)
	return method, dict(cfg.methods.get(method, {}))


def _train_split(cfg: ExperimentConfig, args):
	P = int(_arg(args, "samples_per_class", cfg.samples_per_class[0]))
	d, d_test = build_pair(cfg, P)
	return P, split(d, cfg.test_fraction, cfg.seed, d_test)


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------
def run_build(cfg: ExperimentConfig, args=None) -> RunLog:
	"""One dictionary (plus a test-SNR mirror if needed) per P^(k) in the schedule."""
	run = RunLog("build", cfg)
	extra = {"config_sha256": cfg.config_sha256}
	for P in cfg.samples_per_class:
		d, d_test = build_pair(cfg, P)
		for k, n in d.class_counts.items():
			log.info("P=%d class %d: %d samples", P, k, n)
		run.add(write_dictionary(d, run.out_dir / f"dictionary_P{P}.csv", {**extra, "samples_per_class": P}))
		if d_test is not None:
			run.add(
				write_dictionary(d_test, run.out_dir / f"dictionary_P{P}_test.csv", {**extra, "samples_per_class": P})
			)
		run.counts["cells"] += 1
		run.counts["succeeded"] += 1
	return run.finish()


# ---------------------------------------------------------------------------
# train / evaluate
# ---------------------------------------------------------------------------
def run_train(cfg: ExperimentConfig, args=None) -> RunLog:
	run = RunLog("train", cfg)
	method, hyperparams = _method(cfg, args)
	P, s = _train_split(cfg, args)
	model = train(method, hyperparams, s.train, cfg.seed)
	if not model.converged:
		log.warning("%s did not converge (final loss %s)", method, model.final_loss)
	run.add(save_model(model, run.out_dir / f"model_{method}.json"))
	run.add(
		_write_json(
			run.out_dir / f"split_P{P}.json",
			{"samples_per_class": P, "train": s.train_index, "test": s.test_index},
		)
	)
	run.counts.update(cells=1, succeeded=1)
	return run.finish()


def run_evaluate(cfg: ExperimentConfig, args=None) -> RunLog:
	"""Evaluate a saved model on the test split the train verb held back."""
	run = RunLog("evaluate", cfg)
	method, _ = _method(cfg, args)
	model_path = Path(_arg(args, "model", Path(cfg.out_dir) / "train" / f"model_{method}.json"))
	model = load_model(model_path)
	_, s = _train_split(cfg, args)
	if model.F != s.test.F or model.K != s.test.K:
		raise DimensionMismatch(
			f"Model expects K={model.K}, F={model.F}; dictionary has K={s.test.K}, F={s.test.F}"
		)

	c = confusion_matrix(model, s.test)
	run.add(export("confusion_matrix", {"confusion": c}, run.out_dir / "confusion_matrix.csv"))
	run.add(
		export("confusion_matrix", {"confusion": c, "normalize": "row"}, run.out_dir / "confusion_matrix_row.csv")
	)
	run.add(export("class_metrics", {"confusion": c}, run.out_dir / "class_metrics.csv"))

	if not model.probabilistic:
		log.warning("%s outputs vote frequencies; posterior summaries are not probabilities", model.method)
	summaries = uncertainty_by_class(model, s.test, allow_non_probabilistic=True)
	gammas = {k: model.predict_proba_batch(s.test.for_class(k).X) for k in summaries}
	run.add(
		export(
			"uncertainty_summary",
			{"summaries": summaries, "gammas": gammas},
			run.out_dir / "uncertainty_summary.csv",
		)
	)
	run.add(
		_write_json(
			run.out_dir / "evaluation.json",
			{
				"method": model.method,
				"probabilistic": model.probabilistic,
				"n_test": c.total,
				"accuracy": accuracy(c),
				"random_accuracy": random_accuracy(c),
				"kappa": kappa(c),
			},
		)
	)
	run.counts.update(cells=1, succeeded=1)
	return run.finish()


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------
ITERATION_COLUMNS = [
	column("Method", "method", "Data", 90),
	column("Samples per Class", "samples_per_class", "Int"),
	column("Iteration", "iteration", "Int", 80),
	column("Kappa", "kappa"),
	column("Converged", "converged", "Int", 80),
]


def run_compare(cfg: ExperimentConfig, args=None) -> RunLog:
	"""kappa across MCCV iterations for every method and every P^(k)."""
	run = RunLog("compare", cfg)
	pairs = {P: build_pair(cfg, P) for P in cfg.samples_per_class}
	rows, iterations = [], []
	for method, hyperparams in cfg.methods.items():
		for P, (d, d_test) in pairs.items():
			report = run.cell(
				f"{method} P={P}",
				lambda method=method, hyperparams=hyperparams, d=d, d_test=d_test: mccv(
					method, hyperparams, d, cfg.mccv_iterations, cfg.test_fraction, cfg.seed, d_test, cfg.threads
				),
			)
			if report is None:
				continue
			rows.append(
				{
					"method": method,
					"samples_per_class": P,
					"train_snr_db": cfg.train_snr_db,
					"test_snr_db": cfg.test_snr_db,
					"report": report,
				}
			)
			iterations += [
				{"method": method, "samples_per_class": P, "iteration": it.index, "kappa": it.kappa,
				 "converged": int(it.converged)}
				for it in report.iterations
			]
	run.add(export("kappa_table", {"rows": rows}, run.out_dir / "kappa_table.csv"))
	run.add(write_csv(run.out_dir / "mccv_iterations.csv", ITERATION_COLUMNS, iterations))
	full = [
		{
			"method": row["method"],
			"hyperparams": row["report"].hyperparams,
			"samples_per_class": row["samples_per_class"],
			"train_snr_db": row["train_snr_db"],
			"test_snr_db": row["test_snr_db"],
			"kappa": row["report"].kappa_summary.as_dict(),
			"pooled_confusion": row["report"].pooled_confusion.counts,
		}
		for row in rows
	]
	run.add(_write_json(run.out_dir / "compare.json", {"cells": full}))
	return run.finish()


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------
def parse_axis(text: str) -> tuple[str, list]:
	"""``name=v1,v2,...`` from the command line; numbers are parsed, the rest kept as text."""
	name, sep, values = text.partition("=")
	if not sep or not values:
		raise ConfigError(f"Sweep axis must look like name=v1,v2, got {text!r}")

	def value(v):
		v = v.strip()
		for cast in (int, float):
			try:
				return cast(v)
			except ValueError:
				pass
		return v

	return name.strip(), [value(v) for v in values.split(",")]


def cell_config(cfg: ExperimentConfig, values: dict) -> tuple[ExperimentConfig, dict]:
	"""Config and sweep-method hyperparameters for one grid cell."""
	changes = {}
	hyperparams = dict(cfg.methods.get(cfg.sweep_method, {}))
	for axis, v in values.items():
		if axis.startswith("hp."):
			hyperparams[axis[3:]] = v
		elif axis == "freq_count":
			changes["freq_count"] = int(v)
		elif axis == "train_snr_db":
			changes["train_snr_db"] = parse_snr(v)
			# test noise follows training noise unless it is swept itself
			if "test_snr_db" not in values:
				changes["test_snr_db"] = changes["train_snr_db"]
		elif axis == "test_snr_db":
			changes["test_snr_db"] = parse_snr(v)
		elif axis == "samples_per_class":
			changes["samples_per_class"] = [int(v)]
		elif axis == "feature_kind":
			changes["feature_kind"] = str(v)
		else:
			raise ConfigError(f"Unknown sweep axis {axis!r}; known: {', '.join(SWEEP_AXES)} or hp.<name>")
	cell_cfg = cfg.with_changes(**changes)
	cell_cfg.validate()
	return cell_cfg, hyperparams


def run_sweep(cfg: ExperimentConfig, args=None) -> RunLog:
	"""Full-factorial grid over the configured axes, one MCCV run per cell."""
	run = RunLog("sweep", cfg)
	axes = dict(parse_axis(a) for a in _arg(args, "axis", [])) or dict(cfg.sweep_axes)
	if not axes:
		raise ConfigError("Sweep needs at least one axis")
	names = list(axes)
	grid = [dict(zip(names, combo, strict=True)) for combo in itertools.product(*(axes[n] for n in names))]
	log.info("Sweep over %s: %d cells", ", ".join(names), len(grid))

	def one(values):
		cell_cfg, hyperparams = cell_config(cfg, values)
		d, d_test = build_pair(cell_cfg, cell_cfg.samples_per_class[0], threads=1)
		report = mccv(
			cfg.sweep_method, hyperparams, d, cfg.mccv_iterations, cfg.test_fraction, cfg.seed, d_test, 1
		)
		log.info("cell %s: kappa median %.4f", values, report.kappa_summary.median)
		return report

	def guarded(values):
		label = " ".join(f"{k}={v}" for k, v in values.items())
		return run.cell(label, lambda: one(values))

	reports = parallel_map(guarded, grid, cfg.threads)
	cells = [{"values": v, "report": r} for v, r in zip(grid, reports, strict=True) if r is not None]
	run.add(export("sweep_grid", {"axes": names, "cells": cells}, run.out_dir / "sweep_grid.csv"))
	return run.finish()


# ---------------------------------------------------------------------------
# loo
# ---------------------------------------------------------------------------
@dataclass
class LooResult:
	kappas: list[float]
	summary: UncertaintySummary
	gamma: np.ndarray
	probabilistic: bool
	leaked_rows: int


def held_out_geometries(cfg: ExperimentConfig, specs) -> list[tuple[int, str]]:
	if cfg.loo_held_out:
		return list(cfg.loo_held_out)
	held = [(s.class_id, g) for s in specs if len(s.geometries) > 1 for g in s.geometry_ids]
	if not held:
		raise ConfigError("No class has a second geometry; nothing can be held out")
	return held


def leave_one_out(
	cfg: ExperimentConfig, specs, held: tuple[int, str], method: str, hyperparams: dict, threads: int = 1
) -> LooResult:
	"""
	``mccv_iterations`` leave-one-geometry-out rounds; round i rebuilds the
	dictionary and trains with seed (seed, i). Posteriors of every held-out
	test sample are pooled into one summary.
	"""
	class_id = held[0]

	def one(i):
		seed = seed_key(cfg.seed, i)
		s = build_loo_dictionary(
			specs, held, cfg.eval_freqs, cfg.train_snr_db, cfg.feature_kind, seed,
			test_snr_db=cfg.test_snr_db, test_fraction=cfg.test_fraction,
		)
		model = train(method, hyperparams, s.train, seed)
		gamma = model.predict_proba_batch(s.test.for_class(class_id).X)
		leaked = int(np.sum((s.train.labels == class_id) & (s.train.geometry_ids == held[1])))
		return kappa(confusion_matrix(model, s.test)), gamma, model.probabilistic, leaked

	results = parallel_map(one, range(cfg.mccv_iterations), threads)
	gamma = np.concatenate([r[1] for r in results])
	return LooResult(
		kappas=[r[0] for r in results],
		summary=UncertaintySummary(class_id, gamma.shape[0], percentile_table(gamma)),
		gamma=gamma,
		probabilistic=results[0][2],
		leaked_rows=sum(r[3] for r in results),
	)


def run_loo(cfg: ExperimentConfig, args=None) -> RunLog:
	"""Held-out geometry studies over the variation-width regimes."""
	run = RunLog("loo", cfg)
	method, hyperparams = _method(cfg, args)
	P = int(_arg(args, "samples_per_class", cfg.samples_per_class[0]))
	base = cfg.class_specs(P)
	held_list = held_out_geometries(cfg, base)
	wanted = _arg(args, "regime", list(cfg.loo_regimes))
	unknown = [r for r in wanted if r not in cfg.loo_regimes]
	if unknown:
		raise ConfigError(f"Unknown LOO regime(s) {unknown}; configured: {list(cfg.loo_regimes)}")

	rows, posteriors, columns = [], [], []
	for regime in wanted:
		a_rel, s_rel = cfg.loo_regimes[regime]
		specs = regime_specs(base, a_rel, s_rel)
		for held in held_list:
			result = run.cell(
				f"{regime} class={held[0]} geometry={held[1]}",
				lambda specs=specs, held=held: leave_one_out(cfg, specs, held, method, hyperparams, cfg.threads),
			)
			if result is None:
				continue
			rows.append(
				{
					"regime": regime,
					"s_alpha_rel": a_rel,
					"s_sigma_rel": s_rel,
					"class_id": held[0],
					"geometry_id": held[1],
					"method": method,
					"iterations": len(result.kappas),
					"kappa_summary": kappa_summary(result.kappas),
					"summary": result.summary,
					"probabilistic": result.probabilistic,
				}
			)
			prefix = {"regime": regime, "class_id": held[0], "geometry_id": held[1]}
			columns, data = run_report(
				"uncertainty_summary",
				{"summaries": {held[0]: result.summary}, "gammas": {held[0]: result.gamma}, "prefix": prefix},
			)
			posteriors += data
			log.info(
				"LOO %s %s: kappa median %.4f, true-class median posterior %.4f",
				regime, held, rows[-1]["kappa_summary"].median, result.summary.median[held[0] - 1],
			)

	run.add(export("loo_summary", {"rows": rows}, run.out_dir / "loo_summary.csv"))
	if posteriors:
		run.add(write_csv(run.out_dir / "loo_posteriors.csv", columns, posteriors))
	return run.finish()


# ---------------------------------------------------------------------------
# noise-check
# ---------------------------------------------------------------------------
def run_noise_check(cfg: ExperimentConfig, args=None) -> RunLog:
	"""
	Empirical |e/v| statistics per SNR. The noise is relative to |v|, so the
	statistics do not depend on the coefficient drawn around.
	"""
	run = RunLog("noise-check", cfg)
	snrs = [parse_snr(v) for v in _arg(args, "snr", cfg.noise_check_snr_db)]
	n = int(_arg(args, "draws", DEFAULT_NOISE_DRAWS))
	v = complex(_arg(args, "coefficient", 1.0))
	stats = [noise_ratio_statistics(v, snr, n, seed_key(cfg.seed, NOISE_STREAM, i)) for i, snr in enumerate(snrs)]
	for s in stats:
		log.info(
			"SNR %s dB: mean |e/v| %.4f, rms %.4f (expected %.4f)",
			s.snr_db, s.mean_ratio, s.rms_ratio, s.expected_rms_ratio,
		)
	run.add(export("noise_check", {"stats": stats}, run.out_dir / "noise_check.csv"))
	run.counts.update(cells=len(stats), succeeded=len(stats))
	return run.finish()
