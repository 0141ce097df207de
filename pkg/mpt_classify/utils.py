import hashlib
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

Seed = int | Sequence[int] | np.random.SeedSequence | None

# Stream keys keep independent random streams apart when they share a base seed.
VARIATION_STREAM = 11
NOISE_STREAM = 13
SPLIT_STREAM = 17
TRAIN_STREAM = 19


def seed_key(seed: Seed, *key: int) -> list[int]:
	"""Flatten a base seed plus unit indices into a SeedSequence entropy list."""
	if seed is None:
		from mpt_classify.exceptions import throw

		throw("A seed is required")
	if isinstance(seed, np.random.SeedSequence):
		base = [int(v) for v in np.atleast_1d(seed.entropy)] + [int(v) for v in seed.spawn_key]
	elif isinstance(seed, int | np.integer):
		base = [int(seed)]
	else:
		base = [int(v) for v in seed]
	return base + [int(k) for k in key]


def derive_rng(seed: Seed, *key: int) -> np.random.Generator:
	"""Generator for one work unit; the same (seed, key) always gives the same stream."""
	return np.random.default_rng(seed_key(seed, *key))


def parallel_map(fn: Callable[[Any], Any], items: Iterable[Any], threads: int = 1) -> list[Any]:
	"""Map ``fn`` over ``items`` keeping input order whatever the thread count."""
	items = list(items)
	if threads is None or threads <= 1 or len(items) <= 1:
		return [fn(item) for item in items]
	with ThreadPoolExecutor(max_workers=threads) as pool:
		return list(pool.map(fn, items))


def fmt_float(value: float) -> str:
	"""17 significant digits, enough to round-trip any float64."""
	if value is None:
		return ""
	if math.isinf(value):
		return "inf" if value > 0 else "-inf"
	return f"{float(value):.17g}"


def parse_float(text: str) -> float:
	return float(text.strip())


def sha256_bytes(data: bytes) -> str:
	return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
	return sha256_bytes(Path(path).read_bytes())


def to_jsonable(value: Any) -> Any:
	"""Convert numpy scalars/arrays and inf into JSON-safe builtins."""
	if isinstance(value, dict):
		return {str(k): to_jsonable(v) for k, v in value.items()}
	if isinstance(value, list | tuple):
		return [to_jsonable(v) for v in value]
	if isinstance(value, np.ndarray):
		return to_jsonable(value.tolist())
	if isinstance(value, np.integer):
		return int(value)
	if isinstance(value, np.floating | float):
		value = float(value)
		if math.isinf(value):
			return "inf" if value > 0 else "-inf"
		if math.isnan(value):
			return None
		return value
	if isinstance(value, Path):
		return value.as_posix()
	return value
