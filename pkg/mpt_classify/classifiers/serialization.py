# Versioned JSON model files.
#
# Arrays are stored as {"__ndarray__": true, "dtype", "shape", "data"} with data
# as a flat list; JSON floats written by repr round-trip float64 exactly, so a
# reloaded model predicts bit-for-bit like the saved one.

import json
import math
from pathlib import Path

import numpy as np

from mpt_classify.classifiers.base import ClassifierModel
from mpt_classify.exceptions import IoError, ParseError

FORMAT_VERSION = 1


def _encode(value):
	if isinstance(value, np.ndarray):
		data = value.ravel().tolist()
		if value.dtype.kind == "f":
			data = [v if math.isfinite(v) else repr(v) for v in data]
		return {"__ndarray__": True, "dtype": value.dtype.str, "shape": list(value.shape), "data": data}
	if isinstance(value, dict):
		return {str(k): _encode(v) for k, v in value.items()}
	if isinstance(value, list | tuple):
		return [_encode(v) for v in value]
	if isinstance(value, np.integer):
		return int(value)
	if isinstance(value, np.floating):
		value = float(value)
	if isinstance(value, float) and not math.isfinite(value):
		return {"__float__": repr(value)}
	if isinstance(value, np.bool_):
		return bool(value)
	return value


def _decode(value):
	if isinstance(value, dict):
		if value.get("__ndarray__"):
			data = [float(v) if isinstance(v, str) else v for v in value["data"]]
			return np.array(data, dtype=np.dtype(value["dtype"])).reshape(value["shape"])
		if "__float__" in value:
			return float(value["__float__"])
		return {k: _decode(v) for k, v in value.items()}
	if isinstance(value, list):
		return [_decode(v) for v in value]
	return value


def model_to_dict(model: ClassifierModel) -> dict:
	return {"format_version": FORMAT_VERSION, **_encode(model.get_state())}


def model_from_dict(data: dict) -> ClassifierModel:
	from mpt_classify.classifiers.classifiers import make_model

	version = data.get("format_version")
	if version != FORMAT_VERSION:
		raise ParseError(f"Unsupported model format version {version!r}")
	state = _decode({k: v for k, v in data.items() if k != "format_version"})
	try:
		return make_model(state["method"], state["hyperparams"]).set_state(state)
	except (KeyError, TypeError, ValueError) as e:
		raise ParseError(f"Malformed model state: {e}") from e


def save_model(model: ClassifierModel, path: str | Path) -> Path:
	path = Path(path)
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n", encoding="utf-8")
	except OSError as e:
		raise IoError(f"Cannot write model {path}: {e}") from e
	return path


def load_model(path: str | Path) -> ClassifierModel:
	path = Path(path)
	try:
		data = json.loads(path.read_text(encoding="utf-8"))
	except OSError as e:
		raise IoError(f"Cannot read model {path}: {e}") from e
	except json.JSONDecodeError as e:
		raise ParseError(f"{path}: {e}") from e
	return model_from_dict(data)
