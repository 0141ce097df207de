# Tabular exporters. Each report module exposes execute(filters) returning
# (columns, data): columns are dicts with label/fieldname/fieldtype/width,
# data is a list of dicts keyed by fieldname.

import csv
import io
from pathlib import Path

from mpt_classify import get_attr, hooks
from mpt_classify.exceptions import IoError, ValidationError
from mpt_classify.utils import fmt_float


def column(label: str, fieldname: str, fieldtype: str = "Float", width: int = 110) -> dict:
	return {"label": label, "fieldname": fieldname, "fieldtype": fieldtype, "width": width}


def _cell(value, fieldtype: str) -> str:
	if value is None:
		return ""
	if fieldtype == "Float":
		return fmt_float(value)
	if fieldtype == "Int":
		return str(int(value))
	return str(value)


def to_csv_text(columns: list[dict], data: list[dict]) -> str:
	buf = io.StringIO()
	writer = csv.writer(buf, lineterminator="\n")
	writer.writerow([c["fieldname"] for c in columns])
	for row in data:
		writer.writerow([_cell(row.get(c["fieldname"]), c["fieldtype"]) for c in columns])
	return buf.getvalue()


def write_csv(path: str | Path, columns: list[dict], data: list[dict]) -> Path:
	path = Path(path)
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		path.write_text(to_csv_text(columns, data), encoding="utf-8")
	except OSError as e:
		raise IoError(f"Cannot write report {path}: {e}") from e
	return path


def run_report(name: str, filters: dict | None = None) -> tuple[list[dict], list[dict]]:
	if name not in hooks.reports:
		raise ValidationError(f"Unknown report {name!r}")
	return get_attr(hooks.reports[name])(filters or {})


def export(name: str, filters: dict, path: str | Path) -> Path:
	columns, data = run_report(name, filters)
	return write_csv(path, columns, data)
