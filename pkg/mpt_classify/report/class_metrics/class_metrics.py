# per-class precision, sensitivity and specificity; undefined ratios are empty cells

from mpt_classify.evaluation.metrics import class_metrics
from mpt_classify.report import column


def execute(filters: dict | None = None):
	filters = filters or {}
	return get_columns(), get_data(filters["confusion"])


def get_columns() -> list[dict]:
	return [
		column("Class", "class_id", "Int", 70),
		column("Precision", "precision"),
		column("Sensitivity", "sensitivity"),
		column("Specificity", "specificity"),
		column("TP", "tp", "Int", 70),
		column("FP", "fp", "Int", 70),
		column("TN", "tn", "Int", 70),
		column("FN", "fn", "Int", 70),
	]


def get_data(c) -> list[dict]:
	m = class_metrics(c)
	tp, fp, tn, fn = c.tp_fp_tn_fn()
	return [
		{
			"class_id": k,
			"precision": precision,
			"sensitivity": sensitivity,
			"specificity": specificity,
			"tp": tp[k - 1],
			"fp": fp[k - 1],
			"tn": tn[k - 1],
			"fn": fn[k - 1],
		}
		for k, precision, sensitivity, specificity in m.rows()
	]
