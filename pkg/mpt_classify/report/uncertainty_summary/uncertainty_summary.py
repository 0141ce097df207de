# Posterior bar data: for each true class and each candidate class k the
# 5/25/50/75/95 percentiles of gamma_k, optionally with a t interval for the
# mean when the raw posteriors are passed as ``gammas``.

from mpt_classify.evaluation.uncertainty import mean_confidence_interval
from mpt_classify.exceptions import EmptySubset
from mpt_classify.report import column


def execute(filters: dict | None = None):
	filters = filters or {}
	prefix = filters.get("prefix") or {}
	return get_columns(prefix, "gammas" in filters), get_data(filters, prefix)


def get_columns(prefix: dict, with_interval: bool = False) -> list[dict]:
	columns = [column(key.replace("_", " ").title(), key, "Data", 90) for key in prefix]
	columns += [
		column("True Class", "true_class", "Int", 80),
		column("Class", "class_k", "Int", 70),
		column("Samples", "n", "Int", 70),
		column("P5", "p5"),
		column("Q1", "q1"),
		column("Median", "median"),
		column("Q3", "q3"),
		column("P95", "p95"),
	]
	if with_interval:
		columns += [column("Mean", "mean"), column("CI Low", "ci_low"), column("CI High", "ci_high")]
	return columns


def get_data(filters: dict, prefix: dict) -> list[dict]:
	summaries = filters.get("summaries", {})
	if not isinstance(summaries, dict):
		summaries = {s.true_class: s for s in summaries}
	gammas = filters.get("gammas")
	level = filters.get("level", 0.95)

	data = []
	for true_class in sorted(summaries):
		s = summaries[true_class]
		for k in range(s.percentiles.shape[0]):
			row = dict(prefix)
			row.update({"true_class": s.true_class, "class_k": k + 1, "n": s.n})
			row.update(zip(("p5", "q1", "median", "q3", "p95"), s.percentiles[k], strict=True))
			if gammas is not None:
				try:
					ci = mean_confidence_interval(gammas[true_class][:, k], level)
					row.update({"mean": ci.mean, "ci_low": ci.low, "ci_high": ci.high})
				except EmptySubset:
					row["mean"] = float(gammas[true_class][:, k].mean())
			data.append(row)
	return data
