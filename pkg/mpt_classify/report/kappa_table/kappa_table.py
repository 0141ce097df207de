# kappa across MCCV iterations, one row per (method, P^(k), SNR) cell

from mpt_classify.report import column


def execute(filters: dict | None = None):
	filters = filters or {}
	return get_columns(), get_data(filters)


def get_columns() -> list[dict]:
	return [
		column("Method", "method", "Data", 90),
		column("Samples per Class", "samples_per_class", "Int"),
		column("Train SNR (dB)", "train_snr_db"),
		column("Test SNR (dB)", "test_snr_db"),
		column("Iterations", "iterations", "Int", 80),
		column("Kappa Median", "kappa_median"),
		column("Kappa Q1", "kappa_q1"),
		column("Kappa Q3", "kappa_q3"),
		column("Kappa Mean", "kappa_mean"),
		column("Kappa Min", "kappa_min"),
		column("Kappa Max", "kappa_max"),
		column("Converged", "converged", "Int", 80),
	]


def get_data(filters: dict) -> list[dict]:
	data = []
	for row in filters.get("rows", []):
		report = row["report"]
		s = report.kappa_summary
		data.append(
			{
				"method": row["method"],
				"samples_per_class": row["samples_per_class"],
				"train_snr_db": row["train_snr_db"],
				"test_snr_db": row["test_snr_db"],
				"iterations": len(report.iterations),
				"kappa_median": s.median,
				"kappa_q1": s.q1,
				"kappa_q3": s.q3,
				"kappa_mean": s.mean,
				"kappa_min": s.min,
				"kappa_max": s.max,
				"converged": sum(1 for it in report.iterations if it.converged),
			}
		)
	return data
