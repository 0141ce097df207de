# One row per (regime, held-out geometry): kappa across iterations and the
# percentiles of the true-class posterior over every held-out test sample.

from mpt_classify.report import column


def execute(filters: dict | None = None):
	filters = filters or {}
	return get_columns(), get_data(filters.get("rows", []))


def get_columns() -> list[dict]:
	return [
		column("Regime", "regime", "Data", 80),
		column("s_alpha / m_alpha", "s_alpha_rel"),
		column("s_sigma / m_sigma", "s_sigma_rel"),
		column("Class", "class_id", "Int", 70),
		column("Held-out Geometry", "geometry_id", "Data", 120),
		column("Method", "method", "Data", 90),
		column("Iterations", "iterations", "Int", 80),
		column("Held-out Samples", "n_held_out", "Int", 90),
		column("Kappa Median", "kappa_median"),
		column("Kappa Q1", "kappa_q1"),
		column("Kappa Q3", "kappa_q3"),
		column("True-class P5", "gamma_true_p5"),
		column("True-class Q1", "gamma_true_q1"),
		column("True-class Median", "gamma_true_median"),
		column("True-class Q3", "gamma_true_q3"),
		column("True-class P95", "gamma_true_p95"),
		column("Probabilistic", "probabilistic", "Int", 80),
	]


def get_data(rows: list[dict]) -> list[dict]:
	data = []
	for row in rows:
		s = row["kappa_summary"]
		posterior = row["summary"]
		true_row = posterior.percentiles[row["class_id"] - 1]
		data.append(
			{
				"regime": row["regime"],
				"s_alpha_rel": row["s_alpha_rel"],
				"s_sigma_rel": row["s_sigma_rel"],
				"class_id": row["class_id"],
				"geometry_id": row["geometry_id"],
				"method": row["method"],
				"iterations": row["iterations"],
				"n_held_out": posterior.n,
				"kappa_median": s.median,
				"kappa_q1": s.q1,
				"kappa_q3": s.q3,
				"gamma_true_p5": true_row[0],
				"gamma_true_q1": true_row[1],
				"gamma_true_median": true_row[2],
				"gamma_true_q3": true_row[3],
				"gamma_true_p95": true_row[4],
				"probabilistic": int(row.get("probabilistic", True)),
			}
		)
	return data
