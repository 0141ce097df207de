from mpt_classify.report import column


def execute(filters: dict | None = None):
	filters = filters or {}
	return get_columns(), get_data(filters.get("stats", []))


def get_columns() -> list[dict]:
	return [
		column("SNR (dB)", "snr_db", "Float", 80),
		column("Draws", "n", "Int", 80),
		column("Mean |e/v|", "mean_ratio"),
		column("RMS |e/v|", "rms_ratio"),
		column("Expected RMS |e/v|", "expected_rms_ratio"),
		column("Mean |e/v|^2", "mean_power_ratio"),
		column("Expected |e/v|^2", "expected_power_ratio"),
	]


def get_data(stats) -> list[dict]:
	return [
		{
			"snr_db": s.snr_db,
			"n": s.n,
			"mean_ratio": s.mean_ratio,
			"rms_ratio": s.rms_ratio,
			"expected_rms_ratio": s.expected_rms_ratio,
			"mean_power_ratio": s.mean_power_ratio,
			"expected_power_ratio": s.expected_power_ratio,
		}
		for s in stats
	]
