# Full-factorial sweep, one row per grid cell in axis order (plot-ready x, y, kappa)

from mpt_classify.report import column


def execute(filters: dict | None = None):
	filters = filters or {}
	axes = list(filters.get("axes", []))
	cells = filters.get("cells", [])
	return get_columns(axes, cells), get_data(axes, cells)


def _axis_type(axis: str, cells: list[dict]) -> str:
	values = [cell["values"][axis] for cell in cells]
	if all(isinstance(v, int) and not isinstance(v, bool) for v in values):
		return "Int"
	if all(isinstance(v, int | float) and not isinstance(v, bool) for v in values):
		return "Float"
	return "Data"


def get_columns(axes: list[str], cells: list[dict]) -> list[dict]:
	columns = [column(axis, axis, _axis_type(axis, cells), 100) for axis in axes]
	columns += [
		column("Method", "method", "Data", 90),
		column("Iterations", "iterations", "Int", 80),
		column("Kappa Median", "kappa_median"),
		column("Kappa Q1", "kappa_q1"),
		column("Kappa Q3", "kappa_q3"),
		column("Kappa Mean", "kappa_mean"),
	]
	return columns


def get_data(axes: list[str], cells: list[dict]) -> list[dict]:
	data = []
	for cell in cells:
		s = cell["report"].kappa_summary
		row = {axis: cell["values"][axis] for axis in axes}
		row.update(
			{
				"method": cell["report"].method,
				"iterations": len(cell["report"].iterations),
				"kappa_median": s.median,
				"kappa_q1": s.q1,
				"kappa_q3": s.q3,
				"kappa_mean": s.mean,
			}
		)
		data.append(row)
	return data
