from mpt_classify.report import column


def execute(filters: dict | None = None):
	"""
	Rows are true classes, columns predicted classes. ``normalize`` picks
	"none" (counts), "all" (sums to 1) or "row" (each true class sums to 1).
	"""
	filters = filters or {}
	c = filters["confusion"]
	normalize = filters.get("normalize", "none")
	return get_columns(c.K, normalize), get_data(c, normalize)


def get_columns(K: int, normalize: str = "none") -> list[dict]:
	fieldtype = "Int" if normalize == "none" else "Float"
	columns = [column("True Class", "true_class", "Int", 80)]
	columns += [column(f"Predicted {k}", f"pred_{k}", fieldtype, 90) for k in range(1, K + 1)]
	columns.append(column("Total", "total", "Int", 80))
	return columns


def get_data(c, normalize: str = "none") -> list[dict]:
	if normalize == "all":
		values = c.normalized
	elif normalize == "row":
		values = c.row_normalized
	else:
		values = c.counts
	data = []
	for i in range(c.K):
		row = {"true_class": i + 1, "total": int(c.counts[i].sum())}
		row.update({f"pred_{j + 1}": values[i, j] for j in range(c.K)})
		data.append(row)
	return data
