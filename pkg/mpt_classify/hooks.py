app_name = "mpt_classify"
app_title = "MPT Classify"
app_description = "Metal-detection object classification from magnetic polarizability tensor spectral signatures"
app_license = "mit"

# Classifier methods
# ------------------
# method tag -> model class

classifier_methods = {
	"logistic": "mpt_classify.classifiers.logistic.LogisticRegression",
	"tree": "mpt_classify.classifiers.tree.DecisionTree",
	"forest": "mpt_classify.classifiers.forest.RandomForest",
	"gboost": "mpt_classify.classifiers.gboost.GradientBoost",
	"svm": "mpt_classify.classifiers.svm.SupportVectorMachine",
	"mlp": "mpt_classify.classifiers.mlp.MultilayerPerceptron",
}

# CLI verbs
# ---------
# verb -> experiment runner taking (config, args)

commands = {
	"build": "mpt_classify.experiments.experiments.run_build",
	"train": "mpt_classify.experiments.experiments.run_train",
	"evaluate": "mpt_classify.experiments.experiments.run_evaluate",
	"compare": "mpt_classify.experiments.experiments.run_compare",
	"sweep": "mpt_classify.experiments.experiments.run_sweep",
	"loo": "mpt_classify.experiments.experiments.run_loo",
	"noise-check": "mpt_classify.experiments.experiments.run_noise_check",
}

# Reports
# -------
# report name -> execute(filters) returning (columns, data)

reports = {
	"kappa_table": "mpt_classify.report.kappa_table.kappa_table.execute",
	"confusion_matrix": "mpt_classify.report.confusion_matrix.confusion_matrix.execute",
	"class_metrics": "mpt_classify.report.class_metrics.class_metrics.execute",
	"uncertainty_summary": "mpt_classify.report.uncertainty_summary.uncertainty_summary.execute",
	"sweep_grid": "mpt_classify.report.sweep_grid.sweep_grid.execute",
	"loo_summary": "mpt_classify.report.loo_summary.loo_summary.execute",
	"noise_check": "mpt_classify.report.noise_check.noise_check.execute",
}
