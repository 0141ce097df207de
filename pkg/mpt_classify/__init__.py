import importlib
import logging
import traceback

__version__ = "0.1.0"
app_name = "mpt_classify"
app_title = "MPT Classify"
app_description = "Metal-detection object classification from magnetic polarizability tensor spectral signatures"
app_license = "mit"


def logger(module: str | None = None) -> logging.Logger:
	"""Return the app logger, or a child logger for ``module``."""
	return logging.getLogger(f"{app_name}.{module}" if module else app_name)


def log_error(message: str | None = None, title: str | None = None) -> None:
	"""Record an error with the active traceback (or ``message``) at ERROR level."""
	body = message or traceback.format_exc()
	logger("errors").error("%s\n%s", title or "Error", body)


def get_attr(method_string: str):
	"""Resolve a dotted ``package.module.attr`` path from hooks."""
	module_name, _, attr = method_string.rpartition(".")
	return getattr(importlib.import_module(module_name), attr)
