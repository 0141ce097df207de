# Error hierarchy shared by every module.
#
# ValidationError is the general "bad input" error; each named failure below
# derives from it (or from MptClassifyError directly when it is not an input
# problem) so callers can catch as wide or as narrow as they need.


class MptClassifyError(Exception):
	pass


class ValidationError(MptClassifyError):
	pass


class ConfigError(ValidationError):
	pass


class ParseError(ValidationError):
	pass


class IoError(MptClassifyError, OSError):
	pass


# ---------- tensor_core ----------
class NonOrthogonal(ValidationError):
	pass


# ---------- signature_source / dictionary_builder ----------
class OutOfGrid(ValidationError):
	pass


class DegenerateSpec(ValidationError):
	pass


class ClassTooSmall(ValidationError):
	pass


class GeometryNotFound(ValidationError):
	pass


class LastGeometry(ValidationError):
	pass


# ---------- classifiers ----------
class MissingClass(ValidationError):
	pass


class SingularCovariance(MptClassifyError):
	pass


class DimensionMismatch(ValidationError):
	pass


# ---------- evaluation ----------
class DegenerateChance(MptClassifyError):
	pass


class NonProbabilisticModel(ValidationError):
	pass


class EmptySubset(ValidationError):
	pass


def throw(msg: str, exc: type[MptClassifyError] = ValidationError):
	raise exc(msg)
