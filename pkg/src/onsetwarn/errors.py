"""Exception types raised by the onsetwarn pipeline."""


class OnsetWarnError(Exception):
    """Base class for all onsetwarn errors."""


class ConfigError(OnsetWarnError):
    pass


# --- ingest ---------------------------------------------------------------

class MissingColumnError(OnsetWarnError):
    pass


class DuplicateDateError(OnsetWarnError):
    pass


class UnparseableDateError(OnsetWarnError):
    pass


class InvalidLabelError(OnsetWarnError):
    pass


class MissingYearError(OnsetWarnError):
    pass


class NonChronologicalSplitError(OnsetWarnError):
    pass


# --- features -------------------------------------------------------------

class EmptyTrainingSetError(OnsetWarnError):
    pass


class DimensionMismatchError(OnsetWarnError):
    pass


# --- labeling -------------------------------------------------------------

class LengthMismatchError(OnsetWarnError):
    pass


# --- models ---------------------------------------------------------------

class DegenerateLabelsError(OnsetWarnError):
    pass


class ShapeMismatchError(OnsetWarnError):
    pass


class NonFiniteLossError(OnsetWarnError):
    pass


# --- evaluation -----------------------------------------------------------

class SingleClassError(OnsetWarnError):
    pass


# --- synth ----------------------------------------------------------------

class InvalidConfigError(OnsetWarnError):
    pass


class ConfigSeriesMismatchError(OnsetWarnError):
    pass
