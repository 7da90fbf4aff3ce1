"""Exception and warning types raised across the package."""


class CtrlPropsError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CtrlPropsError, ValueError):
    """A spec, reward structure or configuration block is invalid."""


class InputError(CtrlPropsError, ValueError):
    """A trace, label vector or ensemble does not satisfy an operation's preconditions."""


class RangeWarning(UserWarning):
    """An observed value fell outside its signal range and was clamped to the grid."""
