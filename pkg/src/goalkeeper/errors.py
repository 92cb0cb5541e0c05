"""Exception types shared across the toolkit.

Everything raised on purpose derives from ToolkitError so callers (and the
CLI) can separate validation problems from genuine bugs.
"""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


# --- model construction / lookup ---------------------------------------------

class NotSuffixFree(ToolkitError):
    """A context is a suffix of another context (or appears twice)."""


class NotComplete(ToolkitError):
    """The context set does not cover every possible past."""


class BadDistribution(ToolkitError):
    """A transition vector is malformed (length, range or sum)."""


class UnknownPreset(ToolkitError):
    """Preset name not recognized."""


class IncompleteModel(ToolkitError):
    """A partially specified model template was used where a complete model
    is required."""


class PastTooShort(ToolkitError):
    """The supplied past is shorter than the context needed to resolve it."""


class ConfigError(ToolkitError):
    """A model config file could not be parsed or contradicts a template."""


# --- chain analysis -----------------------------------------------------------

class Reducible(ToolkitError):
    """The induced chain has more than one recurrent class."""


class NotConverged(ToolkitError):
    """Iterative solver hit its iteration cap."""


# --- estimation / testing -----------------------------------------------------

class SampleTooShort(ToolkitError):
    """Sample too short for the requested height / split."""


class EmptyRange(ToolkitError):
    """An index range selects no trials."""


class EmptyInput(ToolkitError):
    """An operation over a collection received no elements."""


class DegenerateTable(ToolkitError):
    """Contingency table leaves no degrees of freedom."""


class DegenerateData(ToolkitError):
    """Data admit no variance where a test statistic needs one."""


# --- sessions / service -------------------------------------------------------

class SessionError(ToolkitError):
    """Base class for session persistence and game protocol errors."""


class SessionFinished(SessionError):
    """Trial cap reached; the session accepts no more plays."""


class BreakPending(SessionError):
    """A rest break must be acknowledged before the next guess."""


class BadSymbol(SessionError):
    """Symbol outside the alphabet."""


class NonContiguousTrials(SessionError):
    """Trial indices are not 1..n without gaps."""


class NotEnoughTrials(SessionError):
    """Analysis requested before the first window is complete."""


class UnknownSession(SessionError):
    """No session with that id."""
