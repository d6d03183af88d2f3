"""Exception hierarchy for gsvkit.

Cost guards raise subclasses of :class:`GuardError` so callers can
distinguish "refused because it would be too expensive" from genuine
input errors and fall back to cheaper modes.
"""


class GsvError(Exception):
    """Base class for all gsvkit errors."""


class DimensionError(GsvError):
    """A die and a witness (or two vectors) disagree on the face count."""


class StrategyError(GsvError):
    """A strategy returned an out-of-range die index."""


class SpecFormatError(GsvError):
    """A source / strategy / extractor document could not be parsed."""


class GuardError(GsvError):
    """A cost guard would be exceeded; carries the guard's name."""

    guard = "GUARD"


class SubsetLimitError(GuardError):
    """Too many dice for explicit subset enumeration (SUBSET_LIMIT)."""

    guard = "SUBSET_LIMIT"


class TreeLimitError(GuardError):
    """The |F|^n game tree exceeds the cost guard (TREE_LIMIT)."""

    guard = "TREE_LIMIT"


class EnumLimitError(GuardError):
    """Too many strategy trees to enumerate exhaustively (ENUM_LIMIT)."""

    guard = "ENUM_LIMIT"


class OutputWidthError(GuardError):
    """Output width m exceeds the implementation's guard (M_LIMIT)."""

    guard = "M_LIMIT"


class NotHnkError(GsvError):
    """A ratio witness was requested for a source that fails HNK."""


class EpsilonTooLargeError(GsvError):
    """The constructed ratio witness failed verification at the given
    epsilon; the caller must retry with a smaller value."""


class NoQualifyingDieError(GsvError):
    """The greedy adversary found no die satisfying its gain inequality,
    i.e. the mean-variance ratio precondition does not hold here."""
