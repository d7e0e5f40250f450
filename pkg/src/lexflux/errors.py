"""Exception hierarchy shared across the package."""


class LexfluxError(Exception):
    """Base class for all package-specific failures."""


class MalformedLine(LexfluxError, ValueError):
    """A shard line that cannot be parsed into a year record."""


class MalformedEntry(LexfluxError, ValueError):
    """A total-counts entry with the wrong shape or non-numeric fields."""


class DuplicateYear(LexfluxError, ValueError):
    """A total-counts source listing the same year twice."""


class MissingTotals(LexfluxError):
    """A year required by the requested decade range has no usable total."""


class EmptyRange(LexfluxError, ValueError):
    """A decade range whose first decade lies after its last."""


class EmptyDecade(LexfluxError, ValueError):
    """A decade with zero total mass where a distribution is required."""


class VersionMismatch(LexfluxError):
    """A table cache written by an unsupported format version."""


class CorruptTable(LexfluxError):
    """A table cache failing checksum, magic, or structural validation."""


class BothZero(LexfluxError, ValueError):
    """A per-word contribution requested for a word absent from both decades."""


class InsufficientDecades(LexfluxError, ValueError):
    """A table spanning too few decades for the requested gap."""


class RankOutOfRange(LexfluxError, ValueError):
    """A rank outside [1, vocabulary size] of the decade."""


class AbsentToken(LexfluxError, KeyError):
    """A token with no nonzero frequency in the queried window."""


class WindowTooSmall(LexfluxError, ValueError):
    """A lifecycle window spanning fewer than two decades."""


class EndpointOutOfRange(LexfluxError, ValueError):
    """A lifecycle endpoint outside the table's decade range."""


class InvalidScript(LexfluxError, ValueError):
    """A synthetic-corpus script violating its own constraints."""
