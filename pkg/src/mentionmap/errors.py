"""Exception hierarchy for the mentionmap pipeline.

Data problems inside bulk files (bad rows, unknown platforms) are counted
and reported, not raised; these exceptions cover conditions where a whole
operation cannot proceed.
"""


class MentionMapError(Exception):
    """Base class for all mentionmap errors."""


class NotADoi(MentionMapError):
    """Input text cannot be normalized into a DOI."""


class MalformedRow(MentionMapError):
    """A tabular row cannot be parsed (wrong column count, bad year, ...)."""


class MalformedRecord(MentionMapError):
    """A line-delimited mention record cannot be parsed."""


class FileUnreadable(MentionMapError):
    """Input file missing, unreadable, or with an unusable header."""


class SnapshotCorrupt(MentionMapError):
    """Snapshot checksum mismatch or truncated payload."""


class VersionMismatch(MentionMapError):
    """Snapshot written by an incompatible format version."""


class EmptySelection(MentionMapError):
    """An operation was asked to run over an empty platform selection."""


class InvalidFraction(MentionMapError):
    """Display fraction outside (0, 1]."""


class EmptyGraph(MentionMapError):
    """Graph has no nodes, or no edge weight where weight is required."""


class DegenerateInput(MentionMapError):
    """Too few items for the requested computation (e.g. layout of < 2 terms)."""


class UnknownPlatform(MentionMapError):
    """Platform token outside the canonical set."""


class MalformedLabelFile(MentionMapError):
    """Manual account-label file cannot be parsed."""


class EmptyRange(MentionMapError):
    """Empty or inverted date range."""


class ConfigError(MentionMapError):
    """Unknown config key or out-of-range value."""
