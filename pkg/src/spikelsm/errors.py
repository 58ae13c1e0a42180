"""Exception hierarchy.

Every error raised on purpose by this package derives from :class:`LsmError`,
so callers can catch one base class. The CLI maps the three families
(data/format, numeric, everything else) onto distinct exit codes.
"""


class LsmError(Exception):
    """Base class for all spikelsm errors."""


class ConfigError(LsmError, ValueError):
    """A configuration value is out of range.

    Attributes:
        field: name of the offending configuration field.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class ShapeError(LsmError, ValueError):
    """An array does not have the expected dimensions."""

    def __init__(self, what, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected {expected}, got {actual}")


class NumericError(LsmError, ArithmeticError):
    """Non-finite input or an unsolvable numeric problem."""


class RankDeficiencyError(NumericError):
    """The unregularised normal equations are singular."""


class FormatError(LsmError):
    """Malformed, corrupt or incompatible serialized data."""


class CorruptFileError(FormatError):
    """File is truncated, unparsable or fails its checksum."""


class UnsupportedVersionError(FormatError):
    """File carries a format tag this version cannot read."""

    def __init__(self, tag):
        self.tag = tag
        super().__init__(f"unsupported format version {tag!r}")


class DimensionError(FormatError):
    """Stored arrays disagree with the stored configuration."""


class MissingCacheError(FormatError):
    """Retraining was requested from a model saved without a state cache."""


class CsvParseError(FormatError):
    """A CSV file is not a rectangular numeric table.

    Attributes:
        line: 1-based line number of the first bad row.
    """

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class NotTrainedError(FormatError):
    """The model has a reservoir but no readout yet."""
