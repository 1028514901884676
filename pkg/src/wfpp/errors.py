"""Exception hierarchy for the wfpp toolkit."""


class WfppError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(WfppError):
    """Invalid user-supplied configuration (bad fraction, threshold, paths)."""


class FormatError(WfppError):
    """A single malformed manifest line. Carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ConfigMismatch(WfppError):
    """Tokenizer configs of two artifacts disagree (hash check failed)."""


class EmptyTable(WfppError):
    """Frequency lookup against a table with total == 0."""


class EmptyCaption(WfppError):
    """A caption tokenized to zero tokens and cannot be scored."""


class EmptyCorpus(WfppError):
    """Pruning requested over zero records."""


class EmptyEntryList(WfppError):
    """Metadata strategy invoked without entries."""


class DomainError(WfppError):
    """Numeric argument outside its mathematical domain."""


class IndexOutOfRange(WfppError):
    """Selection references an index absent from the record stream."""


class SubsetViolation(WfppError):
    """A supposedly-pruned table has a higher count than the full table."""
