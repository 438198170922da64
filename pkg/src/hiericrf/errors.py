"""Exception vocabulary shared across the package.

Everything raised on purpose derives from HierICRFError so callers (and
the CLI exit-code mapping) can tell deliberate failures from bugs.
"""


class HierICRFError(Exception):
    """Base class for all package errors."""


class ParseError(HierICRFError):
    """Input is not syntactically valid (JSON/JSONL)."""


class ValidationError(HierICRFError):
    """A structural invariant of an input artifact is violated."""


class UnknownLabel(HierICRFError):
    """A label name or id does not exist in the taxonomy."""


class InvalidArgument(HierICRFError):
    """An argument violates a documented precondition."""


class LengthMismatch(HierICRFError):
    """A sequence has the wrong length for the schedule or taxonomy."""


class DimensionMismatch(HierICRFError):
    """Array dimensions disagree (features vs. weights, logits vs. labels)."""


class FormatError(HierICRFError):
    """A binary file has a bad magic number, version, or layout."""


class ShapeError(HierICRFError):
    """A payload's shape contradicts its declared header."""


class TruncationError(HierICRFError):
    """A file ends before the declared number of records."""


class NumericalError(HierICRFError):
    """A numerical routine produced NaN or otherwise lost its footing."""


class EmptyDataset(HierICRFError):
    """A training or evaluation set contains no examples."""


class DivergenceError(HierICRFError):
    """The training loss became non-finite."""


class InvalidSpec(HierICRFError):
    """A SynthSpec field is out of its valid range."""


class InvalidGold(HierICRFError):
    """A gold label set is not a single root-to-leaf path."""


class InsufficientData(HierICRFError):
    """The corpus cannot fill the requested per-path quota.

    Carries the offending paths and the partial result so callers can
    decide whether to proceed with fewer shots.
    """

    def __init__(self, message, paths=(), partial=None):
        super().__init__(message)
        self.paths = tuple(paths)
        self.partial = partial
