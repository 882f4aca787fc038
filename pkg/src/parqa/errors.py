"""Exception hierarchy shared by all parqa modules.

The CLI maps these onto exit codes: :class:`ParameterError` -> 1,
:class:`CapacityError` / :class:`EmbeddingError` -> 2 and
:class:`UnsolvedError` -> 3.
"""


class ParqaError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(ParqaError, ValueError):
    """An argument is outside its documented domain."""


class CapacityError(ParqaError):
    """The request does not fit on the hardware, embedding set or solver."""


class EmbeddingError(ParqaError):
    """An embedding is invalid or cannot carry the requested problem."""


class ValidationError(ParqaError, ValueError):
    """A loaded or constructed object violates its structural invariants."""


class GraphFormatError(ParqaError, ValueError):
    """A file could not be parsed; the message carries line/field context."""


class EvaluationError(ParqaError, ValueError):
    """An energy evaluation received an incomplete or out-of-domain assignment."""


class NormalizationError(ParqaError, ValueError):
    pass


class GenerationError(ParqaError):
    """Random graph rejection sampling ran out of attempts."""


class UndefinedTTSError(ParqaError, ValueError):
    """TTS is undefined because the ground state was never observed (p = 0)."""


class UnsolvedError(ParqaError):
    """Some problems stayed unsolved after all retries."""
