"""Exception hierarchy shared across the package."""


class ArtContextError(Exception):
    """Base class for all package errors."""


class ValidationError(ArtContextError):
    """Input violates a documented precondition or invariant."""


class ConflictError(ArtContextError):
    """An upsert would change an immutable field of an existing record."""


class NotFoundError(ArtContextError):
    """A referenced node or edge does not exist."""


class DanglingEdgeError(ArtContextError):
    """An edge references a node that is not in the graph."""


class GraphFormatError(ArtContextError):
    """A persisted graph record could not be parsed."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class IntegrityError(ArtContextError):
    """A persisted graph is internally inconsistent (e.g. dangling edge)."""


class ConfigurationError(ArtContextError):
    """Missing or contradictory configuration."""


class TransportError(ArtContextError):
    """A remote provider call failed after exhausting retries."""


class EmptyResponseError(ArtContextError):
    """The provider returned a refusal or an empty completion."""


class ConceptDetectionError(ArtContextError):
    """No usable concepts could be extracted for a painting."""


class TemplateError(ArtContextError):
    """A prompt template is malformed (missing/duplicated placeholder)."""


class PipelineError(ArtContextError):
    """A pipeline stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
