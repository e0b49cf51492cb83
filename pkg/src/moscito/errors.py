"""Exception types shared across the package."""


class MoscitoError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MoscitoError):
    """A file does not follow its documented format."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ValidationError(MoscitoError):
    """Parsed or constructed data violates a documented invariant."""


class FeaturizerError(MoscitoError):
    """A featurizer failed; carries the featurizer name."""

    def __init__(self, featurizer, message):
        self.featurizer = featurizer
        super().__init__(f"featurizer '{featurizer}': {message}")


class ConvergenceError(MoscitoError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
