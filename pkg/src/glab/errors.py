"""Exception types shared across the package."""


class GlabError(Exception):
    """Base class for all errors raised by this package."""


class GrammarError(GlabError):
    """A grammar, tree, or feature structure violates a structural constraint."""


class ParseError(GlabError):
    """A grammar file could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(GlabError):
    """A transformation was applied to a grammar outside its domain."""
