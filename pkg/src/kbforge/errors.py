class KBError(Exception):
    """Base class for all user-facing errors."""


class LexError(KBError):
    def __init__(self, msg, line, col):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


class ParseError(KBError):
    def __init__(self, msg, line, col, expected=()):
        exp = ""
        if expected:
            exp = " (expected one of: " + ", ".join(sorted(set(expected))) + ")"
        super().__init__(f"{line}:{col}: {msg}{exp}")
        self.line, self.col, self.expected = line, col, set(expected)


class UnsupportedFeature(ParseError):
    pass


class IncludeError(KBError):
    pass


class TypeCheckError(KBError):
    def __init__(self, msg, violations=()):
        super().__init__(msg)
        self.violations = list(violations)


class AmbiguityError(TypeCheckError):
    def __init__(self, msg, candidates=()):
        super().__init__(msg)
        self.candidates = list(candidates)


class StructureError(KBError):
    pass


class EvaluationError(KBError):
    pass


class GroundingError(KBError):
    pass


class NotTotalError(KBError):
    pass


class Inconsistent(KBError):
    """Raised when input knowledge is contradictory; ``witness`` names the clash."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness
