"""Exception hierarchy shared by all qgcl modules."""


class QgclError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QgclError):
    """Operator or state dimensions do not match."""


class ShapeError(QgclError):
    """Matrix does not have the required shape or symmetry."""


class VariableScopeError(QgclError):
    """A variable is used outside the set it was declared or embedded on."""


class UnknownVariableError(QgclError):
    """Reference to a variable that was never declared."""


class DomainClashError(QgclError):
    """Concatenation of classical states with overlapping domains."""


class GuardBasisError(QgclError):
    """Alternation guards are not an orthonormal, complete family."""


class AlphaNormalizationError(QgclError):
    """Coefficient family violates the per-branch normalization condition."""


class ProbabilityError(QgclError):
    """Probabilistic choice weights are not a sub-probability distribution."""


class StateError(QgclError):
    """A matrix that must be a density operator is not one."""


class SemanticsError(QgclError):
    """Program shape outside the domain of the requested semantic map."""


class ParseError(QgclError):
    """Syntax error in a program file, with source position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)
