"""Exception hierarchy for the qms toolkit."""


class QMSError(Exception):
    """Base class for all errors raised by qms."""


class DimensionError(QMSError, ValueError):
    pass


class NotHermitianError(QMSError, ValueError):
    pass


class AccuracyError(QMSError, ArithmeticError):
    pass


class NotHermiticityPreservingError(QMSError, ValueError):
    pass


class NotPSDError(QMSError, ValueError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class ZeroOperatorError(QMSError, ValueError):
    pass


class ConstraintViolatedError(QMSError, ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NonRealFormError(QMSError, ValueError):
    pass


class PhiNotCPError(QMSError):
    """The extracted completely positive part failed certification.

    Either the input is not the generator of a quantum Markov semigroup or
    the tolerance is too tight; ``min_eigenvalue`` is the smallest Choi
    eigenvalue of the extracted map.
    """

    def __init__(self, message, min_eigenvalue):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class GramNotPSDError(QMSError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NotUnitalError(QMSError, ValueError):
    pass


class SingularResolventError(QMSError, ArithmeticError):
    def __init__(self, message, condition_number):
        super().__init__(message)
        self.condition_number = condition_number


class InternalInconsistencyError(QMSError, AssertionError):
    pass


class ParseError(QMSError):
    """Malformed JSON input; carries line/column of the first problem."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(QMSError):
    """Well-formed JSON that does not match the generator spec schema."""

    def __init__(self, message, field=None):
        if field is not None and not message.startswith(f"{field}:"):
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
