from utils.exceptions.base import BaseAMGException


class NumericsException(BaseAMGException):
    """Base exception for linear-algebra failures"""
    def __init__(self, message, **kwargs):
        kwargs.setdefault('error_code', 'NUMERICS_ERROR')
        kwargs.setdefault('exit_code', 1)
        super().__init__(message, **kwargs)

class SparseFormatException(NumericsException):
    """Exception raised when sparse input violates CSR construction rules"""
    def __init__(self, message, **kwargs):
        kwargs.setdefault('error_code', 'SPARSE_FORMAT_ERROR')
        super().__init__(message, **kwargs)

class DimensionMismatchException(NumericsException):
    """Exception raised when operand shapes are incompatible"""
    def __init__(self, message, expected=None, actual=None, **kwargs):
        details = kwargs.get('details', {})
        if expected is not None:
            details['expected'] = str(expected)
        if actual is not None:
            details['actual'] = str(actual)
        kwargs['details'] = details
        kwargs.setdefault('error_code', 'DIMENSION_MISMATCH')
        super().__init__(message, **kwargs)

class SingularMatrixException(NumericsException):
    """Exception raised when a direct solve hits a zero pivot"""
    def __init__(self, message, **kwargs):
        kwargs.setdefault('error_code', 'SINGULAR_MATRIX')
        kwargs.setdefault('suggestion', 'Check that the operator is nonsingular on the coarsest level')
        super().__init__(message, **kwargs)

class SmootherException(NumericsException):
    """Exception raised when a stationary smoother is undefined for the operator"""
    def __init__(self, message, rows=None, **kwargs):
        details = kwargs.get('details', {})
        if rows is not None:
            details['zero_diagonal_rows'] = [int(r) for r in rows[:20]]
        kwargs['details'] = details
        kwargs.setdefault('error_code', 'SMOOTHER_ERROR')
        super().__init__(message, **kwargs)

class ConvergenceException(NumericsException):
    """Exception raised when the iteration fails to reach the tolerance"""
    def __init__(self, message, iterations=None, residual=None, **kwargs):
        details = kwargs.get('details', {})
        if iterations is not None:
            details['iterations'] = iterations
        if residual is not None:
            details['residual'] = residual
        kwargs['details'] = details
        kwargs.setdefault('error_code', 'CONVERGENCE_ERROR')
        kwargs.setdefault('exit_code', 2)
        super().__init__(message, **kwargs)
