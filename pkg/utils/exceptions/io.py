from utils.exceptions.base import BaseAMGException


class InputOutputException(BaseAMGException):
    """Base exception for file reading and writing errors"""
    def __init__(self, message, path=None, **kwargs):
        details = kwargs.get('details', {})
        if path is not None:
            details['path'] = str(path)
        kwargs['details'] = details
        kwargs.setdefault('error_code', 'IO_ERROR')
        kwargs.setdefault('exit_code', 3)
        super().__init__(message, **kwargs)

class MatrixMarketException(InputOutputException):
    """Exception raised for malformed Matrix Market files"""
    def __init__(self, message, line_number=None, **kwargs):
        details = kwargs.get('details', {})
        if line_number is not None:
            details['line'] = line_number
            message = f"line {line_number}: {message}"
        kwargs['details'] = details
        self.line_number = line_number
        kwargs.setdefault('error_code', 'MATRIX_MARKET_PARSE_ERROR')
        super().__init__(message, **kwargs)

class ConfigFileException(InputOutputException):
    """Exception raised for malformed key=value config files"""
    def __init__(self, message, line_number=None, **kwargs):
        details = kwargs.get('details', {})
        if line_number is not None:
            details['line'] = line_number
            message = f"line {line_number}: {message}"
        kwargs['details'] = details
        self.line_number = line_number
        kwargs.setdefault('error_code', 'CONFIG_FILE_ERROR')
        kwargs.setdefault('suggestion', 'Use one key=value pair per line')
        super().__init__(message, **kwargs)
