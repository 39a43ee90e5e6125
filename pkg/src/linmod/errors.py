"""Exception types raised across the package."""


class LinmodError(Exception):
    pass


class ShapeError(LinmodError, ValueError):
    pass


class ValidationError(LinmodError, ValueError):
    pass


class SingularMatrixError(LinmodError, ArithmeticError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class RankDeficientError(LinmodError, ArithmeticError):
    def __init__(self, message, rank=None, cols=None):
        super().__init__(message)
        self.rank = rank
        self.cols = cols
