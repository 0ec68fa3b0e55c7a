"""
Error Types

Exception hierarchy shared by every module. The CLI maps these onto exit codes.

Author: CodeWithEzeh
Date: November 2025
"""


class DisplayError(Exception):
    """Base class for all errors raised by the toolkit."""


class InvalidArgumentError(DisplayError, ValueError):
    """A numeric argument or type invariant is violated."""


class DimensionError(DisplayError, ValueError):
    """Array shapes do not agree."""


class ConfigError(DisplayError):
    """
    A configuration file could not be used.

    Args:
        message (str): Human readable description
        key (str): Offending configuration key, if known
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ProjectionError(DisplayError):
    """
    The projection operator could not be built.

    Args:
        message (str): Human readable description
        row (int): Superpixel row index that failed
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class SolverDivergedError(DisplayError):
    """
    An iterate became non-finite.

    Args:
        message (str): Human readable description
        iteration (int): Outer iteration at which the solver stopped
    """

    def __init__(self, message, iteration):
        super().__init__(message)
        self.iteration = iteration


class AnalysisError(DisplayError):
    """An analysis could not produce a result (no edge, bad sweep kind)."""


class TileTooLargeError(AnalysisError):
    """The operator is too large to densify for singular values."""


class SweepPointError(AnalysisError):
    """
    A sweep grid point failed.

    Args:
        point (dict): Parameter values of the failed grid point
        cause (Exception): The inner error
    """

    def __init__(self, point, cause):
        super().__init__(f"sweep point {point} failed: {cause}")
        self.point = point
        self.cause = cause


class ImageIOError(DisplayError, OSError):
    """An image file could not be read or written."""
