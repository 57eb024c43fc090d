"""Custom exceptions for skewshadow."""

from typing import Any, Dict, Optional


class SkewShadowError(Exception):
    """Base exception for all skewshadow errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def __str__(self) -> str:
        if self.error_code:
            return f"[{self.error_code}] {self.message}"
        return self.message


class ParameterError(SkewShadowError):
    """Raised when model parameters or operation arguments are inadmissible."""

    def __init__(self, message: str, constraint: Optional[str] = None, **kwargs):
        details = kwargs.get("details", {})
        if constraint:
            details["constraint"] = constraint

        super().__init__(message, error_code="PARAMETER_ERROR", details=details)
        self.constraint = constraint


class ConfigurationError(SkewShadowError):
    """Raised when configuration is invalid or missing."""

    def __init__(self, message: str, config_key: Optional[str] = None, **kwargs):
        details = kwargs.get("details", {})
        if config_key:
            details["config_key"] = config_key

        super().__init__(message, error_code="CONFIGURATION_ERROR", details=details)
        self.config_key = config_key


class InstanceFormatError(SkewShadowError):
    """Raised when an instance file cannot be parsed."""

    def __init__(
        self,
        message: str,
        line_number: Optional[int] = None,
        path: Optional[str] = None,
        **kwargs,
    ):
        if line_number is not None:
            message = f"line {line_number}: {message}"

        details = kwargs.get("details", {})
        if line_number is not None:
            details["line_number"] = line_number
        if path:
            details["path"] = path

        super().__init__(message, error_code="INSTANCE_FORMAT_ERROR", details=details)
        self.line_number = line_number
        self.path = path


class SolverError(SkewShadowError):
    """Raised when a root bracket or bisection cannot be established."""

    def __init__(
        self,
        message: str,
        solver: Optional[str] = None,
        iterations: Optional[int] = None,
        **kwargs,
    ):
        details = kwargs.get("details", {})
        if solver:
            details["solver"] = solver
        if iterations is not None:
            details["iterations"] = iterations

        super().__init__(message, error_code="SOLVER_ERROR", details=details)
        self.solver = solver
        self.iterations = iterations


class ConsistencyError(SkewShadowError):
    """Raised when the pairwise statistic and the min-max oracle disagree."""

    def __init__(
        self,
        message: str,
        statistic: Optional[float] = None,
        oracle: Optional[float] = None,
        **kwargs,
    ):
        details = kwargs.get("details", {})
        if statistic is not None:
            details["statistic"] = statistic
        if oracle is not None:
            details["oracle"] = oracle

        super().__init__(message, error_code="CONSISTENCY_ERROR", details=details)
        self.statistic = statistic
        self.oracle = oracle
