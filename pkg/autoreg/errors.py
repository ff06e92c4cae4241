"""Exception hierarchy shared by the library, the CLI and the HTTP API.

Every error carries the CLI exit status it maps to:
1 degenerate/numerical, 2 usage/config, 3 I/O.
"""
from typing import List, Optional


class AutoregError(Exception):
    exit_code = 1


class InvalidInputError(AutoregError):
    exit_code = 2


class AsymmetricMatrixError(InvalidInputError):
    pass


class LengthMismatchError(InvalidInputError):
    pass


class DecompositionError(AutoregError):
    pass


class SingularMatrixError(AutoregError):
    def __init__(self, message: str, smallest: float):
        super().__init__(message)
        self.smallest = smallest


class DegenerateDataError(AutoregError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        # IterationTrace up to the failing step, when raised from estimate_alpha
        self.trace = trace


class IllPosedError(DegenerateDataError):
    pass


class ExpectationFormError(AutoregError):
    pass


class ConfigError(AutoregError):
    exit_code = 2

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        self.violations = list(violations or [])
        if self.violations:
            message = message + ":\n" + "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(message)


class PlotError(AutoregError):
    exit_code = 2


class DataFileError(AutoregError):
    exit_code = 3
