"""Exception hierarchy shared by every fiberweb-rc package.

Each class also derives from the builtin that callers already catch
(``ValueError`` for bad input, ``RuntimeError`` for numerical trouble), so
``except (ValueError, RuntimeError)`` at an entry point sees all of them.
"""
from typing import List, Optional, Tuple


class FiberWebError(Exception):
    """Base class for all toolkit errors."""


class NumericalFailure(FiberWebError):
    """Marker base for failures of the numerics rather than of the input."""


class InvalidArgumentError(FiberWebError, ValueError):
    pass


class StabilityError(FiberWebError, ValueError):
    """Requested time step exceeds the explicit stability bound."""

    def __init__(self, dt: float, bound: float):
        super().__init__(f"time step {dt:.6g} s exceeds stability bound {bound:.6g} s")
        self.dt = dt
        self.bound = bound


class NumericalDegeneracyError(NumericalFailure, RuntimeError):
    """An element collapsed below the minimum admissible length."""

    def __init__(self, element_index: int, length: float):
        super().__init__(f"element {element_index} degenerated to length {length:.3e} m")
        self.element_index = element_index
        self.length = length


class DivergenceError(NumericalFailure, RuntimeError):
    """State became non-finite; carries the offending step index."""

    def __init__(self, step_index: int, detail: str = ""):
        msg = f"simulation diverged at step {step_index}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
        self.step_index = step_index


class NonConvergenceError(NumericalFailure, RuntimeError):
    def __init__(self, residual_energy: float, max_time: float):
        super().__init__(
            f"network did not settle within {max_time:.3g} s (residual kinetic energy {residual_energy:.3e} J)"
        )
        self.residual_energy = residual_energy
        self.max_time = max_time


class AssemblyError(FiberWebError, ValueError):
    def __init__(self, message: str, chord_pair: Optional[Tuple[int, int]] = None):
        if chord_pair is not None:
            message = f"{message} (chords {chord_pair[0]} and {chord_pair[1]})"
        super().__init__(message)
        self.chord_pair = chord_pair


class NumericalError(NumericalFailure, RuntimeError):
    """Ridge solve failed (singular or non-finite design matrix)."""


class UndefinedCapacityError(FiberWebError, ValueError):
    """Capacity is undefined because the target has zero variance."""


class TaskDivergenceError(NumericalFailure, RuntimeError):
    def __init__(self, order: int, step_index: int, value: float):
        super().__init__(f"NARMA-{order} diverged at step {step_index} (|y| = {abs(value):.3e})")
        self.order = order
        self.step_index = step_index


class InvalidGroupError(FiberWebError, ValueError):
    pass


class SchemaError(FiberWebError, ValueError):
    """A trace or report file does not match the expected layout."""


class ConfigError(FiberWebError, ValueError):
    def __init__(self, issues: List[str]):
        super().__init__("; ".join(issues) if issues else "invalid configuration")
        self.issues = list(issues)
