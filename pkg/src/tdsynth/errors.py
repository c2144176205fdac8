"""Exception hierarchy.

Every exception carries a short machine-readable ``category`` used by the
command line front end when reporting failures.
"""


class SynthesisError(Exception):
    """Base class for all errors raised by :mod:`tdsynth`."""

    category = "error"


# polynomial arithmetic
class DegenerateDivisor(SynthesisError, ZeroDivisionError):
    category = "degenerate-divisor"


class DegenerateInput(SynthesisError, ValueError):
    category = "degenerate-input"


class NumericalFailure(SynthesisError, ArithmeticError):
    category = "numerical-failure"


# transfer functions / pole placement
class AlgebraicLoop(SynthesisError, ValueError):
    category = "algebraic-loop"


class DistinctnessViolation(SynthesisError, ValueError):
    category = "distinctness-violation"


class NotCoprime(SynthesisError, ValueError):
    category = "not-coprime"


class DegreeDeficit(SynthesisError, ValueError):
    category = "degree-deficit"


class QDegreeViolation(SynthesisError, ValueError):
    category = "q-degree-violation"


class DegenerateController(SynthesisError, ValueError):
    category = "degenerate-controller"


# modal decomposition
class PoleCollision(SynthesisError, ValueError):
    category = "pole-collision"


class ImproperSignal(SynthesisError, ValueError):
    category = "improper-signal"


class ScalingFailure(SynthesisError, ValueError):
    category = "scaling-failure"


# relaxations
class InfeasibleBoundSpec(SynthesisError, ValueError):
    category = "infeasible-bound-spec"


class ApproximationBudgetExceeded(SynthesisError, RuntimeError):
    category = "approximation-budget-exceeded"


class OrderDeficit(SynthesisError, ValueError):
    category = "order-deficit"


class InvalidObjective(SynthesisError, ValueError):
    category = "invalid-objective"


class UnknownMode(SynthesisError, IndexError):
    category = "unknown-mode"


# simulation
class UnstableLoop(SynthesisError, ValueError):
    category = "unstable-loop"


class StepTooCoarse(SynthesisError, ValueError):
    category = "step-too-coarse"


# configuration
class ConfigError(SynthesisError, ValueError):
    """Invalid configuration file; ``line`` is 1-based when known."""

    category = "config"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Infeasible(SynthesisError, RuntimeError):
    """The relaxed synthesis problem has no certified solution."""

    category = "infeasible"

    def __init__(self, message, status=None):
        self.status = status
        super().__init__(message)
