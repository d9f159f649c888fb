"""
Exceptions - error hierarchy shared by every package under engine/
"""


class BWVIError(Exception):
    """Base class for all library errors"""


class DimensionMismatch(BWVIError, ValueError):
    """Operands have incompatible shapes"""


class NotSymmetric(BWVIError, ValueError):
    """A matrix expected to be symmetric is not, beyond tolerance"""


class NotPositiveDefinite(BWVIError, ArithmeticError):
    """A matrix expected to be positive definite is (numerically) degenerate"""


class NotPositiveSemiDefinite(BWVIError, ArithmeticError):
    """A matrix expected to be PSD has an eigenvalue below the clamp tolerance"""


class ConvergenceFailure(BWVIError, ArithmeticError):
    """An iterative linear algebra routine hit its iteration cap"""


class DegenerateVariance(BWVIError, ArithmeticError):
    """A variance ratio was requested with a non-positive denominator"""


class PreconditionViolated(BWVIError, ValueError):
    """Inputs fall outside the region where a closed-form bound is valid"""


class NonPdHessianAtMode(BWVIError, ArithmeticError):
    """Laplace approximation found a mode with a non-positive-definite Hessian"""


class NoConvergence(BWVIError, ArithmeticError):
    """Mode search exhausted its iteration budget"""


class UnknownPreset(BWVIError, KeyError):
    """Requested experiment preset does not exist"""

    def __str__(self) -> str:
        return Exception.__str__(self)


class SpecError(BWVIError, ValueError):
    """Experiment spec or run configuration failed validation"""
