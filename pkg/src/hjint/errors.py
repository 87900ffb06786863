"""Exception types shared across the package."""


class SingularDivisionError(ArithmeticError):
    """Division by a series whose constant term is (numerically) zero.

    Usually means a chart was evaluated outside its validity region.
    """


class NewtonConvergenceError(RuntimeError):
    """The implicit step equations were not solved to tolerance."""


class SingularJacobianError(RuntimeError):
    """The Newton Jacobian is too ill-conditioned to trust."""


class ChartSelfTestError(ValueError):
    """A chart failed its identity self-test at construction."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class IntegrationError(RuntimeError):
    """A trajectory step failed; carries the failing step index."""

    def __init__(self, step_index, cause):
        super().__init__(f"step {step_index} failed: {cause}")
        self.step_index = step_index
        self.cause = cause


class ReferenceSolverError(RuntimeError):
    """The adaptive reference integrator could not reach the final time."""
