"""Exception hierarchy shared by all solvers."""


class ContactError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(ContactError, ValueError):
    pass


class NonFiniteError(ContactError, FloatingPointError):
    """A model or integrator produced NaN/Inf.

    ``index`` is the offending coordinate or step index, when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NewtonDiverged(ContactError):
    """Newton iteration failed to reach tolerance; ``trace`` holds residual norms."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class RegularityViolated(ContactError):
    """1 + D3 L_d vanishes or the relevant Hessian is singular."""


class DegenerateStep(ContactError):
    """A discrete Hamiltonian step hit a vanishing denominator."""


class CausticError(ContactError):
    """Propagated characteristics are no longer monotone over the grid."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DomainError(ContactError, ValueError):
    """Query point outside a tabulated grid (no extrapolation)."""


class StepError(ContactError):
    """Wraps a failure inside a multi-step run with the failing step index."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause
