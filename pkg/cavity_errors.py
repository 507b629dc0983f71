"""Exception types raised by the simulator and the exit codes the CLI maps them to."""


class CavityError(Exception):
    """Base class for all simulator errors."""
    exit_code = 1


class ConfigError(CavityError, ValueError):
    exit_code = 2


class MeshValidationError(CavityError, ValueError):
    """A mesh violates orientation, closure or index invariants."""
    exit_code = 2


class RefinementLimitError(CavityError, ValueError):
    exit_code = 2


class InfeasibleInertiaError(CavityError, ValueError):
    """Requested total inertia would force an indefinite body tensor."""
    exit_code = 2


class SolverError(CavityError, RuntimeError):
    exit_code = 3


class NonlinearSolveError(SolverError):
    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class SubIterationError(SolverError):
    def __init__(self, step: int, iterations: int, last_increment: float):
        super().__init__(
            f"Coupling sub-iterations did not converge at step {step}: "
            f"{iterations} iterations, last |dw| = {last_increment:.3e}"
        )
        self.step = step
        self.iterations = iterations
        self.last_increment = last_increment


class SingularSystemError(SolverError):
    pass


class PecletLimitError(SolverError):
    def __init__(self, peclet: float, limit: float):
        super().__init__(f"Mesh Peclet number {peclet:.3g} exceeds limit {limit:.3g}; refine the mesh or raise viscosity")
        self.peclet = peclet
        self.limit = limit


class InvariantViolation(CavityError):
    exit_code = 4
