"""
Partitioned time stepping of body and liquid.

Each step n runs sub-iterations k = 1, 2, ... starting from the previous
state: an explicit body update with the gyroscopic and torque terms lagged
at k−1, relaxation of the angular velocity, then the linearized liquid
problem with boundary velocity ω × x. The loop ends when the relaxed
angular velocity moves less than the tolerance.
"""
import logging
from typing import Callable, Optional

import numpy as np

from analysis.derived import derive
from cavity_errors import ConfigError, PecletLimitError, SubIterationError
from coupling.states import BodyState, CoupledState, FlowState
from coupling.time_series import TimeSeries
from coupling.torque import traction_torque
from fem.assembly import OperatorAssembler
from fem.boundary import boundary_values
from fem.fields import relative_velocity
from fem.function_spaces import build_spaces
from fem.saddle_point import solve_saddle_point
from meshing.base_mesh import Mesh
from rigid_body.inertia import InertiaTensor, liquid_inertia
from validators.solver_validators import BodyProblemInertia, RelaxAgainst, SolverSettings

logger = logging.getLogger(__name__)

StepCallback = Callable[[CoupledState], None]


def body_step(inertia, omega_prev, torque_prev, torque_iterate, theta: float, time_step: float,
              omega_iterate=None, gyroscopic: str = 'midpoint') -> np.ndarray:
    """
    ω* from I(ω* − ω_{n−1})/τ + G = θ T^{k−1} + (1 − θ) T_{n−1}.

    G is ω_θ × Iω_θ at ω_θ = θω^{k−1} + (1 − θ)ω_{n−1} (`midpoint`) or the
    θ-average of the endpoint gyroscopic terms (`trapezoidal`). Every term on
    the right is lagged, so the update is explicit.
    """
    matrix = np.asarray(getattr(inertia, 'matrix', inertia), dtype=float)
    omega_prev = np.asarray(omega_prev, dtype=float)
    omega_iterate = omega_prev if omega_iterate is None else np.asarray(omega_iterate, dtype=float)
    if gyroscopic == 'midpoint':
        mid = theta * omega_iterate + (1 - theta) * omega_prev
        gyro = np.cross(mid, matrix @ mid)
    elif gyroscopic == 'trapezoidal':
        gyro = (theta * np.cross(omega_iterate, matrix @ omega_iterate)
                + (1 - theta) * np.cross(omega_prev, matrix @ omega_prev))
    else:
        raise ValueError(f'Unknown gyroscopic form {gyroscopic!r}')
    torque = theta * np.asarray(torque_iterate, dtype=float) + (1 - theta) * np.asarray(torque_prev, dtype=float)
    return omega_prev + time_step * np.linalg.solve(matrix, torque - gyro)


class CoupledSolver:
    """
    Liquid-filled rigid body on one mesh.

    `body_inertia` is I_B; the total inertia I = I_B + I_L is used for all
    derived quantities and, with `body_problem_inertia = total`, in the body
    update as well.
    """

    def __init__(self, mesh: Mesh, body_inertia: InertiaTensor, settings: SolverSettings, rho: float, nu: float):
        if rho <= 0 or nu <= 0:
            raise ConfigError(f'Density and kinematic viscosity must be positive, got rho={rho}, nu={nu}')
        self.mesh = mesh
        self.settings = settings
        self.rho = rho
        self.nu = nu
        self.mu = rho * nu
        self.spaces = build_spaces(mesh)
        self.assembler = OperatorAssembler(self.spaces, settings.convection.value)
        self.liquid = liquid_inertia(mesh, rho)
        self.body_inertia = body_inertia
        self.total_inertia = InertiaTensor(body_inertia.matrix + self.liquid.matrix)
        if settings.body_problem_inertia is BodyProblemInertia.TOTAL:
            self.step_inertia = self.total_inertia.matrix
        else:
            if body_inertia.moments[0] <= 0:
                raise ConfigError(f'Body inertia must be positive definite for the body update, got {body_inertia}')
            self.step_inertia = body_inertia.matrix
        edges = mesh.vertices[mesh.edges]
        self.h_max = float(np.linalg.norm(edges[:, 1] - edges[:, 0], axis=1).max())

    def peclet(self, w: np.ndarray) -> float:
        """Mesh Péclet number max|w|·h/(2ν)."""
        speed = np.linalg.norm(self.spaces.nodal_values(w), axis=1).max() if len(w) else 0.0
        return float(speed * self.h_max / (2.0 * self.nu))

    def liquid_step(self, u_prev: np.ndarray, omega, u_iterate: np.ndarray, forcing: Optional[np.ndarray] = None,
                    t: float = 0.0):
        """
        Solve ρ(u − u_{n−1})/τ + ρω × u + ρ(w·∇)u − div T(u, p) = f with
        w = u^{k−1} − ω × x and u = ω × x on the wall.

        The returned p is the reduced pressure p − ρ|ω × x|²/2 (zero mean).
        Returns the flow state and the relative residual of the linear solve.
        """
        settings = self.settings
        w = relative_velocity(self.assembler, u_iterate, omega)
        peclet = self.peclet(w)
        if peclet > settings.peclet_limit:
            raise PecletLimitError(peclet, settings.peclet_limit)
        operator = self.assembler.assemble(self.rho, self.mu, omega, w)
        # The centrifugal force ρω × (ω × x) is a gradient; it goes into the reduced pressure
        rhs = operator.M @ u_prev / settings.time_step + operator.S @ self.spaces.rigid_field(omega)
        if forcing is not None:
            rhs = rhs + forcing
        dofs, values = boundary_values(self.spaces, omega)
        solution = solve_saddle_point(operator.momentum_matrix(settings.time_step), operator.B, operator.mean,
                                      rhs, dofs, values)
        return FlowState(u=solution.u, p=solution.p, t=t), solution.residual

    def torque(self, u: np.ndarray, omega, u_previous: Optional[np.ndarray] = None,
               u_iterate: Optional[np.ndarray] = None) -> np.ndarray:
        """Wall torque; with `u_iterate` the convection uses the same lagged field as the liquid solve."""
        return traction_torque(self.spaces, u, omega, self.rho, u_previous=u_previous,
                               time_step=None if u_previous is None else self.settings.time_step,
                               convection=self.settings.convection.value, u_iterate=u_iterate)

    def step(self, state: CoupledState, warm_start: Optional[CoupledState] = None,
             forcing: Optional[np.ndarray] = None) -> CoupledState:
        """Advance one time step; `warm_start` seeds the sub-iterations instead of the previous state."""
        settings = self.settings
        tau, theta, sigma = settings.time_step, settings.theta, settings.relaxation
        omega_prev, u_prev, torque_prev = state.body.omega, state.flow.u, state.torque
        seed = warm_start or state
        omega_k, u_k, torque_k = seed.body.omega, seed.flow.u, seed.torque
        t = (state.step + 1) * tau

        increment = np.inf
        residual = 0.0
        for k in range(1, settings.max_subiters + 1):
            omega_star = body_step(self.step_inertia, omega_prev, torque_prev, torque_k, theta, tau,
                                   omega_iterate=omega_k, gyroscopic=settings.gyroscopic.value)
            anchor = omega_k if settings.relax_against is RelaxAgainst.PREVIOUS_ITERATE else omega_prev
            omega_new = sigma * omega_star + (1 - sigma) * anchor
            flow, residual = self.liquid_step(u_prev, omega_new, u_k, forcing=forcing, t=t)
            torque_new = self.torque(flow.u, omega_new, u_previous=u_prev, u_iterate=u_k)
            increment = float(np.linalg.norm(omega_new - omega_k))
            logger.debug(f'step {state.step + 1} k={k}: |dw|={increment:.3e}, residual={residual:.2e}')
            omega_k, u_k, torque_k = omega_new, flow.u, torque_new
            if increment < settings.tolerance:
                return CoupledState(flow=flow, body=BodyState(omega=omega_new, t=t), torque=torque_new,
                                    step=state.step + 1, subiterations=k, residual=residual)
        raise SubIterationError(state.step + 1, settings.max_subiters, increment)

    def initial_state(self, omega0, v0: Optional[np.ndarray] = None, tolerance: float = 1e-8) -> CoupledState:
        """
        State at t = 0 with u₀ = v₀ + ω₀ × x. v₀ must vanish on the wall and be
        orthogonal to every linear pressure (weak divergence).
        """
        omega0 = np.asarray(omega0, dtype=float)
        n = self.spaces.n_velocity
        v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float)
        if v0.shape != (n,):
            raise ConfigError(f'Initial relative velocity has {v0.size} entries, expected {n}')
        scale = max(np.abs(v0).max(), 1.0)
        wall = np.abs(v0[self.spaces.boundary_dofs]).max() if len(self.spaces.boundary_dofs) else 0.0
        if wall > tolerance * scale:
            raise ConfigError(f'Initial relative velocity is {wall:.3e} on the cavity wall, expected 0')
        divergence = np.abs(self.assembler.divergence @ v0).max()
        if divergence > tolerance * scale * self.mesh.volumes.max():
            raise ConfigError(f'Initial relative velocity is not divergence-free (weak divergence {divergence:.3e})')
        u0 = v0 + self.spaces.rigid_field(omega0)
        return CoupledState(
            flow=FlowState(u=u0, p=np.zeros(self.spaces.n_pressure), t=0.0),
            body=BodyState(omega=omega0, t=0.0),
            torque=self.torque(u0, omega0),
        )

    def record(self, state: CoupledState) -> dict:
        derived = derive(self.assembler, state.flow.u, state.body.omega, self.total_inertia, self.rho)
        p, q, r = self.total_inertia.to_frame(state.body.omega)
        ap, bq, cr = derived.momentum_components
        return {
            't': state.t, 'p': p, 'q': q, 'r': r,
            'v_l2': derived.v_l2, 'gradv_l2': derived.gradv_l2,
            'E_total': derived.total_energy, 'E_liquid': derived.liquid_energy,
            'Ap': ap, 'Bq': bq, 'Cr': cr,
            'subiters': state.subiterations, 'residual': state.residual,
        }

    def run(self, omega0, v0: Optional[np.ndarray] = None, on_step: Optional[StepCallback] = None) -> TimeSeries:
        """⌈T/τ⌉ steps from (ω₀, v₀); one record per time level including t = 0."""
        settings = self.settings
        series = TimeSeries(self.total_inertia.moments, viscosity=self.mu, time_step=settings.time_step,
                            frame=self.total_inertia.frame)
        state = self.initial_state(omega0, v0)
        series.append(self.record(state))
        logger.info(
            f'Running {settings.n_steps} steps of {settings.time_step:g} on {self.mesh.n_tets} tets '
            f'({self.spaces.n_velocity} velocity dofs), moments {self.total_inertia.principal}'
        )
        for _ in range(settings.n_steps):
            state = self.step(state)
            series.append(self.record(state))
            if on_step is not None:
                on_step(state)
        logger.info(f'Finished at t={state.t:g}: omega={np.round(state.body.omega, 6)}')
        return series
