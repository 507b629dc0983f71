"""
Experiment orchestration.

Builds the mesh and the coupled solver from an ExperimentConfig, runs the
requested experiment and writes `timeseries.csv`, `report.txt` and the SVG
traces into the output directory. The report is written on every exit path.
"""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from rich.console import Console
from rich.markup import escape
from rich.table import Table as RichTable

from analysis.conditions import ConditionReport, attainability_report, predict_rstar, stability_margin
from analysis.derived import derive
from analysis.fits import decay_fit, detect_tc, estimate_final_omega, flip_over_report, power_law_fit
from analysis.invariants import check_energy_inequality, check_momentum_conservation
from cavity_constants import FLIP_OVER_WINDOW, INITIAL_DATA_CASES, REFERENCE_TC, REFERENCE_TC_EXPONENT
from cavity_errors import CavityError, ConfigError, InvariantViolation
from cavity_plots import plot_sweep, write_plots
from coupling.coupled_solver import CoupledSolver
from coupling.initial_data import (bounding_radius, cylinder_radius, ellipsoid_radius, radial_profile_velocity,
                                   zero_momentum_velocity)
from coupling.time_series import TimeSeries
from experiment_validator import ExperimentConfig, ExperimentKind, VelocityMode
from meshing.base_mesh import Mesh
from meshing.cylinder_mesher import generate_cylinder_mesh
from meshing.ellipsoid_mesher import generate_ellipsoid_mesh
from meshing.mesh_io import load_mesh
from rigid_body.inertia import liquid_inertia, shell_inertia
from validators.shape_validators import MeshSpec, ShapeKind

logger = logging.getLogger(__name__)

THREADS_ENV = 'SPINNING_CAVITY_THREADS'


def build_mesh(spec: MeshSpec) -> Mesh:
    shape = spec.shape
    if shape.kind is ShapeKind.ELLIPSOID:
        return generate_ellipsoid_mesh(shape.semi_axes, spec.refinement)
    if shape.kind is ShapeKind.CYLINDER:
        return generate_cylinder_mesh(shape.radius, shape.height, spec.refinement)
    return load_mesh(shape.path)


def profile_radius(spec: MeshSpec, mesh: Mesh):
    """Normalized radius s̄ used by the radial-profile initial velocity."""
    shape = spec.shape
    if shape.kind is ShapeKind.ELLIPSOID:
        return ellipsoid_radius(shape.semi_axes)
    if shape.kind is ShapeKind.CYLINDER:
        return cylinder_radius(shape.radius, shape.height)
    return bounding_radius(mesh.vertices)


class Simulation:
    """Mesh, body inertia and coupled solver of one configuration."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.mesh = build_mesh(config.mesh)
        liquid = liquid_inertia(self.mesh, config.liquid.density)
        inertia = config.body.inertia
        self.body_inertia = shell_inertia(inertia.mode.value, inertia.values, liquid)
        self.solver = CoupledSolver(self.mesh, self.body_inertia, config.solver,
                                    config.liquid.density, config.liquid.viscosity)

    @property
    def moments(self) -> Tuple[float, float, float]:
        return self.solver.total_inertia.principal

    def initial_velocity(self, omega0) -> Optional[np.ndarray]:
        mode = self.config.initial.v_mode
        if mode is VelocityMode.ZERO:
            return None
        radius = profile_radius(self.config.mesh, self.mesh)
        if mode is VelocityMode.RADIAL_PROFILE:
            return radial_profile_velocity(self.solver.assembler, omega0, radius)
        return zero_momentum_velocity(self.solver.assembler, omega0, self.solver.total_inertia,
                                      self.config.liquid.density, radius)

    def run(self, omega0) -> TimeSeries:
        return self.solver.run(omega0, self.initial_velocity(omega0))


def format_value(value: Any) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if value is None:
        return 'none'
    if isinstance(value, (float, np.floating)):
        return f'{float(value):.10g}'
    if isinstance(value, (list, tuple, np.ndarray)):
        return '[' + ', '.join(format_value(v) for v in value) + ']'
    return str(value)


class Report:
    """Ordered `key: value` entries, written as report.txt and shown as a table."""

    def __init__(self):
        self.entries: List[Tuple[str, Any]] = []

    def add(self, key: str, value: Any) -> None:
        self.entries.append((key, value))

    def lines(self) -> List[str]:
        return [f'{key}: {format_value(value)}' for key, value in self.entries]

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text('\n'.join(self.lines()) + '\n', encoding='utf-8')
        return path

    def table(self, title: str) -> RichTable:
        table = RichTable(title=title)
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", style="green")
        for key, value in self.entries:
            table.add_row(key, escape(format_value(value)))
        return table


def add_condition_report(report: Report, prefix: str, conditions: ConditionReport) -> None:
    report.add(f'{prefix}.case', conditions.case)
    report.add(f'{prefix}.moments', conditions.moments)
    report.add(f'{prefix}.omega_infinity', conditions.omega)
    report.add(f'{prefix}.energy', conditions.energy)
    for check in conditions.inequalities:
        key = f'{prefix}.{check.name}'
        report.add(f'{key}.left', check.left)
        report.add(f'{key}.right', check.right)
        report.add(f'{key}.verdict', check.verdict)
        if check.left_interval is not None:
            report.add(f'{key}.left_interval', check.left_interval)
            report.add(f'{key}.right_interval', check.right_interval)
        if check.printed_left is not None or check.printed_right is not None:
            report.add(f'{key}.printed', (check.printed_left, check.printed_right))
            report.add(f'{key}.reproduced', check.reproduced)
    report.add(f'{prefix}.verdict', conditions.verdict)
    report.add(f'{prefix}.prediction', conditions.prediction)


def published_attainability_reports() -> Dict[str, ConditionReport]:
    """Condition reports of the published initial-data experiments, from the printed inputs."""
    reports = {}
    for name, case in INITIAL_DATA_CASES.items():
        reports[name] = attainability_report(case['energy'], case['omega'], case['moments'],
                                             input_decimals=2, printed=case['printed'])
    return reports


def sweep_workers(n_points: int) -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return max(n_points, 1)
    try:
        workers = int(value)
    except ValueError as error:
        raise ConfigError(f'{THREADS_ENV} must be a positive integer, got {value!r}') from error
    if workers < 1:
        raise ConfigError(f'{THREADS_ENV} must be a positive integer, got {value!r}')
    return min(workers, max(n_points, 1))


def run_point(config_data: Dict[str, Any], nu: float, directory: str) -> Dict[str, Any]:
    """One sweep point: run at viscosity `nu` and summarize. Top-level so worker processes can pickle it."""
    config = ExperimentConfig(**config_data)
    config.liquid.viscosity = nu
    simulation = Simulation(config)
    series = simulation.run(config.initial.angular_velocity)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    series.to_csv(directory / 'timeseries.csv')
    if config.output.plots:
        write_plots(series, directory)
    omega_bar = estimate_final_omega(series, check=False)
    try:
        t_c = detect_tc(series, omega_bar=omega_bar)
    except ValueError as error:
        logger.warning(f'nu={nu:g}: {error}')
        t_c = math.nan
    flip = flip_over_report(series, omega_bar=omega_bar)
    energy = check_energy_inequality(series, tolerance=config.checks.energy_tolerance)
    momentum = check_momentum_conservation(series, tolerance=config.checks.momentum_tolerance)
    return {
        'nu': nu,
        't_c': t_c,
        'p_final': float(omega_bar[0]),
        'q_final': float(omega_bar[1]),
        'r_final': float(omega_bar[2]),
        'sign_r0': flip.sign_r0,
        'sign_r_final': flip.sign_r_final,
        'cos_theta_final': flip.cos_theta_final,
        'flipped': flip.flipped,
        'energy_passed': energy.passed,
        'momentum_passed': momentum.passed,
    }


class ExperimentRunner:
    def __init__(self, config: Optional[ExperimentConfig] = None, output: Optional[Union[str, Path]] = None,
                 console: Optional[Console] = None):
        self.config = config
        if output is None:
            output = config.output.directory if config is not None else 'results'
        self.output = Path(output)
        self.console = console or Console()
        self.report = Report()

    def execute(self, handler: Optional[Callable[[], bool]] = None) -> int:
        """
        Run `handler` (default: the configured experiment kind) and write the
        report. Returns 0; raises InvariantViolation when an enabled check
        fails and re-raises solver errors after the report is on disk.
        """
        if handler is None:
            handler = {
                ExperimentKind.RUN: self.run,
                ExperimentKind.SWEEP_NU: self.sweep_nu,
                ExperimentKind.ATTAINABILITY: self.attainability,
                ExperimentKind.STABILITY: self.stability,
                ExperimentKind.FLIP_OVER: self.flip_over,
            }[self.config.kind]
            self.report.add('kind', self.config.kind)
        self.output.mkdir(parents=True, exist_ok=True)
        try:
            passed = handler()
        except CavityError as error:
            self.report.add('status', 'error')
            self.report.add('error', f'{type(error).__name__}: {error}')
            self.finish()
            raise
        self.report.add('status', 'ok' if passed else 'invariant_violation')
        self.finish()
        if not passed:
            raise InvariantViolation(f'Invariant checks failed; see {self.output / "report.txt"}')
        return 0

    def finish(self) -> None:
        path = self.report.write(self.output / 'report.txt')
        self.console.print(self.report.table('Experiment Report'))
        logger.info(f'Report written to {path}')

    def _save(self, series: TimeSeries, directory: Optional[Path] = None) -> None:
        directory = directory or self.output
        series.to_csv(directory / 'timeseries.csv')
        if self.config.output.plots:
            write_plots(series, directory)

    def _add_setup(self, simulation: Simulation, omega0) -> None:
        config = self.config
        self.report.add('mesh.tets', simulation.mesh.n_tets)
        self.report.add('mesh.velocity_dofs', simulation.solver.spaces.n_velocity)
        self.report.add('liquid.density', config.liquid.density)
        self.report.add('liquid.viscosity', config.liquid.viscosity)
        self.report.add('inertia.liquid', simulation.solver.liquid.principal)
        self.report.add('inertia.total', simulation.moments)
        self.report.add('solver.time_step', config.solver.time_step)
        self.report.add('solver.final_time', config.solver.final_time)
        self.report.add('initial.omega', list(omega0))
        self.report.add('initial.v_mode', config.initial.v_mode)

    def _add_checks(self, series: TimeSeries) -> bool:
        checks = self.config.checks
        passed = True
        if checks.energy:
            energy = check_energy_inequality(series, tolerance=checks.energy_tolerance)
            self.report.add('check.energy.passed', energy.passed)
            self.report.add('check.energy.max_increase', energy.max_value)
            self.report.add('check.energy.violations', len(energy.violations))
            self.report.add('check.energy.integrated_passed', energy.details['integrated_passed'])
            self.report.add('check.energy.max_integrated_excess', energy.details['max_integrated_excess'])
            passed = passed and energy.passed
        if checks.momentum:
            momentum = check_momentum_conservation(series, tolerance=checks.momentum_tolerance)
            self.report.add('check.momentum.passed', momentum.passed)
            self.report.add('check.momentum.max_drift', momentum.max_value)
            passed = passed and momentum.passed
        return passed

    def _dump_operators(self, simulation: Simulation, omega0) -> None:
        directory = self.config.output.dump_operators
        if directory is None:
            return
        solver = simulation.solver
        operator = solver.assembler.assemble(solver.rho, solver.mu, omega0)
        solver.assembler.dump(operator, directory)
        logger.info(f'Operator blocks written to {directory}')

    def run(self) -> bool:
        simulation = Simulation(self.config)
        omega0 = self.config.initial.angular_velocity
        self._add_setup(simulation, omega0)
        self._dump_operators(simulation, omega0)
        series = simulation.run(omega0)
        self._save(series)

        omega = series.omega
        self.report.add('steps', len(series) - 1)
        self.report.add('omega.initial', omega[0])
        self.report.add('omega.final', omega[-1])
        self.report.add('omega_infinity.final', series.omega_infinity[-1])
        self.report.add('energy.initial', series.column('E_total')[0])
        self.report.add('energy.final', series.column('E_total')[-1])
        self.report.add('max_subiterations', int(series.column('subiters').max()))
        omega_bar = estimate_final_omega(series, check=False)
        self.report.add('omega.final_mean', omega_bar)
        try:
            self.report.add('t_c', detect_tc(series, omega_bar=omega_bar))
        except ValueError as error:
            self.report.add('t_c', f'undefined ({error})')
        flip = flip_over_report(series, omega_bar=omega_bar)
        self.report.add('cos_theta.initial', flip.cos_theta0)
        self.report.add('cos_theta.final', flip.cos_theta_final)
        if simulation.solver.total_inertia.is_isotropic():
            try:
                fit = decay_fit(series)
                self.report.add('decay.rate', fit['rate'])
                self.report.add('decay.c2', fit['c2'])
                self.report.add('decay.r_squared', fit['r_squared'])
            except ValueError as error:
                self.report.add('decay.rate', f'undefined ({error})')
        return self._add_checks(series)

    def _sweep(self, viscosities: Sequence[float]) -> pd.DataFrame:
        data = self.config.model_dump(mode='json')
        directories = [str(self.output / f'nu_{nu:g}') for nu in viscosities]
        workers = sweep_workers(len(viscosities))
        logger.info(f'Sweeping {len(viscosities)} viscosities on {workers} worker(s)')
        if workers == 1:
            points = [run_point(data, nu, directory) for nu, directory in zip(viscosities, directories)]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                points = list(pool.map(run_point, [data] * len(viscosities), viscosities, directories))
        frame = pd.DataFrame(points)
        frame.to_csv(self.output / 'sweep.csv', index=False, float_format='%.17g', lineterminator='\n')
        return frame

    def sweep_nu(self) -> bool:
        viscosities = self.config.sweep.viscosities
        frame = self._sweep(viscosities)
        table = RichTable(title="Time to Equilibrium")
        table.add_column("nu", style="cyan")
        table.add_column("t_c", style="green")
        table.add_column("reference t_c", style="yellow")
        for row in frame.itertuples():
            reference = REFERENCE_TC.get(row.nu)
            self.report.add(f'nu={row.nu:g}.t_c', row.t_c)
            self.report.add(f'nu={row.nu:g}.omega_final', (row.p_final, row.q_final, row.r_final))
            if reference is not None:
                self.report.add(f'nu={row.nu:g}.reference_t_c', reference[0])
            table.add_row(f'{row.nu:g}', format_value(row.t_c), format_value(reference[0] if reference else None))
        self.console.print(table)

        valid = frame[np.isfinite(frame['t_c'])]
        if len(valid) >= 2:
            points = list(zip(valid['nu'], valid['t_c']))
            self.report.add('power_law.exponent', power_law_fit(points))
            self.report.add('power_law.exponent_loglog', power_law_fit(points, method='loglog'))
            if self.config.output.plots:
                plot_sweep(valid['nu'], valid['t_c'], 't_c', self.output / 't_c.svg')
        else:
            self.report.add('power_law.exponent', 'undefined (fewer than two finite t_c)')
        self.report.add('power_law.reference_exponent', REFERENCE_TC_EXPONENT)
        return self._sweep_checks(frame)

    def flip_over(self) -> bool:
        frame = self._sweep(self.config.sweep.viscosities)
        table = RichTable(title="Flip-over")
        table.add_column("nu", style="cyan")
        table.add_column("sign r(0)", style="green")
        table.add_column("sign r_final", style="green")
        table.add_column("cos theta final", style="yellow")
        for row in frame.itertuples():
            self.report.add(f'nu={row.nu:g}.sign_r0', row.sign_r0)
            self.report.add(f'nu={row.nu:g}.sign_r_final', row.sign_r_final)
            self.report.add(f'nu={row.nu:g}.r_final', row.r_final)
            self.report.add(f'nu={row.nu:g}.cos_theta_final', row.cos_theta_final)
            self.report.add(f'nu={row.nu:g}.flipped', bool(row.flipped))
            table.add_row(f'{row.nu:g}', str(row.sign_r0), str(row.sign_r_final), format_value(row.cos_theta_final))
        self.console.print(table)
        self.report.add('reference_transition_window', FLIP_OVER_WINDOW)
        return self._sweep_checks(frame)

    def _sweep_checks(self, frame: pd.DataFrame) -> bool:
        checks = self.config.checks
        passed = True
        if checks.energy:
            passed = passed and bool(frame['energy_passed'].all())
            self.report.add('check.energy.passed', bool(frame['energy_passed'].all()))
        if checks.momentum:
            passed = passed and bool(frame['momentum_passed'].all())
            self.report.add('check.momentum.passed', bool(frame['momentum_passed'].all()))
        return passed

    def attainability(self) -> bool:
        """Condition report for the configured system's discrete initial state."""
        config = self.config
        simulation = Simulation(config)
        omega0 = config.initial.angular_velocity
        self._add_setup(simulation, omega0)
        solver = simulation.solver
        state = solver.initial_state(omega0, simulation.initial_velocity(omega0))
        derived = derive(solver.assembler, state.flow.u, state.body.omega, solver.total_inertia, config.liquid.density)
        energy = config.attainability.energy if config.attainability.energy is not None else derived.liquid_energy
        conditions = attainability_report(energy, derived.components, simulation.moments,
                                          input_decimals=config.attainability.input_decimals)
        add_condition_report(self.report, 'attainability', conditions)
        return True

    def published_attainability(self) -> bool:
        for name, conditions in published_attainability_reports().items():
            add_condition_report(self.report, name, conditions)
        return True

    def stability(self) -> bool:
        config = self.config
        settings = config.stability
        simulation = Simulation(config)
        moments = simulation.moments
        frame = simulation.solver.total_inertia.frame
        omega0 = frame @ (np.asarray(settings.perturbation) + np.array([0.0, 0.0, settings.spin]))
        self._add_setup(simulation, omega0)
        series = simulation.run(omega0)
        self._save(series)

        omega_bar = estimate_final_omega(series, check=False)
        self.report.add('stability.spin', settings.spin)
        self.report.add('stability.perturbation', settings.perturbation)
        self.report.add('stability.omega_final', omega_bar)
        self.report.add('stability.r_star', float(omega_bar[2]) - settings.spin)
        try:
            self.report.add('stability.r_star_predicted', predict_rstar(moments, settings.spin, settings.perturbation))
        except ValueError as error:
            self.report.add('stability.r_star_predicted', f'undefined ({error})')
        try:
            self.report.add('stability.margin', stability_margin(moments))
        except ValueError as error:
            self.report.add('stability.margin', f'undefined ({error})')
        return self._add_checks(series)
