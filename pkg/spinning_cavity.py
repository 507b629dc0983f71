"""Command line entry point: `python spinning_cavity.py <command> [options]`."""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import yaml
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table as RichTable

from cavity_constants import PRESETS
from cavity_errors import CavityError, ConfigError
from experiment_runner import ExperimentRunner, format_value
from experiment_validator import ExperimentKind, load_config, merge, parse_key_values, validate_config
from meshing.base_mesh import mesh_measures
from meshing.cylinder_mesher import generate_cylinder_mesh
from meshing.ellipsoid_mesher import generate_ellipsoid_mesh
from meshing.mesh_io import save_mesh

EXPERIMENT_COMMANDS = {
    'run': ExperimentKind.RUN,
    'sweep-nu': ExperimentKind.SWEEP_NU,
    'attainability': ExperimentKind.ATTAINABILITY,
    'stability': ExperimentKind.STABILITY,
    'flip-over': ExperimentKind.FLIP_OVER,
}


def float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'Expected comma-separated numbers, got {text!r}')


def add_experiment_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('-c', '--config', help='Experiment config (.yaml or `section.key = value` text)')
    parser.add_argument('--preset', choices=sorted(PRESETS), help='Built-in experiment to start from')
    for name in PRESETS:
        parser.add_argument(f'--{name}', dest='preset', action='store_const', const=name,
                            help=f'Same as --preset {name}')
    parser.add_argument('-o', '--output', help='Output directory')
    parser.add_argument('--refine', type=int, help='Mesh refinement level')
    parser.add_argument('--nu', type=float, help='Kinematic viscosity')
    parser.add_argument('--set', dest='settings', action='append', default=[], metavar='KEY=VALUE',
                        help='Override any config key, e.g. --set solver.time_step=0.02')
    parser.add_argument('--no-plots', action='store_true', help='Skip the SVG traces')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='spinning-cavity',
                                     description='Rigid body with a liquid-filled cavity: simulation and analysis')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    commands = parser.add_subparsers(dest='command', required=True)

    mesh = commands.add_parser('mesh', help='Generate a cavity mesh and print its measures')
    mesh.add_argument('--shape', choices=['ellipsoid', 'cylinder'], default='ellipsoid')
    mesh.add_argument('--semi-axes', type=float_list, default=[1.0, 1.0, 1.0], help='a,b,c')
    mesh.add_argument('--radius', type=float, default=1.0)
    mesh.add_argument('--height', type=float, default=2.0)
    mesh.add_argument('--refine', type=int, default=0)
    mesh.add_argument('--out', help='Write the mesh in cavitymesh text format')

    for name, kind in EXPERIMENT_COMMANDS.items():
        command = commands.add_parser(name, help=f'{kind.value} experiment')
        add_experiment_options(command)
        if name == 'run':
            command.add_argument('--dump-operators', metavar='DIR', help='Write assembled blocks at t = 0')
        if name in ('sweep-nu', 'flip-over'):
            command.add_argument('--values', type=float_list, help='Viscosities, e.g. 0.1,0.05,0.02')
        if name == 'attainability':
            command.add_argument('--published', action='store_true',
                                 help='Condition reports of the published initial-data experiments (no mesh)')
        if name == 'stability':
            command.add_argument('--spin', type=float, help='Permanent rotation omega_0 about e3')
            command.add_argument('--perturbation', type=float_list, help='p,q,r offset in the eigenframe')

    validate = commands.add_parser('validate', help='Print the normalized config')
    validate.add_argument('config', help='Experiment config')
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {'kind': EXPERIMENT_COMMANDS[args.command].value}
    if args.settings:
        overrides = merge(overrides, parse_key_values('\n'.join(args.settings)))
    flags = {
        'output': {'directory': args.output} if args.output else {},
        'mesh': {'refinement': args.refine} if args.refine is not None else {},
        'liquid': {'viscosity': args.nu} if args.nu is not None else {},
    }
    if args.no_plots:
        flags['output']['plots'] = False
    if getattr(args, 'dump_operators', None):
        flags['output']['dump_operators'] = args.dump_operators
    if getattr(args, 'values', None):
        flags['sweep'] = {'viscosities': args.values}
    if getattr(args, 'spin', None) is not None:
        flags['stability'] = {'spin': args.spin}
    if getattr(args, 'perturbation', None) is not None:
        if len(args.perturbation) != 3:
            raise ConfigError(f'--perturbation needs three components, got {len(args.perturbation)}')
        flags.setdefault('stability', {})['perturbation'] = args.perturbation
    return merge(overrides, {key: value for key, value in flags.items() if value})


def mesh_command(args: argparse.Namespace, console: Console) -> int:
    if args.shape == 'ellipsoid':
        if len(args.semi_axes) != 3:
            raise ConfigError(f'--semi-axes needs three values, got {len(args.semi_axes)}')
        mesh = generate_ellipsoid_mesh(args.semi_axes, args.refine)
    else:
        mesh = generate_cylinder_mesh(args.radius, args.height, args.refine)
    table = RichTable(title="Mesh Measures")
    table.add_column("Measure", style="cyan")
    table.add_column("Value", style="green")
    for key, value in mesh_measures(mesh).items():
        table.add_row(key, escape(format_value(value)))
    console.print(table)
    if args.out:
        save_mesh(mesh, args.out)
        console.print(f"Mesh written to {args.out}")
    return 0


def experiment_command(args: argparse.Namespace, console: Console) -> int:
    if args.command == 'attainability' and args.published:
        runner = ExperimentRunner(output=args.output or 'results', console=console)
        runner.report.add('kind', 'attainability-published')
        return runner.execute(runner.published_attainability)
    config = load_config(args.config, preset=args.preset, overrides=overrides_from_args(args))
    return ExperimentRunner(config, console=console).execute()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    console = Console()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(message)s',
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )
    try:
        if args.command == 'mesh':
            return mesh_command(args, console)
        if args.command == 'validate':
            console.print(yaml.dump(validate_config(args.config), sort_keys=False), end='', markup=False)
            return 0
        return experiment_command(args, console)
    except ValidationError as error:
        console.print("[red]Invalid configuration:[/red]")
        for item in error.errors():
            field = '.'.join(str(part) for part in item['loc'])
            console.print(f"  [yellow]{field}[/yellow]: {escape(item['msg'])}")
        return 2
    except CavityError as error:
        console.print(f"[red]{type(error).__name__}:[/red] {escape(str(error))}")
        return error.exit_code


if __name__ == '__main__':
    sys.exit(main())
