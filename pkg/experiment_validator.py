"""Experiment configuration: pydantic models, file loading and preset merging."""
import copy
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ValidationInfo, field_validator, model_validator

from cavity_constants import ENERGY_STEP_TOLERANCE, MOMENTUM_DRIFT_TOLERANCE, PRESETS, tilted_omega
from cavity_errors import ConfigError
from validators.inertia_validators import BodySpec
from validators.shape_validators import MeshSpec
from validators.solver_validators import SolverSettings


class ExperimentKind(str, Enum):
    RUN = "run"
    SWEEP_NU = "sweep-nu"
    ATTAINABILITY = "attainability"
    STABILITY = "stability"
    FLIP_OVER = "flip-over"


class VelocityMode(str, Enum):
    ZERO = "zero"
    RADIAL_PROFILE = "radial_profile"
    ZERO_MOMENTUM = "zero_momentum"


class Liquid(BaseModel):
    density: float = 1.0
    viscosity: float = 0.1

    @field_validator('density', 'viscosity')
    @classmethod
    def validate_positive(cls, v: float, info: ValidationInfo) -> float:
        if not v > 0:
            raise ValueError(f'{info.field_name} must be > 0, got {v}')
        return v


class TiltAngles(BaseModel):
    theta: float
    phi: float = 0.0
    magnitude: float = 2.0 * math.pi


class InitialData(BaseModel):
    omega: Optional[List[float]] = None
    angles: Optional[TiltAngles] = None
    v_mode: VelocityMode = VelocityMode.ZERO

    @field_validator('omega')
    @classmethod
    def validate_omega(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None:
            if len(v) != 3:
                raise ValueError(f'omega needs three components, got {len(v)}')
            if not all(math.isfinite(x) for x in v):
                raise ValueError(f'omega must be finite, got {v}')
        return v

    @model_validator(mode='after')
    def validate_single_source(self) -> 'InitialData':
        if (self.omega is None) == (self.angles is None):
            raise ValueError('Give exactly one of initial.omega or initial.angles')
        return self

    @property
    def angular_velocity(self) -> List[float]:
        if self.omega is not None:
            return list(self.omega)
        return tilted_omega(self.angles.theta, self.angles.phi, self.angles.magnitude)


class Output(BaseModel):
    directory: str = 'results'
    dump_operators: Optional[str] = None
    plots: bool = True


class Sweep(BaseModel):
    viscosities: List[float]

    @field_validator('viscosities')
    @classmethod
    def validate_viscosities(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError('sweep.viscosities must not be empty')
        if not all(x > 0 for x in v):
            raise ValueError(f'sweep.viscosities must all be > 0, got {v}')
        return v


class Stability(BaseModel):
    spin: float
    perturbation: List[float] = [0.0, 0.0, 0.0]

    @field_validator('spin')
    @classmethod
    def validate_spin(cls, v: float) -> float:
        if v == 0:
            raise ValueError('stability.spin must be nonzero')
        return v

    @field_validator('perturbation')
    @classmethod
    def validate_perturbation(cls, v: List[float]) -> List[float]:
        if len(v) != 3:
            raise ValueError(f'stability.perturbation needs three components, got {len(v)}')
        return v


class Attainability(BaseModel):
    energy: Optional[float] = None
    input_decimals: Optional[int] = None

    @field_validator('energy')
    @classmethod
    def validate_energy(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and v < 0:
            raise ValueError(f'attainability.energy must be >= 0, got {v}')
        return v


class Checks(BaseModel):
    energy: bool = True
    momentum: bool = True
    energy_tolerance: float = ENERGY_STEP_TOLERANCE
    momentum_tolerance: float = MOMENTUM_DRIFT_TOLERANCE


class ExperimentConfig(BaseModel):
    kind: ExperimentKind = ExperimentKind.RUN
    mesh: MeshSpec = MeshSpec()
    liquid: Liquid = Liquid()
    body: BodySpec
    initial: InitialData
    solver: SolverSettings = SolverSettings()
    output: Output = Output()
    checks: Checks = Checks()
    sweep: Optional[Sweep] = None
    stability: Optional[Stability] = None
    attainability: Attainability = Attainability()

    @model_validator(mode='after')
    def validate_kind_sections(self) -> 'ExperimentConfig':
        if self.kind in (ExperimentKind.SWEEP_NU, ExperimentKind.FLIP_OVER) and self.sweep is None:
            raise ValueError(f'A {self.kind.value} experiment needs sweep.viscosities')
        if self.kind is ExperimentKind.STABILITY and self.stability is None:
            raise ValueError('A stability experiment needs stability.spin')
        return self


def parse_key_values(text: str) -> Dict[str, Any]:
    """
    Parse `section.key = value` lines into a nested dict. Values are read as
    YAML scalars or flow sequences; `#` starts a comment line.
    """
    data: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f'Line {number}: expected `section.key = value`, got {raw!r}')
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigError(f'Line {number}: empty key')
        try:
            parsed = yaml.safe_load(value) if value else None
        except yaml.YAMLError as error:
            raise ConfigError(f'Line {number}: cannot parse value {value!r}: {error}') from error
        node = data
        parts = key.split('.')
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f'Line {number}: {part!r} is both a value and a section')
            node = child
        node[parts[-1]] = parsed
    return data


def load_config_data(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f'Config file not found: {path}')
    text = path.read_text(encoding='utf-8')
    if path.suffix in ('.yaml', '.yml'):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as error:
            raise ConfigError(f'Cannot parse {path}: {error}') from error
        if not isinstance(data, dict):
            raise ConfigError(f'{path} must contain a mapping at the top level')
        return data
    return parse_key_values(text)


def merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; values in `override` win."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def preset_data(name: str) -> Dict[str, Any]:
    if name not in PRESETS:
        raise ConfigError(f'Unknown preset {name!r}; available: {", ".join(PRESETS)}')
    return copy.deepcopy(PRESETS[name])


def load_config(path: Optional[Union[str, Path]] = None, preset: Optional[str] = None,
                overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Preset, then file, then overrides, validated into an ExperimentConfig."""
    user: Dict[str, Any] = load_config_data(path) if path is not None else {}
    if overrides:
        user = merge(user, overrides)
    data = merge(preset_data(preset), user) if preset else user
    # omega and angles are alternatives: the user layer replaces the preset's choice
    chosen = user.get('initial', {})
    for key, other in (('omega', 'angles'), ('angles', 'omega')):
        if key in chosen and other not in chosen:
            data.get('initial', {}).pop(other, None)
    try:
        return ExperimentConfig(**data)
    except TypeError as error:
        raise ConfigError(f'Malformed configuration: {error}') from error


def validate_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Normalized config with defaults filled, as plain data."""
    return load_config(path).model_dump(mode='json')
