import math
from enum import Enum

from pydantic import BaseModel, ValidationInfo, field_validator

from cavity_constants import (
    DEFAULT_MAX_SUBITERS,
    DEFAULT_PECLET_LIMIT,
    DEFAULT_RELAXATION,
    DEFAULT_SUBITER_TOLERANCE,
    DEFAULT_THETA,
    DEFAULT_TIME_STEP,
)


class RelaxAgainst(str, Enum):
    PREVIOUS_ITERATE = "previous_iterate"
    PREVIOUS_STEP = "previous_step"


class Gyroscopic(str, Enum):
    MIDPOINT = "midpoint"
    TRAPEZOIDAL = "trapezoidal"


class BodyProblemInertia(str, Enum):
    BODY = "body"
    TOTAL = "total"


class ConvectionForm(str, Enum):
    CONSERVATIVE = "conservative"
    ADVECTIVE = "advective"


class SolverSettings(BaseModel):
    time_step: float = DEFAULT_TIME_STEP
    final_time: float = 1.0
    theta: float = DEFAULT_THETA
    relaxation: float = DEFAULT_RELAXATION
    tolerance: float = DEFAULT_SUBITER_TOLERANCE
    max_subiters: int = DEFAULT_MAX_SUBITERS
    relax_against: RelaxAgainst = RelaxAgainst.PREVIOUS_ITERATE
    gyroscopic: Gyroscopic = Gyroscopic.MIDPOINT
    body_problem_inertia: BodyProblemInertia = BodyProblemInertia.BODY
    convection: ConvectionForm = ConvectionForm.CONSERVATIVE
    peclet_limit: float = DEFAULT_PECLET_LIMIT

    @field_validator('time_step', 'tolerance', 'peclet_limit')
    @classmethod
    def validate_positive(cls, v: float, info: ValidationInfo) -> float:
        if not v > 0:
            raise ValueError(f'{info.field_name} must be > 0, got {v}')
        return v

    @field_validator('final_time')
    @classmethod
    def validate_final_time(cls, v: float, info: ValidationInfo) -> float:
        if v < 0:
            raise ValueError(f'final_time must be >= 0, got {v}')
        time_step = info.data.get('time_step')
        if time_step is not None and 0 < v < time_step:
            raise ValueError(f'final_time {v} is shorter than one time step {time_step}')
        return v

    @field_validator('theta')
    @classmethod
    def validate_theta(cls, v: float) -> float:
        if not (0 <= v <= 1):
            raise ValueError(f'theta must be in [0, 1], got {v}')
        return v

    @field_validator('relaxation')
    @classmethod
    def validate_relaxation(cls, v: float) -> float:
        if not (0 < v < 1):
            raise ValueError(f'relaxation must be in the open interval (0, 1), got {v}')
        return v

    @field_validator('max_subiters')
    @classmethod
    def validate_max_subiters(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f'max_subiters must be at least 1, got {v}')
        return v

    @property
    def n_steps(self) -> int:
        # ceil with a tolerance so T = 20, tau = 0.01 gives 2000 and not 2001
        return math.ceil(round(self.final_time / self.time_step, 9))
