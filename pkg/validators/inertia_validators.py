from enum import Enum
from typing import List

from pydantic import BaseModel, ValidationInfo, field_validator


class InertiaMode(str, Enum):
    EXPLICIT = "explicit"
    TARGET_TOTAL = "target_total"


class InertiaSpec(BaseModel):
    mode: InertiaMode = InertiaMode.EXPLICIT
    values: List[float]

    @field_validator('values')
    @classmethod
    def validate_values(cls, v: List[float], info: ValidationInfo) -> List[float]:
        mode = info.data.get('mode')
        if mode == InertiaMode.TARGET_TOTAL:
            if len(v) != 3:
                raise ValueError(f'target_total inertia needs three eigenvalues, got {len(v)}')
            if not all(x > 0 for x in v):
                raise ValueError(f'target_total eigenvalues must be > 0, got {v}')
        elif len(v) == 9:
            matrix = [v[0:3], v[3:6], v[6:9]]
            if any(abs(matrix[i][j] - matrix[j][i]) > 1e-12 * max(abs(x) for x in v) for i in range(3) for j in range(i)):
                raise ValueError('explicit inertia matrix must be symmetric')
        elif len(v) == 3:
            if not all(x >= 0 for x in v):
                raise ValueError(f'explicit diagonal inertia must be >= 0, got {v}')
        else:
            raise ValueError(f'explicit inertia needs 3 diagonal or 9 matrix entries, got {len(v)}')
        return v


class BodySpec(BaseModel):
    inertia: InertiaSpec
