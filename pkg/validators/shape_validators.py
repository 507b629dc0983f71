from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, field_validator, model_validator

from cavity_constants import MAX_BALL_REFINEMENT, MAX_CYLINDER_REFINEMENT


class ShapeKind(str, Enum):
    ELLIPSOID = "ellipsoid"
    CYLINDER = "cylinder"
    FILE = "file"


class CavityShape(BaseModel):
    kind: ShapeKind = ShapeKind.ELLIPSOID
    semi_axes: Optional[List[float]] = None
    radius: Optional[float] = None
    height: Optional[float] = None
    path: Optional[str] = None

    @field_validator('semi_axes')
    @classmethod
    def validate_semi_axes(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None:
            if len(v) != 3:
                raise ValueError(f'semi_axes needs three values, got {len(v)}')
            if not all(x > 0 for x in v):
                raise ValueError(f'semi_axes must be > 0, got {v}')
        return v

    @field_validator('radius', 'height')
    @classmethod
    def validate_dimension(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError(f'Cylinder dimensions must be > 0, got {v}')
        return v

    @field_validator('path')
    @classmethod
    def validate_path(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and not Path(v).is_file():
            raise ValueError(f'Mesh file not found: {v}')
        return v

    @model_validator(mode='after')
    def validate_kind_fields(self) -> 'CavityShape':
        if self.kind is ShapeKind.ELLIPSOID and self.semi_axes is None:
            self.semi_axes = [1.0, 1.0, 1.0]
        if self.kind is ShapeKind.CYLINDER and (self.radius is None or self.height is None):
            raise ValueError('A cylinder needs both radius and height')
        if self.kind is ShapeKind.FILE and self.path is None:
            raise ValueError('A mesh file shape needs a path')
        return self


class MeshSpec(BaseModel):
    shape: CavityShape = CavityShape()
    refinement: int = 0

    @field_validator('refinement')
    @classmethod
    def validate_refinement(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f'refinement must be >= 0, got {v}')
        return v

    @model_validator(mode='after')
    def validate_refinement_limit(self) -> 'MeshSpec':
        limit = MAX_CYLINDER_REFINEMENT if self.shape.kind is ShapeKind.CYLINDER else MAX_BALL_REFINEMENT
        if self.shape.kind is not ShapeKind.FILE and self.refinement > limit:
            raise ValueError(f'refinement {self.refinement} exceeds the maximum {limit} for a {self.shape.kind.value}')
        return self
