from dataclasses import dataclass, field

import numpy as np


@dataclass
class FlowState:
    """Velocity (quadratic, component-major) and pressure (linear, zero mean) coefficients at time t."""
    u: np.ndarray
    p: np.ndarray
    t: float = 0.0


@dataclass
class BodyState:
    omega: np.ndarray
    t: float = 0.0


@dataclass
class CoupledState:
    """Converged state of one time level plus the torque it exerts on the body."""
    flow: FlowState
    body: BodyState
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    step: int = 0
    subiterations: int = 0
    residual: float = 0.0

    @property
    def t(self) -> float:
        return self.body.t
