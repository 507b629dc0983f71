from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

COLUMNS = ['t', 'p', 'q', 'r', 'v_l2', 'gradv_l2', 'E_total', 'E_liquid', 'Ap', 'Bq', 'Cr', 'subiters', 'residual']


class TimeSeries:
    """
    Per-step record of a coupled run.

    p, q, r are the body angular velocity and Ap, Bq, Cr the total angular
    momentum I·ω∞, both in the eigenframe of I. `moments` (A, B, C) and the
    dynamic viscosity travel with the series for the analysis checks.
    """

    def __init__(self, moments: Sequence[float], viscosity: float = 0.0, time_step: Optional[float] = None,
                 frame: Optional[np.ndarray] = None):
        self.moments = tuple(float(m) for m in moments)
        self.viscosity = float(viscosity)
        self.time_step = time_step
        self.frame = np.eye(3) if frame is None else np.asarray(frame, dtype=float)
        self._records: List[Dict[str, float]] = []
        self._frame_cache: Optional[pd.DataFrame] = None
        self._fixed = False

    @classmethod
    def from_arrays(cls, t, omega, momentum, moments, v_l2=None, gradv_l2=None, energy=None,
                    liquid_energy=None, viscosity: float = 0.0) -> 'TimeSeries':
        """Build a series from arrays (used for synthetic checks)."""
        t = np.asarray(t, dtype=float)
        n = len(t)
        zeros = np.zeros(n)
        series = cls(moments, viscosity)
        omega = np.asarray(omega, dtype=float).reshape(n, 3)
        momentum = np.asarray(momentum, dtype=float).reshape(n, 3)
        columns = {
            't': t, 'p': omega[:, 0], 'q': omega[:, 1], 'r': omega[:, 2],
            'v_l2': zeros if v_l2 is None else np.asarray(v_l2, dtype=float),
            'gradv_l2': zeros if gradv_l2 is None else np.asarray(gradv_l2, dtype=float),
            'E_total': zeros if energy is None else np.asarray(energy, dtype=float),
            'E_liquid': zeros if liquid_energy is None else np.asarray(liquid_energy, dtype=float),
            'Ap': momentum[:, 0], 'Bq': momentum[:, 1], 'Cr': momentum[:, 2],
            'subiters': zeros, 'residual': zeros,
        }
        series._frame_cache = pd.DataFrame(columns, columns=COLUMNS)
        series._fixed = True
        return series

    def append(self, record: Dict[str, float]) -> None:
        if self._fixed:
            raise ValueError("Cannot append to a series built from arrays or read from CSV")
        if self._records and record['t'] <= self._records[-1]['t']:
            raise ValueError(f"Time must increase: {record['t']} after {self._records[-1]['t']}")
        self._records.append({column: float(record[column]) for column in COLUMNS})
        self._frame_cache = None

    @property
    def frame_data(self) -> pd.DataFrame:
        if self._frame_cache is None:
            self._frame_cache = pd.DataFrame(self._records, columns=COLUMNS)
        return self._frame_cache

    def __len__(self) -> int:
        return len(self.frame_data)

    @property
    def t(self) -> np.ndarray:
        return self.frame_data['t'].to_numpy()

    @property
    def omega(self) -> np.ndarray:
        return self.frame_data[['p', 'q', 'r']].to_numpy()

    @property
    def momentum(self) -> np.ndarray:
        """I·ω∞ in the eigenframe."""
        return self.frame_data[['Ap', 'Bq', 'Cr']].to_numpy()

    @property
    def omega_infinity(self) -> np.ndarray:
        return self.momentum / np.asarray(self.moments)

    def column(self, name: str) -> np.ndarray:
        return self.frame_data[name].to_numpy()

    def to_csv(self, path: Union[str, Path]) -> None:
        data = self.frame_data.copy()
        data['subiters'] = data['subiters'].astype(int)
        data.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')

    @classmethod
    def from_csv(cls, path: Union[str, Path], moments: Sequence[float], viscosity: float = 0.0) -> 'TimeSeries':
        data = pd.read_csv(path)
        missing = [column for column in COLUMNS if column not in data.columns]
        if missing:
            raise ValueError(f'Time series {path} is missing columns {missing}')
        series = cls(moments, viscosity)
        series._frame_cache = data[COLUMNS].astype(float)
        series._fixed = True
        return series
