"""SVG time traces of a run: p, q, r, ‖v‖₂ and the total energy."""
from pathlib import Path
from typing import Dict, List, Sequence, Union

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from coupling.time_series import TimeSeries  # noqa: E402

# Fixed salt and no date keep repeated runs byte-identical
matplotlib.rcParams['svg.hashsalt'] = 'spinning-cavity'
matplotlib.rcParams['svg.fonttype'] = 'none'

PLOTS = {
    'p': ('p(t)', ['p']),
    'q': ('q(t)', ['q']),
    'r': ('r(t)', ['r']),
    'v_l2': ('||v||_2', ['v_l2']),
    'energy': ('total energy', ['E_total']),
}


def plot_series(t, columns: Dict[str, Sequence[float]], ylabel: str, path: Union[str, Path]) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in columns.items():
        ax.plot(t, values, label=label, linewidth=1.2)
    ax.set_xlabel('t')
    ax.set_ylabel(ylabel)
    ax.grid(True, linewidth=0.3)
    ax.legend(loc='best')
    fig.tight_layout()
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path


def write_plots(series: TimeSeries, directory: Union[str, Path]) -> List[Path]:
    """One `<quantity>.svg` per traced quantity."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (ylabel, columns) in PLOTS.items():
        written.append(plot_series(
            series.t,
            {column: series.column(column) for column in columns},
            ylabel,
            directory / f'{name}.svg',
        ))
    return written


def plot_sweep(viscosities: Sequence[float], values: Sequence[float], ylabel: str, path: Union[str, Path]) -> Path:
    """Log-log trace of a per-viscosity quantity, e.g. the time to reach equilibrium."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(viscosities, values, marker='o', label=ylabel)
    ax.set_xlabel('nu')
    ax.set_ylabel(ylabel)
    ax.grid(True, which='both', linewidth=0.3)
    ax.legend(loc='best')
    fig.tight_layout()
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path
