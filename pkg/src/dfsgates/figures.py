"""Figure grids: one sweep CSV plus a declarative plot description per figure."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Tuple, Union

from .errors import UnknownFigureError
from .sweep import SweepAxis, SweepSpec, run_sweep

log = logging.getLogger(__name__)


class Axis(NamedTuple):
    name: str
    min: float
    max: float
    label: str


@dataclass(frozen=True)
class FigureSpec:
    experiment: str
    x: Axis
    y: Axis
    value_label: str
    title: str
    style: str = "surface"
    resolution: int = 21
    fixed: Tuple[Tuple[str, float], ...] = ()

    def sweep(self, resolution: Optional[int] = None, n_max: int = 2, step: float = 0.02) -> SweepSpec:
        n = resolution or self.resolution
        return SweepSpec(
            experiment=self.experiment,
            axis1=SweepAxis(name=self.x.name, min=self.x.min, max=self.x.max, count=n),
            axis2=SweepAxis(name=self.y.name, min=self.y.min, max=self.y.max, count=n),
            fixed=dict(self.fixed),
            n_max=n_max,
            step=step,
        )


_OMEGA1 = Axis("omega1", 0.001, 0.05, "Omega_1 [g]")
_DELTA = Axis("Delta", 0.0, 2.0, "Delta [g]")
_RAMAN_DELTA = Axis("Delta", 0.5, 3.0, "Delta [g]")
_STIRAP_OMEGA = Axis("omega", 0.005, 0.05, "Omega [g]")
_STIRAP_FREQ = Axis("freq", 1e-5, 1e-4, "omega [g]")

FIGURES: Dict[str, FigureSpec] = {
    "fig3": FigureSpec("fig3_P0", _OMEGA1, _DELTA, "P0", "Success rate of the trivial evolution from |01>"),
    "fig4": FigureSpec("raman_prep_F", _OMEGA1, _RAMAN_DELTA, "F", "E-Raman preparation fidelity"),
    "fig5": FigureSpec("raman_prep_P0", _OMEGA1, _RAMAN_DELTA, "P0", "E-Raman preparation success rate"),
    "fig6a": FigureSpec("stirap_prep_F", _STIRAP_OMEGA, _STIRAP_FREQ, "F", "E-STIRAP preparation fidelity"),
    "fig6b": FigureSpec("stirap_prep_P0", _STIRAP_OMEGA, _STIRAP_FREQ, "P0", "E-STIRAP preparation success rate"),
    "fig8a": FigureSpec(
        "ramp_phase_linear",
        Axis("alpha", 1e-6, 1e-4, "alpha [g]"),
        Axis("total_time", 2e4, 2e5, "T [1/g]"),
        "phi_g / delta [1/g]",
        "Geometric phase of the linear ramp",
        resolution=41,
    ),
    "fig8b": FigureSpec(
        "ramp_phase_sine",
        Axis("x_max", 0.1, 3.0, "x_max"),
        Axis("beta", 1e-5, 1e-4, "beta [g]"),
        "phi_g / delta [1/g]",
        "Geometric phase of the sine ramp",
        resolution=41,
    ),
}


class FigureFiles(NamedTuple):
    csv: Path
    plot: Path


def plot_description(fig_id: str, fig: FigureSpec, csv_name: str) -> Dict[str, object]:
    return {
        "figure": fig_id,
        "title": fig.title,
        "data": csv_name,
        "comment": "#",
        "columns": {"x": "axis1", "y": "axis2", "z": "value"},
        "x": {"parameter": fig.x.name, "label": fig.x.label},
        "y": {"parameter": fig.y.name, "label": fig.y.label},
        "z": {"label": fig.value_label},
        "style": fig.style,
        "contours": True,
    }


def reproduce_figure(
    fig_id: str,
    out_dir: Union[str, Path] = ".",
    resolution: Optional[int] = None,
    threads: int = 1,
    n_max: int = 2,
    step: float = 0.02,
) -> FigureFiles:
    """Write ``<fig_id>.csv`` and ``<fig_id>.plot.json`` into ``out_dir``."""
    try:
        fig = FIGURES[fig_id]
    except KeyError:
        raise UnknownFigureError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}") from None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    spec = fig.sweep(resolution, n_max=n_max, step=step)
    log.info("figure %s: %s on %dx%d grid", fig_id, fig.experiment, spec.axis1.count, spec.axis2.count)
    result = run_sweep(spec, threads=threads)
    csv_path = result.write_csv(out / f"{fig_id}.csv")
    plot_path = out / f"{fig_id}.plot.json"
    plot_path.write_text(json.dumps(plot_description(fig_id, fig, csv_path.name), indent=2) + "\n")
    log.info("figure %s written to %s", fig_id, csv_path)
    return FigureFiles(csv_path, plot_path)
