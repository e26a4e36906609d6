"""Two-axis parameter sweeps over the named experiments.

Grid points are independent; with ``threads > 1`` they are spread over a
process pool and collected in grid order, so the CSV does not depend on
the worker count.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Literal, Mapping, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from . import __version__
from .analytic import ramp_phase
from .errors import DfsGatesError
from .experiments import raman_prep, stirap_prep, trivial_evolution
from .hamiltonian import SystemParams
from .propagate import IntegratorConfig
from .pulses import LinearRampRatio, SineRampRatio

log = logging.getLogger(__name__)

ExperimentId = Literal[
    "fig3_P0",
    "raman_prep_F",
    "raman_prep_P0",
    "stirap_prep_F",
    "stirap_prep_P0",
    "ramp_phase_linear",
    "ramp_phase_sine",
]

_SYSTEM = {"kappa": 0.1, "gamma": 0.1, "Delta": 0.0, "delta": 0.0}


def _system(values: Mapping[str, float]) -> SystemParams:
    return SystemParams(**{k: values[k] for k in ("g", "kappa", "gamma", "Delta", "delta") if k in values})


def _fig3(v: Mapping[str, float], n_max: int, step: float) -> float:
    return trivial_evolution(_system(v), omega1=v["omega1"], T=v["T"], n_max=n_max, cfg=IntegratorConfig(step=step)).p0


def _raman(field: str) -> Callable[[Mapping[str, float], int, float], float]:
    def run(v: Mapping[str, float], n_max: int, step: float) -> float:
        omega_sigma = v.get("omega_sigma") or v["omega1"]
        res = raman_prep(_system(v), omega1=v["omega1"], omega_sigma=omega_sigma, n_max=n_max, cfg=IntegratorConfig(step=step))
        return getattr(res, field)
    return run


def _stirap(field: str) -> Callable[[Mapping[str, float], int, float], float]:
    def run(v: Mapping[str, float], n_max: int, step: float) -> float:
        res = stirap_prep(_system(v), omega=v["omega"], freq=v["freq"], n_max=n_max, cfg=IntegratorConfig(step=step))
        return getattr(res, field)
    return run


def _ramp_linear(v: Mapping[str, float], n_max: int, step: float) -> float:
    return ramp_phase(LinearRampRatio(alpha=v["alpha"], total_time=v["total_time"]), v["delta"]).ratio


def _ramp_sine(v: Mapping[str, float], n_max: int, step: float) -> float:
    return ramp_phase(SineRampRatio(x_max=v["x_max"], beta=v["beta"]), v["delta"]).ratio


@dataclass(frozen=True)
class Experiment:
    run: Callable[[Mapping[str, float], int, float], float]
    defaults: Mapping[str, float]  # every name an axis or fixed entry may set


EXPERIMENTS: Dict[str, Experiment] = {
    "fig3_P0": Experiment(_fig3, {**_SYSTEM, "omega1": 0.01, "T": 2000.0}),
    "raman_prep_F": Experiment(_raman("fidelity"), {**_SYSTEM, "Delta": 1.357, "omega1": 0.01, "omega_sigma": 0.0}),
    "raman_prep_P0": Experiment(_raman("p0"), {**_SYSTEM, "Delta": 1.357, "omega1": 0.01, "omega_sigma": 0.0}),
    "stirap_prep_F": Experiment(_stirap("fidelity"), {**_SYSTEM, "omega": 0.02, "freq": 4e-5}),
    "stirap_prep_P0": Experiment(_stirap("p0"), {**_SYSTEM, "omega": 0.02, "freq": 4e-5}),
    "ramp_phase_linear": Experiment(_ramp_linear, {"delta": 1e-4, "alpha": 2e-5, "total_time": 1e5}),
    "ramp_phase_sine": Experiment(_ramp_sine, {"delta": 1e-4, "x_max": 1.0, "beta": 3e-5}),
}


class SweepAxis(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    min: float
    max: float
    count: int = Field(21, ge=2)

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)


class SweepSpec(BaseModel):
    """Experiment id, two axes, and fixed values for any other parameter.

    ``omega_sigma = 0`` in the Raman experiments means "equal to omega1".
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentId
    axis1: SweepAxis
    axis2: SweepAxis
    fixed: Dict[str, float] = Field(default_factory=dict)
    n_max: int = Field(2, ge=0)
    step: float = Field(0.02, gt=0)

    @model_validator(mode="after")
    def _known_names(self) -> "SweepSpec":
        known = EXPERIMENTS[self.experiment].defaults
        for where, name in (("axis1", self.axis1.name), ("axis2", self.axis2.name)):
            if name not in known:
                raise ValueError(f"{where}: unknown parameter {name!r} for {self.experiment} (one of {sorted(known)})")
        if self.axis1.name == self.axis2.name:
            raise ValueError(f"axis1 and axis2 both sweep {self.axis1.name!r}")
        for name in self.fixed:
            if name not in known:
                raise ValueError(f"fixed: unknown parameter {name!r} for {self.experiment} (one of {sorted(known)})")
        return self

    @classmethod
    def from_flat(cls, values: Mapping[str, object]) -> "SweepSpec":
        """Build from flat config keys: axis1 = name, axis1_min, axis1_max, axis1_count, ...;
        keys that are not sweep settings become fixed parameters."""
        values = dict(values)
        spec: Dict[str, object] = {}
        for axis in ("axis1", "axis2"):
            spec[axis] = {
                "name": values.pop(axis, None),
                "min": values.pop(f"{axis}_min", None),
                "max": values.pop(f"{axis}_max", None),
                "count": values.pop(f"{axis}_count", 21),
            }
        for key in ("experiment", "n_max", "step"):
            if key in values:
                spec[key] = values.pop(key)
        spec["fixed"] = values
        return cls.model_validate(spec)

    def point(self, i: int, j: int) -> Dict[str, float]:
        values = dict(EXPERIMENTS[self.experiment].defaults)
        values.update(self.fixed)
        values[self.axis1.name] = float(self.axis1.values[i])
        values[self.axis2.name] = float(self.axis2.values[j])
        return values


def _evaluate(task: Tuple[SweepSpec, int, int]) -> float:
    spec, i, j = task
    values = spec.point(i, j)
    try:
        return float(EXPERIMENTS[spec.experiment].run(values, spec.n_max, spec.step))
    except (DfsGatesError, ArithmeticError, ValueError) as exc:
        log.warning("sweep %s point (%d, %d) %s failed: %s", spec.experiment, i, j, values, exc)
        return math.nan


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    values: np.ndarray  # (axis1.count, axis2.count)

    def rows(self) -> List[Tuple[float, float, float]]:
        a1, a2 = self.spec.axis1.values, self.spec.axis2.values
        return [
            (float(a1[i]), float(a2[j]), float(self.values[i, j]))
            for i in range(len(a1))
            for j in range(len(a2))
        ]

    def metadata(self) -> List[str]:
        s = self.spec
        return [
            f"experiment = {s.experiment}",
            f"axis1 = {s.axis1.name}",
            f"axis2 = {s.axis2.name}",
            "fixed = " + ", ".join(f"{k}={v!r}" for k, v in sorted(s.fixed.items())),
            f"integrator = rk4, step={s.step!r}, n_max={s.n_max}",
            f"version = {__version__}",
            "units = rates and detunings in g, times in 1/g",
        ]

    def to_csv(self) -> str:
        lines = [f"# {m}" for m in self.metadata()]
        lines.append("axis1,axis2,value")
        lines.extend(f"{x!r},{y!r},{v!r}" for x, y, v in self.rows())
        return "\n".join(lines) + "\n"

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate the experiment on every grid point, ordered by (axis1 index, axis2 index)."""
    tasks = [(spec, i, j) for i in range(spec.axis1.count) for j in range(spec.axis2.count)]
    log.info("sweep %s: %d points on %d worker(s)", spec.experiment, len(tasks), threads)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            flat: Sequence[float] = list(ex.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        flat = [_evaluate(t) for t in tasks]
    values = np.array(flat, dtype=float).reshape(spec.axis1.count, spec.axis2.count)
    return SweepResult(spec, values)
