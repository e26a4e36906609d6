"""Flat ``name = value`` configuration files and the per-subcommand schemas.

Lines are ``key = value``; ``#`` starts a comment anywhere on a line and
blank lines are skipped. Values are parsed as Python literals (numbers,
complex, booleans, None) where possible and kept as strings otherwise.
"""
from __future__ import annotations

import ast
import dataclasses
import math
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .gates import GateKind, GateProtocol
from .hamiltonian import SystemParams
from .propagate import IntegratorConfig
from .pulses import SCHEDULES, PulseSchedule

M = TypeVar("M", bound=BaseModel)

_BOOLS = {"true": True, "false": False, "yes": True, "no": False}


def parse_value(text: str) -> Any:
    text = text.strip()
    if text.lower() in _BOOLS:
        return _BOOLS[text.lower()]
    if text.lower() == "pi":
        return math.pi
    if len(text) > 1 and text.isdigit() and text[0] == "0":
        return text  # qubit labels such as "00"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config(text: str, source: str = "<config>") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'name = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: missing name before '='")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key", field=key)
        out[key] = parse_value(value)
    return out


def load_config(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def validate(model: Type[M], values: Mapping[str, Any]) -> M:
    """Validate a flat mapping, turning pydantic errors into ConfigError naming the field."""
    try:
        return model.model_validate(dict(values))
    except ValidationError as exc:
        raise config_error(exc) from exc


def config_error(exc: ValidationError) -> ConfigError:
    """First pydantic error as a ConfigError carrying the dotted field path."""
    err = exc.errors()[0]
    loc = ".".join(str(p) for p in err.get("loc", ())) or None
    return ConfigError(err.get("msg", "invalid value"), field=loc)


# Schemas
class RunConfig(BaseModel):
    """Keys shared by every subcommand: system parameters and integrator settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    g: float = Field(1.0, gt=0)
    kappa: float = Field(0.1, ge=0)
    gamma: float = Field(0.1, ge=0)
    Delta: float = 0.0
    delta: float = 0.0
    n_max: int = Field(2, ge=0)
    step: float = Field(0.02, gt=0)
    record_stride: int = Field(0, ge=0)

    def system_params(self, **overrides: float) -> SystemParams:
        values = dict(g=self.g, kappa=self.kappa, gamma=self.gamma, Delta=self.Delta, delta=self.delta)
        values.update(overrides)
        return SystemParams(**values)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(step=self.step, record_stride=self.record_stride)


class ScheduleKeys(BaseModel):
    """Shape name plus the union of every shape's parameters; only the chosen shape's may be set."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: Optional[Literal["Constant", "StirapPair", "LinearRampRatio", "SineRampRatio"]] = None
    omega1: Optional[float] = None
    omega_sigma: Optional[float] = None
    total_time: Optional[float] = None
    ripple: Optional[float] = None
    ripple_periods: Optional[int] = None
    omega: Optional[float] = None
    freq: Optional[float] = None
    reverse: Optional[bool] = None
    alpha: Optional[float] = None
    x_max: Optional[float] = None
    beta: Optional[float] = None

    def schedule(self, default_shape: Optional[str] = None) -> Optional[PulseSchedule]:
        shape = self.shape or default_shape
        if shape is None:
            return None
        cls = SCHEDULES[shape]
        allowed = {f.name for f in dataclasses.fields(cls)}
        given = {k: getattr(self, k) for k in ScheduleKeys.model_fields if k != "shape" and getattr(self, k) is not None}
        stray = sorted(set(given) - allowed)
        if stray:
            raise ConfigError(f"not a parameter of schedule {shape}", field=stray[0])
        try:
            return cls(**given)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), field="shape") from exc


class EvolveConfig(RunConfig, ScheduleKeys):
    initial: str = "11"  # qubit pair "ij", a named state, or a basis label "l1,l2,n"
    labels: str = ""  # ";"-separated basis labels such as "1,1,0; s,1,0" written to the trajectory CSV
    window: bool = False

    @field_validator("initial", "labels", mode="before")
    @classmethod
    def _label_text(cls, value: Any) -> Any:
        # "11" and "1,1,0" parse as literals; the fields want the text back
        if isinstance(value, tuple):
            return ",".join(str(v) for v in value)
        if isinstance(value, int) and not isinstance(value, bool):
            return str(value)
        return value


class PrepConfig(RunConfig):
    protocol: Literal["raman", "stirap"] = "raman"
    omega1: float = 0.01
    omega_sigma: Optional[float] = None
    omega: float = 0.02
    freq: float = 4e-5
    window: bool = False
    readout: Literal["transfer", "end"] = "transfer"


class GateConfig(RunConfig, ScheduleKeys):
    kind: GateKind = GateKind.ERAMAN_CP
    model: Literal["full", "effective"] = "full"
    delta: Optional[float] = None  # type: ignore[assignment]
    target_phase: Optional[float] = None
    window: Optional[float] = Field(None, ge=0)  # decay window after the pulses; default 5/min(kappa, gamma)

    def protocol(self) -> GateProtocol:
        params = self.system_params(delta=0.0)
        sched = None
        if self.kind is GateKind.ESTIRAP_DYNAMICAL_CP:
            sched = self.schedule("StirapPair")
        elif self.kind is GateKind.ESTIRAP_GEOMETRIC_CP:
            sched = self.schedule("LinearRampRatio")
        elif self.shape is not None:
            raise ConfigError(f"{self.kind.value} takes no schedule", field="shape")
        extra: Dict[str, Any] = {}
        for name in ("omega1", "omega_sigma", "total_time", "ripple", "ripple_periods"):
            value = getattr(self, name)
            if value is not None and sched is None:
                extra[name] = value
        return GateProtocol(
            kind=self.kind,
            params=params,
            delta=self.delta,
            schedule=sched,
            target_phase=self.target_phase,
            **extra,
        )


class FigureConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    resolution: Optional[int] = Field(None, ge=2)
    n_max: int = Field(2, ge=0)
    step: float = Field(0.02, gt=0)
