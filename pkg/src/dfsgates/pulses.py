from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Dict, NamedTuple, Tuple, Type, Union

import numpy as np

from .errors import ScheduleRangeError, UndefinedAngleError
from .hamiltonian import EFFECTIVE_BASIS, OperatorMatrix
from .hilbert import AtomLevel, HilbertSpace

ArrayLike = Union[float, np.ndarray]

# Relative slack when checking t against [0, T] and when taking one-sided limits.
_EDGE = 1e-9


class ControlAngles(NamedTuple):
    theta: float  # tanθ = Ω1/Ωσ
    phi: float  # φ = -δt


class PulseSchedule:
    """Closed-form laser schedule on [0, duration].

    Subclasses implement ``_amplitudes(t)`` on numpy arrays; ``sample`` is
    the vectorized entry point integrators use at RK substeps, ``evaluate``
    the checked scalar one.
    """

    shape: ClassVar[str] = ""

    @property
    def duration(self) -> float:
        raise NotImplementedError

    @property
    def is_static(self) -> bool:
        return False

    def _amplitudes(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample(self, times: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        o1, os_ = self._amplitudes(np.clip(t, 0.0, self.duration))
        return np.asarray(o1, dtype=complex) * np.ones_like(t), np.asarray(os_, dtype=complex) * np.ones_like(t)

    def evaluate(self, t: float) -> Tuple[complex, complex]:
        """(Ω1(t), Ωσ(t)); t must lie in [0, T]."""
        T = self.duration
        slack = _EDGE * max(T, 1.0)
        if t < -slack or t > T + slack:
            raise ScheduleRangeError(f"t={t} outside [0, {T}] for {self.shape}")
        o1, os_ = self.sample(t)
        return complex(o1[0]), complex(os_[0])

    def describe(self) -> Dict[str, object]:
        out: Dict[str, object] = {"shape": self.shape}
        out.update(self.__dict__)
        return out


@dataclass(frozen=True)
class Constant(PulseSchedule):
    """Constant amplitudes, optionally with a zero-mean ripple on Ω1.

    With ``ripple`` = r and ``ripple_periods`` = m,
    Ω1(t) = Ω1 (1 + r sin(2π m t / T)).
    """

    omega1: complex = 0.0
    omega_sigma: complex = 0.0
    total_time: float = 0.0
    ripple: float = 0.0
    ripple_periods: int = 1

    shape: ClassVar[str] = "Constant"

    def __post_init__(self) -> None:
        if self.total_time < 0:
            raise ValueError(f"total_time must be >= 0, got {self.total_time}")

    @property
    def duration(self) -> float:
        return float(self.total_time)

    @property
    def is_static(self) -> bool:
        return self.ripple == 0

    def _amplitudes(self, t: np.ndarray):
        if self.ripple == 0 or self.total_time == 0:
            return np.full(t.shape, complex(self.omega1)), np.full(t.shape, complex(self.omega_sigma))
        envelope = 1.0 + self.ripple * np.sin(2.0 * np.pi * self.ripple_periods * t / self.total_time)
        return complex(self.omega1) * envelope, np.full(t.shape, complex(self.omega_sigma))


@dataclass(frozen=True)
class StirapPair(PulseSchedule):
    """Counterintuitive pair, total time T = 3π/(2ω).

    Ωσ = Ω sin ωt on (0, 2T/3), 0 after; Ω1 = 0 on (0, T/3), Ω sin ω(t - T/3)
    after. ``reverse`` plays the sequence backwards in time (Ω1 first),
    returning |A> to |11>.
    """

    omega: float = 0.02
    freq: float = 4e-5
    reverse: bool = False

    shape: ClassVar[str] = "StirapPair"

    def __post_init__(self) -> None:
        if self.freq <= 0:
            raise ValueError(f"freq must be > 0, got {self.freq}")

    @property
    def duration(self) -> float:
        return 3.0 * math.pi / (2.0 * self.freq)

    @property
    def transfer_time(self) -> float:
        """2T/3 = π/ω: Ωσ has closed and the dark state sits at θ = π/2.

        Past this point only Ω1 is on and |A> is already dark to it.
        """
        return math.pi / self.freq

    def _amplitudes(self, t: np.ndarray):
        T = self.duration
        if self.reverse:
            t = T - t
        w = self.freq
        o_sigma = np.where(t < 2.0 * T / 3.0, self.omega * np.sin(w * t), 0.0)
        o_1 = np.where(t < T / 3.0, 0.0, self.omega * np.sin(w * (t - T / 3.0)))
        return o_1, o_sigma


class RatioRamp(PulseSchedule):
    """Ωσ held constant, Ω1 = x(t) Ωσ."""

    omega_sigma: float

    def ratio(self, times: ArrayLike) -> np.ndarray:
        t = np.clip(np.atleast_1d(np.asarray(times, dtype=float)), 0.0, self.duration)
        return self._ratio(t)

    def _ratio(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _amplitudes(self, t: np.ndarray):
        x = self._ratio(t)
        return x * self.omega_sigma, np.full(t.shape, complex(self.omega_sigma))


@dataclass(frozen=True)
class LinearRampRatio(RatioRamp):
    """x = αt on (0, T/2), α(T - t) on (T/2, T)."""

    omega_sigma: float = 0.02
    alpha: float = 2e-5
    total_time: float = 1e5

    shape: ClassVar[str] = "LinearRampRatio"

    @property
    def duration(self) -> float:
        return float(self.total_time)

    def _ratio(self, t: np.ndarray) -> np.ndarray:
        T = self.total_time
        return np.where(t < 0.5 * T, self.alpha * t, self.alpha * (T - t))


@dataclass(frozen=True)
class SineRampRatio(RatioRamp):
    """x = x_max sin βt on (0, π/β)."""

    omega_sigma: float = 0.02
    x_max: float = 1.0
    beta: float = 3e-5

    shape: ClassVar[str] = "SineRampRatio"

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def duration(self) -> float:
        return math.pi / self.beta

    def _ratio(self, t: np.ndarray) -> np.ndarray:
        return self.x_max * np.sin(self.beta * t)


SCHEDULES: Dict[str, Type[PulseSchedule]] = {
    cls.shape: cls for cls in (Constant, StirapPair, LinearRampRatio, SineRampRatio)
}


def evaluate(schedule: PulseSchedule, t: float) -> Tuple[complex, complex]:
    return schedule.evaluate(t)


def _theta(o1: complex, os_: complex) -> float:
    return math.atan2(abs(o1), abs(os_))


def angles(schedule: PulseSchedule, t: float, delta: float) -> ControlAngles:
    """θ = arctan(Ω1/Ωσ) and φ = -δt.

    Where both amplitudes vanish θ is only defined at the protocol
    endpoints, by the one-sided limit from inside [0, T].
    """
    o1, os_ = schedule.evaluate(t)
    phi = -delta * t
    if o1 != 0 or os_ != 0:
        return ControlAngles(_theta(o1, os_), phi)

    T = schedule.duration
    eps = _EDGE * max(T, 1.0) * 1e3
    if T > 0 and abs(t) <= eps:
        o1, os_ = schedule.evaluate(min(eps, T))
    elif T > 0 and abs(t - T) <= eps:
        o1, os_ = schedule.evaluate(max(T - eps, 0.0))
    else:
        raise UndefinedAngleError(f"both Rabi amplitudes vanish at t={t} inside the protocol")
    if o1 == 0 and os_ == 0:
        raise UndefinedAngleError(f"mixing angle undefined at endpoint t={t}: lasers stay off")
    return ControlAngles(_theta(o1, os_), phi)


def sample_angles(schedule: PulseSchedule, times: np.ndarray, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized (θ, φ) on a grid; zero-amplitude samples take their neighbour's θ."""
    o1, os_ = schedule.sample(times)
    amp1, amps = np.abs(o1), np.abs(os_)
    theta = np.arctan2(amp1, amps)
    dark = (amp1 == 0) & (amps == 0)
    if dark.any() and not dark.all():
        idx = np.where(~dark, np.arange(len(theta)), 0)
        np.maximum.accumulate(idx, out=idx)
        first = int(np.argmax(~dark))
        idx[:first] = first
        theta = theta[idx]
    return theta, -delta * np.asarray(times, dtype=float)


def adiabaticity(schedule: PulseSchedule, delta: float = 0.0, samples: int = 4001, floor: float = 1e-3) -> float:
    """max over the protocol of max(|dθ/dt|, |dφ/dt|) / sqrt(Ω1² + Ωσ²).

    Samples where the amplitude is below ``floor`` times its peak are
    skipped (the ratio diverges trivially where the lasers are off).
    """
    t = np.linspace(0.0, schedule.duration, samples)
    o1, os_ = schedule.sample(t)
    amp = np.hypot(np.abs(o1), np.abs(os_))
    if amp.max() == 0:
        raise UndefinedAngleError("adiabaticity undefined: lasers stay off")
    theta, _ = sample_angles(schedule, t, delta)
    rate = np.maximum(np.abs(np.gradient(theta, t)), abs(delta))
    keep = amp > floor * amp.max()
    return float(np.max(rate[keep] / amp[keep]))


def two_pi_flip(space: HilbertSpace) -> OperatorMatrix:
    """Ideal 2π pulse on the auxiliary transition: |σ> -> -|σ> on both atoms."""
    signs = np.array([
        (-1.0) ** ((l1 == AtomLevel.LSIGMA) + (l2 == AtomLevel.LSIGMA)) for l1, l2, _ in space.labels()
    ])
    return OperatorMatrix(np.diag(signs).astype(complex), hermitian=True)


def two_pi_flip_effective() -> OperatorMatrix:
    return OperatorMatrix(np.diag([1.0, -1.0, 1.0]).astype(complex), hermitian=True, basis=EFFECTIVE_BASIS)
