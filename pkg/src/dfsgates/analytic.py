"""Closed-form results for the effective models.

The E-Raman propagator, the STIRAP eigensystem and its adiabatic
propagator, dynamical and geometric phases, ramp-phase predictions and
regime checks. Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from .errors import DegenerateInputError, OpenPathError, PreconditionError
from .hamiltonian import (
    LaserAmplitudes,
    RamanConstants,
    SystemParams,
    raman_constants,
    raman_cp_delta,
)
from .hilbert import SQRT2
from .pulses import LinearRampRatio, PulseSchedule, RatioRamp, SineRampRatio, adiabaticity, sample_angles

log = logging.getLogger(__name__)

__all__ = [
    "RamanConstants",
    "raman_constants",
    "raman_cp_delta",
    "raman_propagator",
    "raman_gate_phase",
    "StirapEigensystem",
    "stirap_eigensystem",
    "r_matrix",
    "StirapPath",
    "StirapPhases",
    "phases",
    "stirap_propagator",
    "RampPhase",
    "ramp_phase",
    "linear_ramp_integral",
    "sine_ramp_integral",
    "wrap_phase",
    "bloch_vector",
    "RegimeReport",
    "regime_report",
]

# Quadrature: start with this many samples and double until the change is below QUAD_TOL.
QUAD_SAMPLES = 10_001
QUAD_TOL = 1e-6
QUAD_MAX_SAMPLES = 1 << 22

# Ratio above which a "much smaller than" regime condition is reported as violated.
REGIME_LIMIT = 0.1

# {|E0(0)>, |E+(0)>, -|E-(0)>} in {|11>, |A>, |alpha>} at theta = 0, Delta = 0.
_ROW_FRAME = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 1.0 / SQRT2, -1.0 / SQRT2],
    [0.0, 1.0 / SQRT2, 1.0 / SQRT2],
], dtype=complex)
_COLUMN_FLIP = np.diag([1.0, 1.0, -1.0]).astype(complex)


def wrap_phase(phi: float) -> float:
    """Map an angle to (-π, π]."""
    w = math.remainder(phi, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


# E-Raman
def raman_propagator(constants: RamanConstants, T: float) -> np.ndarray:
    """exp(-iHT) of the reduced model over {|11>, |A>}.

    Global phase e^{i(Δ11+ΔA)T/2}; diagonal cos(KT/2) ± i((Δ11-ΔA)/K) sin(KT/2);
    off-diagonal -i(Ω/K) sin(KT/2). K = 0 reduces to the global phase.
    """
    K = constants.K
    # sin(KT/2)/K, finite at K = 0
    s_over_k = 0.5 * T * np.sinc(K * T / (2.0 * math.pi))
    c = math.cos(0.5 * K * T)
    d = constants.Delta11 - constants.DeltaA
    om = complex(constants.Omega)
    u = np.array([
        [c + 1j * d * s_over_k, -1j * om * s_over_k],
        [-1j * om.conjugate() * s_over_k, c - 1j * d * s_over_k],
    ], dtype=complex)
    return np.exp(0.5j * (constants.Delta11 + constants.DeltaA) * T) * u


def raman_gate_phase(constants: RamanConstants, T: Optional[float] = None) -> float:
    """Unwrapped |11> phase π + ½(Δ11+ΔA)T of the E-Raman gate (T defaults to 2π/K)."""
    if T is None:
        T = constants.gate_time
    return math.pi + 0.5 * (constants.Delta11 + constants.DeltaA) * T


# STIRAP
class StirapEigensystem(NamedTuple):
    energies: Tuple[float, float, float]  # (E0, E+, E-)
    vectors: np.ndarray  # columns |E0>, |E+>, |E-> over {|11>, |A>, |alpha>}


def stirap_eigensystem(omega1: complex, omega_sigma: complex, Delta: float = 0.0,
                       delta: float = 0.0, t: float = 0.0) -> StirapEigensystem:
    """Dark and bright eigenstates of the effective model (δ ≪ Δ).

    E0 = 0, E± = ½(-Δ ± sqrt(|Ωσ|² + |Ω1|² + Δ²)). The dark state is
    (Ωσ*|11> - e^{-iδt} Ω1*|A>)/norm; bright states are proportional to
    (Ω1/(2E), e^{-iδt} Ωσ/(2E), 1).
    """
    o1, os_ = complex(omega1), complex(omega_sigma)
    w2 = abs(o1) ** 2 + abs(os_) ** 2
    if w2 == 0:
        raise DegenerateInputError("dark state undefined: both Rabi amplitudes are zero")
    root = math.sqrt(w2 + Delta ** 2)
    e_plus = 0.5 * (-Delta + root)
    e_minus = 0.5 * (-Delta - root)
    rot = np.exp(-1j * delta * t)

    dark = np.array([os_.conjugate(), -rot * o1.conjugate(), 0.0], dtype=complex) / math.sqrt(w2)
    cols = [dark]
    for e in (e_plus, e_minus):
        v = np.array([o1 / (2.0 * e), rot * os_ / (2.0 * e), 1.0], dtype=complex)
        cols.append(v / np.linalg.norm(v))
    return StirapEigensystem((0.0, e_plus, e_minus), np.column_stack(cols))


def r_matrix(theta: float, phi: float) -> np.ndarray:
    """Adiabatic frame rotation over the eigenbasis at θ = 0 (rows: |E0>, |E+>, -|E->)."""
    c, s, e = math.cos(theta), math.sin(theta), np.exp(1j * phi)
    return 0.5 * np.array([
        [2.0 * c, SQRT2 * s, SQRT2 * s],
        [-SQRT2 * e * s, 1.0 + e * c, -(1.0 - e * c)],
        [SQRT2 * e * s, 1.0 - e * c, -(1.0 + e * c)],
    ], dtype=complex)


@dataclass(frozen=True)
class StirapPath:
    """Control path (θ(t), φ(t) = -δt) traced by a schedule."""

    schedule: PulseSchedule
    delta: float = 0.0

    @property
    def duration(self) -> float:
        return self.schedule.duration

    def sample(self, samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        t = np.linspace(0.0, self.duration, samples)
        theta, phi = sample_angles(self.schedule, t, self.delta)
        return t, theta, phi

    @property
    def endpoints(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        _, theta, phi = self.sample(3)
        return (float(theta[0]), float(phi[0])), (float(theta[-1]), float(phi[-1]))

    @property
    def closed(self) -> bool:
        """The path returns to its start on the (θ, φ) sphere."""
        (th0, ph0), (th1, ph1) = self.endpoints
        if abs(th1 - th0) > 1e-9:
            return False
        if abs(math.sin(th0)) < 1e-9:  # pole: φ is irrelevant
            return True
        return abs(wrap_phase(ph1 - ph0)) < 1e-9


@dataclass(frozen=True)
class StirapPhases:
    phi_d: Tuple[float, float, float]  # (φ0, φ+, φ-) dynamical
    phi_g: Tuple[float, float, float]  # (φ0, φ+, φ-) geometric
    samples: int = field(default=0, compare=False)

    @property
    def total(self) -> Tuple[float, float, float]:
        return tuple(d + g for d, g in zip(self.phi_d, self.phi_g))


def _phase_integrals(path: StirapPath, samples: int) -> np.ndarray:
    t, theta, phi = path.sample(samples)
    o1, os_ = path.schedule.sample(t)
    amp = np.hypot(np.abs(o1), np.abs(os_))
    s2 = np.sin(theta) ** 2
    return np.array([
        trapezoid(amp, t),
        trapezoid(s2, phi),
        trapezoid(1.0 - s2, phi),
    ])


def _converged(fn, samples: int = QUAD_SAMPLES, tol: float = QUAD_TOL):
    prev = fn(samples)
    while samples < QUAD_MAX_SAMPLES:
        samples = 2 * samples - 1
        cur = fn(samples)
        if np.max(np.abs(cur - prev)) < tol:
            return cur, samples
        prev = cur
    log.warning("quadrature not converged to %.1e with %d samples", tol, samples)
    return prev, samples


def phases(path: StirapPath, require_closed: bool = False) -> StirapPhases:
    """Dynamical and geometric phases along a sampled control path.

    φ+ᵈ = -φ-ᵈ = -½∫sqrt(Ω1² + Ωσ²)dt, φ0ᵍ = ∮sin²θ dφ and
    φ±ᵍ = ½∮cos²θ dφ, by trapezoid quadrature refined until stable.
    """
    if require_closed and not path.closed:
        raise OpenPathError("geometric phase requested on an open control path")
    (dyn, g0, g_pm), n = _converged(lambda s: _phase_integrals(path, s))
    return StirapPhases(
        phi_d=(0.0, -0.5 * dyn, 0.5 * dyn),
        phi_g=(g0, 0.5 * g_pm, 0.5 * g_pm),
        samples=n,
    )


def stirap_propagator(path: StirapPath, stirap_phases: Optional[StirapPhases] = None,
                      basis: str = "dfs") -> np.ndarray:
    """Adiabatic propagator R(θ(T), φ(T)) diag(e^{iφ0}, e^{iφ+}, e^{iφ-}).

    ``basis="eigen"`` returns it over the θ = 0 eigenbasis as written;
    ``basis="dfs"`` maps it onto {|11>, |A>, |alpha>}.
    """
    (th0, _), (th1, ph1) = path.endpoints
    if abs(th0) > 1e-9:
        raise PreconditionError(f"path must start at theta = 0, got {th0:.3g}")
    if stirap_phases is None:
        stirap_phases = phases(path)
    u = r_matrix(th1, ph1) @ np.diag(np.exp(1j * np.asarray(stirap_phases.total)))
    if basis == "eigen":
        return u
    if basis != "dfs":
        raise ValueError(f"basis must be 'eigen' or 'dfs', got {basis!r}")
    return _ROW_FRAME @ u @ _COLUMN_FLIP @ _ROW_FRAME.conj().T


# Geometric phase of ratio ramps
@dataclass(frozen=True)
class RampPhase:
    phi_g: float  # unwrapped -δ ∫ x²/(1+x²) dt
    ratio: float  # φᵍ/δ

    @property
    def wrapped(self) -> float:
        return wrap_phase(self.phi_g)


def linear_ramp_integral(alpha: float, T: float) -> float:
    """∫₀ᵀ x²/(1+x²) dt for the symmetric linear ramp x = α min(t, T-t)."""
    if alpha == 0:
        return 0.0
    return T - (2.0 / alpha) * math.atan(0.5 * alpha * T)


def sine_ramp_integral(x_max: float, beta: float) -> float:
    """∫₀^{π/β} x²/(1+x²) dt for x = x_max sin βt."""
    return (math.pi / beta) * (1.0 - 1.0 / math.sqrt(1.0 + x_max ** 2))


def _ramp_integral(ramp: RatioRamp) -> float:
    def fn(samples: int) -> np.ndarray:
        t = np.linspace(0.0, ramp.duration, samples)
        x2 = np.abs(ramp.ratio(t)) ** 2
        return np.array([trapezoid(x2 / (1.0 + x2), t)])

    (value,), _ = _converged(fn, tol=QUAD_TOL * 1e-3)
    return float(value)


def ramp_phase(ramp: Union[LinearRampRatio, SineRampRatio], delta: float) -> RampPhase:
    """Geometric phase ∮sin²θ dφ with φ = -δt for a ratio ramp.

    The ratio φᵍ/δ does not involve δ and is computed once.
    """
    ratio = -_ramp_integral(ramp)
    return RampPhase(phi_g=delta * ratio, ratio=ratio)


# Bloch sphere of {|11>, |A>}
def bloch_vector(c11: complex, cA: complex) -> np.ndarray:
    """(x, y, z) with z = +1 at |11> and z = -1 at |A>, normalized to the pair."""
    r = abs(c11) ** 2 + abs(cA) ** 2
    if r == 0:
        raise DegenerateInputError("Bloch vector undefined: no weight on |11> or |A>")
    cross = np.conj(c11) * cA
    return np.array([2.0 * cross.real, 2.0 * cross.imag, abs(c11) ** 2 - abs(cA) ** 2]) / r


# Regime conditions
@dataclass(frozen=True)
class RegimeReport:
    weak_driving: float  # max|Ω| / g
    raman: Optional[float]  # max|Ω| / |Δ|, None at Δ = 0
    adiabatic: Optional[float]  # max(|θ'|, |φ'|)/sqrt(Ω1² + Ωσ²), schedules only

    def violations(self, limit: float = REGIME_LIMIT) -> Dict[str, float]:
        checks = {"weak_driving": self.weak_driving, "raman": self.raman, "adiabatic": self.adiabatic}
        return {k: v for k, v in checks.items() if v is not None and v > limit}


def regime_report(params: SystemParams, lasers: Optional[LaserAmplitudes] = None,
                  schedule: Optional[PulseSchedule] = None, limit: float = REGIME_LIMIT) -> RegimeReport:
    """Evaluate the weak-driving, far-detuning and adiabatic conditions; warn on each violation."""
    peak = 0.0
    if lasers is not None:
        peak = max(abs(lasers.omega1), abs(lasers.omega_sigma))
    adia = None
    if schedule is not None:
        t = np.linspace(0.0, schedule.duration, 4001)
        o1, os_ = schedule.sample(t)
        peak = max(peak, float(np.max(np.abs(o1))), float(np.max(np.abs(os_))))
        if peak > 0 and not schedule.is_static:
            adia = adiabaticity(schedule, params.delta)
    report = RegimeReport(
        weak_driving=peak / params.g,
        raman=peak / abs(params.Delta) if params.Delta != 0 else None,
        adiabatic=adia,
    )
    for name, value in report.violations(limit).items():
        log.warning("regime condition %s violated: ratio %.3g > %.3g", name, value, limit)
    return report
