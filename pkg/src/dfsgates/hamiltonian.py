from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import RamanDetuningError
from .hilbert import SQRT2, AtomLevel, HilbertSpace, NamedState, make_named_state

log = logging.getLogger(__name__)

L0, L1, LS, L2 = AtomLevel

# Per-atom sign pattern of the collective Rabi frequencies:
# Ω1^(1) = -Ω1/sqrt2, Ω1^(2) = +Ω1/sqrt2, Ωσ^(1) = -Ωσ, Ωσ^(2) = +Ωσ.
_OMEGA1_SIGNS = (-1.0 / SQRT2, 1.0 / SQRT2)
_OMEGA_SIGMA_SIGNS = (-1.0, 1.0)

EFFECTIVE_BASIS = ("11", "A", "alpha")
RAMAN_BASIS = ("11", "A")

HERMITIAN_TOL = 1e-12


class SystemParams(BaseModel):
    """Rates and detunings in units of g (hbar = 1)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    g: float = Field(1.0, gt=0)
    kappa: float = Field(0.0, ge=0)  # cavity field decay
    gamma: float = Field(0.0, ge=0)  # decay of level 2
    Delta: float = 0.0  # laser/cavity detuning of level 2
    delta: float = 0.0  # two-photon detuning of level sigma

    def with_(self, **changes: float) -> "SystemParams":
        return self.model_copy(update=changes)


@dataclass(frozen=True)
class LaserAmplitudes:
    """Collective Rabi frequencies; per-atom signs are applied by the builders."""

    omega1: complex = 0.0
    omega_sigma: complex = 0.0

    def __post_init__(self) -> None:
        for name in ("omega1", "omega_sigma"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    def per_atom(self) -> Tuple[Tuple[complex, complex], Tuple[complex, complex]]:
        """((Ω1^(1), Ωσ^(1)), (Ω1^(2), Ωσ^(2)))."""
        return tuple(  # type: ignore[return-value]
            (s1 * self.omega1, ss * self.omega_sigma)
            for s1, ss in zip(_OMEGA1_SIGNS, _OMEGA_SIGMA_SIGNS)
        )


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    matrix: np.ndarray
    hermitian: bool
    basis: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def max_deviation(self, other: Union["OperatorMatrix", np.ndarray]) -> float:
        m = other.matrix if isinstance(other, OperatorMatrix) else np.asarray(other)
        return float(np.max(np.abs(self.matrix - m), initial=0.0))


# Full model
def _laser_raising(space: HilbertSpace) -> Tuple[np.ndarray, np.ndarray]:
    """X1, Xσ such that H_laser = Ω1 X1 + Ωσ Xσ + h.c.

    X1 = ½ Σ_i s1_i |1><2|_i and Xσ = ½ Σ_i sσ_i |σ><2|_i.
    """
    x1 = sum(s * space.atom_operator(i + 1, L1, L2) for i, s in enumerate(_OMEGA1_SIGNS))
    xs = sum(s * space.atom_operator(i + 1, LS, L2) for i, s in enumerate(_OMEGA_SIGMA_SIGNS))
    return 0.5 * x1, 0.5 * xs


def _static_full(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    b = space.annihilation
    h = np.zeros((space.dim, space.dim), dtype=complex)
    for atom in (1, 2):
        jc = params.g * space.atom_operator(atom, L2, L1) @ b
        h += jc + jc.conj().T
        h -= params.delta * space.atom_operator(atom, LS, LS)
        h -= params.Delta * space.atom_operator(atom, L2, L2)
    return h


def _decay_terms(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    excited = space.atom_operator(1, L2, L2) + space.atom_operator(2, L2, L2)
    return -0.5j * params.kappa * space.number - 0.5j * params.gamma * excited


def _laser_matrix(x1: np.ndarray, xs: np.ndarray, lasers: LaserAmplitudes) -> np.ndarray:
    h = lasers.omega1 * x1 + lasers.omega_sigma * xs
    return h + h.conj().T


def build_full(params: SystemParams, lasers: LaserAmplitudes, space: HilbertSpace) -> OperatorMatrix:
    """Interaction-picture Hamiltonian of both atoms and the cavity mode.

    H = Σ_i [ g(|2><1|_i b + h.c.) + ½(Ω1^(i)|1><2|_i + Ωσ^(i)|σ><2|_i + h.c.)
              - δ|σ><σ|_i - Δ|2><2|_i ]
    """
    x1, xs = _laser_raising(space)
    h = _static_full(params, space) + _laser_matrix(x1, xs, lasers)
    return OperatorMatrix(h, hermitian=True)


def build_conditional(params: SystemParams, lasers: LaserAmplitudes, space: HilbertSpace) -> OperatorMatrix:
    """No-jump Hamiltonian H - (i/2)κ b†b - (i/2)Γ Σ_i |2><2|_i."""
    h = build_full(params, lasers, space).matrix + _decay_terms(params, space)
    return OperatorMatrix(h, hermitian=params.kappa == 0 and params.gamma == 0)


# Effective models
def _effective_raising() -> Tuple[np.ndarray, np.ndarray]:
    # DFS projection of X1, Xσ in the {|11>, |A>, |alpha>} basis.
    x1 = np.zeros((3, 3), dtype=complex)
    xs = np.zeros((3, 3), dtype=complex)
    x1[0, 2] = 0.5
    xs[1, 2] = 0.5
    return x1, xs


def _static_effective(params: SystemParams) -> np.ndarray:
    return np.diag([0.0, -params.delta, -params.Delta]).astype(complex)


def build_effective(params: SystemParams, lasers: LaserAmplitudes) -> OperatorMatrix:
    """H_eff over {|11>, |A>, |alpha>} (cavity vacuum).

    ½(Ω1*|alpha><11| + Ωσ*|alpha><A| + h.c.) - δ|A><A| - Δ|alpha><alpha|.
    The conjugates make this the exact DFS projection of the full laser
    term; for real amplitudes it is the familiar form.
    """
    x1, xs = _effective_raising()
    h = _static_effective(params) + _laser_matrix(x1, xs, lasers)
    return OperatorMatrix(h, hermitian=True, basis=EFFECTIVE_BASIS)


def embed_effective(op: np.ndarray, space: HilbertSpace) -> np.ndarray:
    """Lift a 3x3 operator on {|11>, |A>, |alpha>} into the full space."""
    vecs = np.column_stack([
        space.basis_vector(L1, L1),
        make_named_state(NamedState.A, space=space).amplitudes,
        make_named_state(NamedState.ALPHA, space=space).amplitudes,
    ])
    return vecs @ np.asarray(op) @ vecs.conj().T


def check_projector_identity(params: SystemParams, lasers: LaserAmplitudes, space: HilbertSpace) -> float:
    """max |P H_laser P - embed(laser part of H_eff)|, a self-test of the projection."""
    x1, xs = _laser_raising(space)
    p = space.dfs_projector
    projected = p @ _laser_matrix(x1, xs, lasers) @ p
    ex1, exs = _effective_raising()
    lifted = embed_effective(_laser_matrix(ex1, exs, lasers), space)
    return float(np.max(np.abs(projected - lifted)))


# E-Raman reduction
@dataclass(frozen=True)
class RamanConstants:
    """Ω = Ω1Ωσ*/(2Δ), Δ11 = -|Ω1|²/(4Δ), ΔA = δ - |Ωσ|²/(4Δ), K = sqrt(|Ω|² + (Δ11-ΔA)²)."""

    Omega: complex
    Delta11: float
    DeltaA: float

    @property
    def K(self) -> float:
        return math.hypot(abs(self.Omega), self.Delta11 - self.DeltaA)

    @property
    def prep_time(self) -> float:
        """π/K: full transfer |11> -> |A> when Δ11 = ΔA."""
        return math.pi / self.K

    @property
    def gate_time(self) -> float:
        """2π/K: minimal time for the E-Raman phase gate."""
        return 2.0 * math.pi / self.K


def raman_constants(params: SystemParams, lasers: LaserAmplitudes) -> RamanConstants:
    if params.Delta == 0:
        raise RamanDetuningError(
            "E-Raman elimination needs Delta != 0; use the E-STIRAP path (StirapPair schedule) at Delta = 0"
        )
    d = params.Delta
    return RamanConstants(
        Omega=lasers.omega1 * np.conj(lasers.omega_sigma) / (2.0 * d),
        Delta11=-abs(lasers.omega1) ** 2 / (4.0 * d),
        DeltaA=params.delta - abs(lasers.omega_sigma) ** 2 / (4.0 * d),
    )


def raman_reduced_matrix(constants: RamanConstants) -> np.ndarray:
    h = np.array([
        [-constants.Delta11, 0.5 * constants.Omega],
        [0.5 * np.conj(constants.Omega), -constants.DeltaA],
    ], dtype=complex)
    return h


def build_raman_reduced(params: SystemParams, lasers: LaserAmplitudes) -> OperatorMatrix:
    """½(Ω|11><A| + h.c.) - Δ11|11><11| - ΔA|A><A| over {|11>, |A>}."""
    c = raman_constants(params, lasers)
    return OperatorMatrix(raman_reduced_matrix(c), hermitian=True, basis=RAMAN_BASIS)


def raman_cp_delta(omega1: complex, omega_sigma: complex, Delta: float) -> float:
    """δ making Δ11 + ΔA = 0, so the E-Raman gate phase is exactly π."""
    if Delta == 0:
        raise RamanDetuningError("Delta must be non-zero for the E-Raman gate")
    return (abs(omega1) ** 2 + abs(omega_sigma) ** 2) / (4.0 * Delta)


# Time-dependent sources
class DrivenHamiltonian:
    """H(t) = H_static + Ω1(t) X1 + Ωσ(t) Xσ + h.c.

    The static part (couplings, detunings, decay) is built once; only the
    five laser coefficients are re-evaluated per time sample. ``pulse`` is
    any object with ``sample(times) -> (omega1, omega_sigma)`` arrays, or
    None for constant ``lasers``.
    """

    def __init__(
        self,
        static: np.ndarray,
        x1: np.ndarray,
        xs: np.ndarray,
        pulse=None,
        lasers: Optional[LaserAmplitudes] = None,
        hermitian: bool = True,
    ) -> None:
        self.static = np.asarray(static, dtype=complex)
        self.dim = self.static.shape[0]
        self.pulse = pulse
        self.lasers = lasers or LaserAmplitudes()
        self.hermitian = hermitian
        self._ops = (np.eye(self.dim, dtype=complex), x1, x1.conj().T, xs, xs.conj().T)
        # stacked -i * [H_static, X1, X1†, Xσ, Xσ†] for one matmul per RK stage
        terms = [self.static] + list(self._ops[1:])
        self.generator_stack = -1j * np.concatenate(terms, axis=0)

    @property
    def is_static(self) -> bool:
        return self.pulse is None or getattr(self.pulse, "is_static", False)

    def _amplitudes(self, times: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.pulse is None:
            ones = np.ones_like(times)
            return ones * self.lasers.omega1, ones * self.lasers.omega_sigma
        o1, os_ = self.pulse.sample(times)
        return np.asarray(o1, dtype=complex), np.asarray(os_, dtype=complex)

    def coefficients(self, times: Sequence[float]) -> np.ndarray:
        """Rows [1, Ω1, Ω1*, Ωσ, Ωσ*] for each time."""
        o1, os_ = self._amplitudes(np.asarray(times, dtype=float))
        return np.stack([np.ones_like(o1), o1, o1.conj(), os_, os_.conj()], axis=1)

    def matrix(self, t: float) -> np.ndarray:
        c = self.coefficients([t])[0]
        return self.static + c[1] * self._ops[1] + c[2] * self._ops[2] + c[3] * self._ops[3] + c[4] * self._ops[4]


class FunctionHamiltonian:
    """Generic source wrapping ``fn(t) -> matrix``; used where H is not linear in the lasers."""

    def __init__(self, fn: Callable[[float], np.ndarray], dim: int, static: bool = False, hermitian: bool = True) -> None:
        self.fn = fn
        self.dim = dim
        self.is_static = static
        self.hermitian = hermitian

    def matrix(self, t: float) -> np.ndarray:
        return np.asarray(self.fn(t), dtype=complex)


def full_source(
    params: SystemParams,
    space: HilbertSpace,
    pulse=None,
    lasers: Optional[LaserAmplitudes] = None,
    conditional: bool = True,
) -> DrivenHamiltonian:
    static = _static_full(params, space)
    if conditional:
        static = static + _decay_terms(params, space)
    x1, xs = _laser_raising(space)
    lossless = params.kappa == 0 and params.gamma == 0
    return DrivenHamiltonian(static, x1, xs, pulse=pulse, lasers=lasers, hermitian=lossless or not conditional)


def effective_source(params: SystemParams, pulse=None, lasers: Optional[LaserAmplitudes] = None) -> DrivenHamiltonian:
    x1, xs = _effective_raising()
    return DrivenHamiltonian(_static_effective(params), x1, xs, pulse=pulse, lasers=lasers)


def raman_source(params: SystemParams, pulse=None, lasers: Optional[LaserAmplitudes] = None) -> FunctionHamiltonian:
    """Reduced two-level E-Raman model, re-deriving Ω, Δ11, ΔA from the lasers at each t."""
    if pulse is not None and not getattr(pulse, "is_static", False):
        def at(t: float) -> np.ndarray:
            o1, os_ = pulse.sample(np.array([t]))
            return raman_reduced_matrix(raman_constants(params, LaserAmplitudes(complex(o1[0]), complex(os_[0]))))

        return FunctionHamiltonian(at, 2)

    if pulse is not None:
        o1, os_ = pulse.sample(np.zeros(1))
        lasers = LaserAmplitudes(complex(o1[0]), complex(os_[0]))
    h = raman_reduced_matrix(raman_constants(params, lasers or LaserAmplitudes()))
    return FunctionHamiltonian(lambda t: h, 2, static=True)
