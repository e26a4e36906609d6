from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np

from .errors import TruncationError, UndefinedFidelityError

SQRT2 = np.sqrt(2.0)

# Squared-norm tolerance for calling a state "normalized".
NORM_TOL = 1e-9
# Amplitudes below this are dropped from CSV dumps.
CSV_THRESHOLD = 1e-12


class AtomLevel(IntEnum):
    """Levels of one atom; the integer value is the per-atom basis index.

    L0, L1 are the qubit ground states, LSIGMA the auxiliary ground state
    and L2 the excited state, the only one that decays (rate Γ).
    """

    L0 = 0
    L1 = 1
    LSIGMA = 2
    L2 = 3

    @property
    def label(self) -> str:
        return _LEVEL_LABELS[self]

    @classmethod
    def parse(cls, text: Union[str, int, "AtomLevel"]) -> "AtomLevel":
        if isinstance(text, AtomLevel):
            return text
        if isinstance(text, int):
            return cls(text)
        key = text.strip().lower()
        for level, lab in _LEVEL_LABELS.items():
            if key in (lab, level.name.lower()):
                return level
        raise ValueError(f"unknown atom level {text!r}")


_LEVEL_LABELS = {
    AtomLevel.L0: "0",
    AtomLevel.L1: "1",
    AtomLevel.LSIGMA: "s",
    AtomLevel.L2: "2",
}

GROUND_LEVELS = (AtomLevel.L0, AtomLevel.L1, AtomLevel.LSIGMA)

Label = Tuple[AtomLevel, AtomLevel, int]


@dataclass(frozen=True)
class HilbertSpace:
    """Two four-level atoms times one cavity mode truncated at ``n_max`` photons.

    Basis ordering is row-major over (level of atom 1, level of atom 2, n):
    atom 1 varies slowest, the photon number fastest. Operators are built
    with ``np.kron(np.kron(A1, A2), C)`` in the same order.
    """

    n_max: int = 2

    def __post_init__(self) -> None:
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max!r}")

    @property
    def n_photons(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 16 * self.n_photons

    def index(self, l1: AtomLevel, l2: AtomLevel, n: int = 0) -> int:
        if n < 0 or n > self.n_max:
            raise TruncationError(f"photon number {n} outside [0, {self.n_max}]")
        return (int(l1) * 4 + int(l2)) * self.n_photons + int(n)

    def label(self, index: int) -> Label:
        if not 0 <= index < self.dim:
            raise IndexError(f"basis index {index} out of range [0, {self.dim})")
        pair, n = divmod(index, self.n_photons)
        l1, l2 = divmod(pair, 4)
        return AtomLevel(l1), AtomLevel(l2), n

    def labels(self) -> Iterator[Label]:
        for i in range(self.dim):
            yield self.label(i)

    def basis_vector(self, l1: AtomLevel, l2: AtomLevel, n: int = 0) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(l1, l2, n)] = 1.0
        return v

    # Operator building blocks
    def atom_operator(self, atom: int, ket: AtomLevel, bra: AtomLevel) -> np.ndarray:
        """|ket><bra| acting on atom 1 or 2, identity elsewhere."""
        single = np.zeros((4, 4), dtype=complex)
        single[int(ket), int(bra)] = 1.0
        eye4 = np.eye(4, dtype=complex)
        if atom == 1:
            a1, a2 = single, eye4
        elif atom == 2:
            a1, a2 = eye4, single
        else:
            raise ValueError(f"atom must be 1 or 2, got {atom}")
        return np.kron(np.kron(a1, a2), np.eye(self.n_photons, dtype=complex))

    @cached_property
    def annihilation(self) -> np.ndarray:
        b = np.diag(np.sqrt(np.arange(1, self.n_photons, dtype=float)), k=1).astype(complex)
        return np.kron(np.eye(16, dtype=complex), b)

    @cached_property
    def number(self) -> np.ndarray:
        return np.kron(np.eye(16, dtype=complex), np.diag(np.arange(self.n_photons, dtype=float)).astype(complex))

    @cached_property
    def dfs_projector(self) -> np.ndarray:
        """Dense projector onto span{|ij,0> (i,j ground), |alpha,0>}."""
        p = np.zeros((self.dim, self.dim), dtype=complex)
        for l1 in GROUND_LEVELS:
            for l2 in GROUND_LEVELS:
                k = self.index(l1, l2, 0)
                p[k, k] = 1.0
        alpha = make_named_state(NamedState.ALPHA, space=self).amplitudes
        return p + np.outer(alpha, alpha.conj())


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Complex amplitude vector over a :class:`HilbertSpace`.

    Conditional (no-jump) states are kept unnormalized; their squared norm
    is the no-emission probability.
    """

    amplitudes: np.ndarray
    space: HilbertSpace = field(default_factory=HilbertSpace)

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (self.space.dim,):
            raise ValueError(f"expected {self.space.dim} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, space: HilbertSpace, l1: AtomLevel, l2: AtomLevel, n: int = 0) -> "QuantumState":
        return cls(space.basis_vector(l1, l2, n), space)

    @classmethod
    def qubits(cls, bits: str, space: HilbertSpace) -> "QuantumState":
        """Computational basis state from a two-character string such as "01"."""
        if len(bits) != 2 or any(b not in "01" for b in bits):
            raise ValueError(f"qubit label must be two of '0'/'1', got {bits!r}")
        return cls.basis(space, AtomLevel(int(bits[0])), AtomLevel(int(bits[1])), 0)

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm2() - 1.0) <= tol

    def normalized(self) -> "QuantumState":
        n2 = self.norm2()
        if n2 <= 0.0:
            raise UndefinedFidelityError("cannot normalize a zero-norm state")
        return QuantumState(self.amplitudes / np.sqrt(n2), self.space)

    def amplitude(self, l1: AtomLevel, l2: AtomLevel, n: int = 0) -> complex:
        return complex(self.amplitudes[self.space.index(l1, l2, n)])

    def scaled(self, factor: complex) -> "QuantumState":
        return QuantumState(self.amplitudes * factor, self.space)

    def nonzero(self, threshold: float = CSV_THRESHOLD) -> List[Tuple[Label, complex]]:
        rows = []
        for i in np.flatnonzero(np.abs(self.amplitudes) > threshold):
            rows.append((self.space.label(int(i)), complex(self.amplitudes[i])))
        return rows


class NamedState(str, Enum):
    ALPHA = "alpha"
    A = "A"
    ALPHA_TILDE = "alpha_tilde"
    A_TILDE = "A_tilde"
    E0 = "E0"
    E_PLUS = "E_plus"
    E_MINUS = "E_minus"


def basis_index(l1: AtomLevel, l2: AtomLevel, n: int, space: HilbertSpace) -> int:
    """Position of |l1 l2>|n> in the row-major (l1, l2, n) ordering."""
    return space.index(l1, l2, n)


def make_named_state(tag: NamedState, theta: float = 0.0, phi: float = 0.0,
                     space: HilbertSpace = HilbertSpace()) -> QuantumState:
    """Named two-atom state tensored with the cavity vacuum.

    ALPHA = (|12> - |21>)/sqrt2, A = (|s1> + |1s>)/sqrt2,
    ALPHA_TILDE = (|s2> - |2s>)/sqrt2, A_TILDE = (|s1> - |1s>)/sqrt2,
    E0(θ, φ) = cosθ|11> - e^{iφ} sinθ|A>, and the bright states at Δ = 0
    E±(θ, φ) = (sinθ|11> + e^{iφ} cosθ|A> ± |alpha>)/sqrt2.
    """
    L0, L1, LS, L2 = AtomLevel
    tag = NamedState(tag)
    v = space.basis_vector

    if tag is NamedState.ALPHA:
        amps = (v(L1, L2) - v(L2, L1)) / SQRT2
    elif tag is NamedState.A:
        amps = (v(LS, L1) + v(L1, LS)) / SQRT2
    elif tag is NamedState.ALPHA_TILDE:
        amps = (v(LS, L2) - v(L2, LS)) / SQRT2
    elif tag is NamedState.A_TILDE:
        amps = (v(LS, L1) - v(L1, LS)) / SQRT2
    else:
        a = (v(LS, L1) + v(L1, LS)) / SQRT2
        alpha = (v(L1, L2) - v(L2, L1)) / SQRT2
        phase = np.exp(1j * phi)
        if tag is NamedState.E0:
            amps = np.cos(theta) * v(L1, L1) - phase * np.sin(theta) * a
        else:
            sign = 1.0 if tag is NamedState.E_PLUS else -1.0
            amps = (np.sin(theta) * v(L1, L1) + phase * np.cos(theta) * a + sign * alpha) / SQRT2
    return QuantumState(amps, space)


def dfs_project(psi: QuantumState) -> QuantumState:
    """Keep the decoherence-free part: ground pairs and |alpha>, cavity empty."""
    space = psi.space
    out = np.zeros(space.dim, dtype=complex)
    for l1 in GROUND_LEVELS:
        for l2 in GROUND_LEVELS:
            k = space.index(l1, l2, 0)
            out[k] = psi.amplitudes[k]
    alpha = make_named_state(NamedState.ALPHA, space=space).amplitudes
    out += np.vdot(alpha, psi.amplitudes) * alpha
    return QuantumState(out, space)


def _check_same_space(psi: QuantumState, chi: QuantumState) -> None:
    if psi.space != chi.space:
        raise ValueError(f"states live in different spaces: n_max={psi.space.n_max} vs {chi.space.n_max}")


def overlap(psi: QuantumState, chi: QuantumState) -> complex:
    """<psi|chi>."""
    _check_same_space(psi, chi)
    return complex(np.vdot(psi.amplitudes, chi.amplitudes))


def fidelity_conditional(psi: QuantumState, target: QuantumState) -> float:
    """|<target|psi>|^2 / <psi|psi>, i.e. the fidelity given no emission."""
    _check_same_space(psi, target)
    n2 = psi.norm2()
    if n2 <= 0.0:
        raise UndefinedFidelityError("fidelity undefined for a zero-norm state")
    return float(abs(np.vdot(target.amplitudes, psi.amplitudes)) ** 2 / n2)


def format_label(label: Label) -> str:
    l1, l2, n = label
    return f"{l1.label},{l2.label},{n}"


def parse_label(text: str) -> Label:
    """Parse "l1,l2,n" (levels as 0/1/s/2) into a basis label."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"basis label must be 'l1,l2,n', got {text!r}")
    return AtomLevel.parse(parts[0]), AtomLevel.parse(parts[1]), int(parts[2])


def write_state_csv(psi: QuantumState, path: Union[str, Path]) -> Path:
    """Write one row (l1, l2, n, re, im) per amplitude above 1e-12."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["l1", "l2", "n", "re", "im"])
        for (l1, l2, n), amp in psi.nonzero():
            w.writerow([l1.label, l2.label, n, repr(amp.real), repr(amp.imag)])
    return path
