from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numba import njit
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import IntegrationDivergedError, NormGrowthError
from .hamiltonian import (
    DrivenHamiltonian,
    FunctionHamiltonian,
    LaserAmplitudes,
    OperatorMatrix,
    SystemParams,
    full_source,
)
from .hilbert import (
    AtomLevel,
    HilbertSpace,
    NamedState,
    QuantumState,
    format_label,
    make_named_state,
    parse_label,
)

log = logging.getLogger(__name__)

Source = Union[DrivenHamiltonian, FunctionHamiltonian, OperatorMatrix, np.ndarray]


class IntegratorConfig(BaseModel):
    """Fixed-step RK4 settings (times in 1/g).

    The run is split into N = max(min_steps, ceil(T/step)) equal steps of
    T/N. ``record_stride`` > 0 records every that many steps (0 disables
    recording); divergence is checked every ``check_stride`` steps.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    step: float = Field(0.02, gt=0)
    method: Literal["rk4"] = "rk4"
    record_stride: int = Field(0, ge=0)
    check_stride: int = Field(4096, gt=0)
    min_steps: int = Field(1, ge=1)
    norm_tol: float = Field(1e-12, ge=0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (samples, dim)
    space: Optional[HilbertSpace] = None

    @property
    def norm2(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)

    def amplitude(self, label: Union[str, Tuple[AtomLevel, AtomLevel, int], int]) -> np.ndarray:
        if isinstance(label, int):
            return self.states[:, label]
        if self.space is None:
            raise ValueError("labelled amplitudes need a full Hilbert space")
        l1, l2, n = parse_label(label) if isinstance(label, str) else label
        return self.states[:, self.space.index(l1, l2, n)]

    def write_csv(self, path: Union[str, Path], labels: Sequence[str] = ()) -> Path:
        """Header t, norm2, then one complex column per "l1,l2,n" label."""
        path = Path(path)
        columns = [self.amplitude(lab) for lab in labels]
        headers = [format_label(parse_label(lab)) for lab in labels]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "norm2", *headers])
            for i, (t, n2) in enumerate(zip(self.times, self.norm2)):
                w.writerow([repr(float(t)), repr(float(n2)), *[repr(complex(c[i])) for c in columns]])
        return path


@dataclass(frozen=True, eq=False)
class PropagationResult:
    amplitudes: np.ndarray
    p0: float
    time: float
    steps: int
    step: float
    space: Optional[HilbertSpace] = None
    trajectory: Optional[Trajectory] = None

    @property
    def final_state(self) -> QuantumState:
        if self.space is None:
            raise ValueError("effective-model results carry raw amplitudes only")
        return QuantumState(self.amplitudes, self.space)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> np.ndarray:
        return self.amplitudes / math.sqrt(self.norm2)

    def fidelity(self, target: Union[QuantumState, np.ndarray]) -> float:
        """Conditional fidelity |<target|psi>|²/<psi|psi> of the final state."""
        vec = target.amplitudes if isinstance(target, QuantumState) else np.asarray(target, dtype=complex)
        return float(abs(np.vdot(vec, self.amplitudes)) ** 2 / self.norm2)

    def bloch_path(self) -> np.ndarray:
        """Bloch vectors of the {|11>, |A>} subspace along the recorded trajectory."""
        from .analytic import bloch_vector

        if self.trajectory is None:
            raise ValueError("no trajectory recorded; set record_stride > 0")
        states = self.trajectory.states
        if self.space is None:
            c11, ca = states[:, 0], states[:, 1]
        else:
            c11 = states[:, self.space.index(AtomLevel.L1, AtomLevel.L1, 0)]
            ca = states @ make_named_state(NamedState.A, space=self.space).amplitudes.conj()
        return np.array([bloch_vector(a, b) for a, b in zip(c11, ca)])


# RK4 core
def _as_source(source: Source):
    if isinstance(source, (DrivenHamiltonian, FunctionHamiltonian)):
        return source
    m = source.matrix if isinstance(source, OperatorMatrix) else np.asarray(source, dtype=complex)
    return FunctionHamiltonian(lambda t: m, m.shape[0], static=True)


def _step_plan(T: float, cfg: IntegratorConfig) -> Tuple[int, float]:
    if T < 0:
        raise ValueError(f"propagation time must be >= 0, got {T}")
    if T == 0:
        return 0, 0.0
    n = max(cfg.min_steps, int(math.ceil(T / cfg.step - 1e-9)))
    return n, T / n


def rk4_step_matrix(h: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step for dψ/dt = -iHψ with constant H: the 4th-order Taylor polynomial of exp(-iH dt)."""
    g = -1j * dt * np.asarray(h, dtype=complex)
    eye = np.eye(g.shape[0], dtype=complex)
    return eye + g @ (eye + g @ (eye + g @ (eye + g / 4.0) / 3.0) / 2.0)


class _Recorder:
    def __init__(self, stride: int, tol: float) -> None:
        self.stride = stride
        self.tol = tol
        self.times: List[float] = []
        self.states: List[np.ndarray] = []
        self._last: Optional[np.ndarray] = None

    def check(self, step: int, t: float, psi: np.ndarray) -> None:
        if not np.all(np.isfinite(psi)):
            raise IntegrationDivergedError(step, t)
        n2 = np.sum(np.abs(psi) ** 2, axis=0)
        if self._last is not None and np.any(n2 > self._last * (1.0 + self.tol) + self.tol):
            raise NormGrowthError(f"norm grew at step {step} (t={t:.6g}): {np.max(n2 - self._last):.3e}")
        self._last = n2

    def record(self, step: int, t: float, psi: np.ndarray) -> None:
        self.check(step, t, psi)
        if self.stride:
            self.times.append(t)
            self.states.append(np.array(psi, copy=True))


def _integrate_static(h: np.ndarray, psi: np.ndarray, n: int, dt: float, cfg: IntegratorConfig, rec: _Recorder) -> np.ndarray:
    m = rk4_step_matrix(h, dt)
    chunk = cfg.record_stride or cfg.check_stride
    m_chunk = np.linalg.matrix_power(m, chunk)
    done = 0
    while done + chunk <= n:
        psi = m_chunk @ psi
        done += chunk
        rec.record(done, done * dt, psi)
    if done < n:
        psi = np.linalg.matrix_power(m, n - done) @ psi
    return psi


@njit(cache=True)
def _apply_terms(rows, cols, vals, terms, c, y, out):
    out[:, :] = 0.0
    m = y.shape[1]
    for i in range(rows.shape[0]):
        a = vals[i] * c[terms[i]]
        r = rows[i]
        q = cols[i]
        for j in range(m):
            out[r, j] += a * y[q, j]


@njit(cache=True)
def _shifted(y, a, k, out):
    for i in range(y.shape[0]):
        for j in range(y.shape[1]):
            out[i, j] = y[i, j] + a * k[i, j]


@njit(cache=True)
def _rk4_sparse_block(rows, cols, vals, terms, coeffs, psi, dt):
    """RK4 over len(coeffs) // 2 steps; coeffs rows are the term weights at t0, t0 + dt/2, t0 + dt, ..."""
    half = 0.5 * dt
    sixth = dt / 6.0
    k1 = np.empty_like(psi)
    k2 = np.empty_like(psi)
    k3 = np.empty_like(psi)
    k4 = np.empty_like(psi)
    tmp = np.empty_like(psi)
    for s in range((coeffs.shape[0] - 1) // 2):
        _apply_terms(rows, cols, vals, terms, coeffs[2 * s], psi, k1)
        _shifted(psi, half, k1, tmp)
        _apply_terms(rows, cols, vals, terms, coeffs[2 * s + 1], tmp, k2)
        _shifted(psi, half, k2, tmp)
        _apply_terms(rows, cols, vals, terms, coeffs[2 * s + 1], tmp, k3)
        _shifted(psi, dt, k3, tmp)
        _apply_terms(rows, cols, vals, terms, coeffs[2 * s + 2], tmp, k4)
        for i in range(psi.shape[0]):
            for j in range(psi.shape[1]):
                psi[i, j] += sixth * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
    return psi


def reachable_indices(src: DrivenHamiltonian, psi: np.ndarray) -> np.ndarray:
    """Basis indices connected to the support of ``psi`` by any term of ``src``."""
    d = src.dim
    pattern = np.any(src.generator_stack.reshape(-1, d, d) != 0, axis=0)
    _, labels = connected_components(csr_matrix(pattern | pattern.T), directed=False)
    support = np.any(psi.reshape(d, -1) != 0, axis=1)
    return np.flatnonzero(np.isin(labels, labels[support]))


def _integrate_driven(src: DrivenHamiltonian, psi: np.ndarray, n: int, dt: float, cfg: IntegratorConfig, rec: _Recorder) -> np.ndarray:
    d = src.dim
    shape = psi.shape
    keep = reachable_indices(src, psi)
    stack = src.generator_stack.reshape(-1, d, d)[:, keep][:, :, keep]
    terms, rows, cols = np.nonzero(stack)
    vals = np.ascontiguousarray(stack[terms, rows, cols])
    terms, rows, cols = (a.astype(np.int64) for a in (terms, rows, cols))
    sub = np.ascontiguousarray(psi.reshape(d, -1)[keep])
    log.debug("rk4 driven: %d of %d states reachable, %d couplings", keep.size, d, vals.size)

    def expand(y: np.ndarray) -> np.ndarray:
        out = np.zeros((d, y.shape[1]), dtype=complex)
        out[keep] = y
        return out.reshape(shape)

    half = 0.5 * dt
    step = 0
    while step < n:
        stop = min(n, (step // cfg.check_stride + 1) * cfg.check_stride)
        if cfg.record_stride:
            stop = min(stop, (step // cfg.record_stride + 1) * cfg.record_stride)
        times = step * dt + half * np.arange(2 * (stop - step) + 1)
        coeffs = np.ascontiguousarray(src.coefficients(times), dtype=complex)
        sub = _rk4_sparse_block(rows, cols, vals, terms, coeffs, sub, dt)
        step = stop
        if cfg.record_stride and step % cfg.record_stride == 0:
            rec.record(step, step * dt, expand(sub))
        else:
            rec.check(step, step * dt, expand(sub))
    return expand(sub)


def _integrate_function(src: FunctionHamiltonian, psi: np.ndarray, n: int, dt: float, cfg: IntegratorConfig, rec: _Recorder) -> np.ndarray:
    half = 0.5 * dt
    for k in range(n):
        t = k * dt
        h1, h2, h4 = src.matrix(t), src.matrix(t + half), src.matrix(t + dt)
        k1 = -1j * (h1 @ psi)
        k2 = -1j * (h2 @ (psi + half * k1))
        k3 = -1j * (h2 @ (psi + half * k2))
        k4 = -1j * (h4 @ (psi + dt * k3))
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step = k + 1
        if cfg.record_stride and step % cfg.record_stride == 0:
            rec.record(step, step * dt, psi)
        elif step % cfg.check_stride == 0:
            rec.check(step, step * dt, psi)
    return psi


def _integrate(source: Source, psi0: np.ndarray, T: float, cfg: IntegratorConfig) -> Tuple[np.ndarray, int, float, _Recorder]:
    src = _as_source(source)
    psi = np.array(psi0, dtype=complex, copy=True)
    if psi.shape[0] != src.dim:
        raise ValueError(f"state dimension {psi.shape[0]} does not match operator dimension {src.dim}")
    n, dt = _step_plan(T, cfg)
    rec = _Recorder(cfg.record_stride, cfg.norm_tol)
    rec.record(0, 0.0, psi)
    if n:
        if src.is_static:
            psi = _integrate_static(src.matrix(0.0), psi, n, dt, cfg, rec)
        elif isinstance(src, DrivenHamiltonian):
            psi = _integrate_driven(src, psi, n, dt, cfg, rec)
        else:
            psi = _integrate_function(src, psi, n, dt, cfg, rec)
        if not rec.times or rec.times[-1] != n * dt:
            rec.record(n, T, psi)
    log.debug("rk4: dim=%d steps=%d dt=%.4g T=%.6g static=%s", src.dim, n, dt, T, src.is_static)
    return psi, n, dt, rec


def _result(psi: np.ndarray, psi0: np.ndarray, T: float, n: int, dt: float, space, rec: Optional[_Recorder]) -> PropagationResult:
    n0 = float(np.vdot(psi0, psi0).real)
    traj = None
    if rec is not None and rec.stride:
        traj = Trajectory(np.array(rec.times), np.array(rec.states), space)
    return PropagationResult(
        amplitudes=psi,
        p0=float(np.vdot(psi, psi).real) / n0 if n0 > 0 else 0.0,
        time=T,
        steps=n,
        step=dt,
        space=space,
        trajectory=traj,
    )


def propagate(source: Source, psi0: QuantumState, T: float, cfg: IntegratorConfig = IntegratorConfig()) -> PropagationResult:
    """Integrate dψ/dt = -i H(t) ψ over [0, T] from ``psi0``.

    ``source`` is a static operator or a time-dependent source from
    :mod:`dfsgates.hamiltonian`. The final state is left unnormalized;
    ``p0`` is its squared norm relative to the initial one.
    """
    psi, n, dt, rec = _integrate(source, psi0.amplitudes, T, cfg)
    return _result(psi, psi0.amplitudes, T, n, dt, psi0.space, rec)


def propagate_many(
    source: Source,
    states: Sequence[QuantumState],
    T: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> List[PropagationResult]:
    """Propagate several initial states together (one matrix per RK stage); no trajectories."""
    if not states:
        return []
    block = np.column_stack([s.amplitudes for s in states])
    quiet = cfg.model_copy(update={"record_stride": 0})
    psi, n, dt, _ = _integrate(source, block, T, quiet)
    return [_result(psi[:, i], block[:, i], T, n, dt, s.space, None) for i, s in enumerate(states)]


def propagate_effective(
    source: Source,
    psi0: Union[np.ndarray, Sequence[complex]],
    T: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> PropagationResult:
    """Same integrator on the 2- or 3-level effective models (raw amplitude vectors)."""
    vec = np.asarray(psi0, dtype=complex)
    psi, n, dt, rec = _integrate(source, vec, T, cfg)
    return _result(psi, vec, T, n, dt, None, rec)


def default_window(params: SystemParams) -> float:
    """5/min(κ, Γ) over the non-zero rates; 0 when nothing decays."""
    rates = [r for r in (params.kappa, params.gamma) if r > 0]
    return 5.0 / min(rates) if rates else 0.0


def decay_window(
    psi: QuantumState,
    params: SystemParams,
    duration: Optional[float] = None,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> PropagationResult:
    """Let excited and cavity amplitudes decay with all lasers off.

    Ground-state amplitudes in the cavity vacuum are left untouched.
    """
    if duration is None:
        duration = default_window(params)
    if duration < 0:
        raise ValueError(f"decay window must be >= 0, got {duration}")
    return propagate(window_source(params, psi.space), psi, duration, cfg)


def window_source(params: SystemParams, space: HilbertSpace) -> DrivenHamiltonian:
    """Conditional Hamiltonian with the lasers off.

    δ is measured against the Ωσ laser frequency, so without lasers the
    frame is taken with δ = 0 and |σ> picks up no phase.
    """
    return full_source(params.with_(delta=0.0), space, lasers=LaserAmplitudes())
