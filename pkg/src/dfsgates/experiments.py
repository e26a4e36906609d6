"""State-preparation experiments shared by the CLI, sweeps and figures."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Literal, Optional

from .hamiltonian import LaserAmplitudes, SystemParams, full_source, raman_constants
from .hilbert import HilbertSpace, NamedState, QuantumState, fidelity_conditional, make_named_state
from .propagate import IntegratorConfig, PropagationResult, decay_window, propagate
from .pulses import Constant, StirapPair

log = logging.getLogger(__name__)

DEFAULT_CFG = IntegratorConfig()

Readout = Literal["transfer", "end"]


@dataclass(frozen=True)
class PrepResult:
    fidelity: float  # conditional, to the target state
    p0: float
    time: float
    result: Optional[PropagationResult] = None


def _finish(res: PropagationResult, params: SystemParams, target: QuantumState, window: bool,
            cfg: IntegratorConfig) -> PrepResult:
    final = res
    if window:
        final = decay_window(res.final_state, params, cfg=cfg.model_copy(update={"record_stride": 0}))
    fid = fidelity_conditional(final.final_state, target)
    p0 = final.norm2
    log.debug("prep: T=%.6g F=%.6g P0=%.6g", res.time, fid, p0)
    return PrepResult(fid, p0, res.time, res)


def raman_prep(
    params: SystemParams,
    omega1: complex = 0.01,
    omega_sigma: Optional[complex] = None,
    n_max: int = 2,
    cfg: IntegratorConfig = DEFAULT_CFG,
    window: bool = False,
) -> PrepResult:
    """E-Raman transfer |11> -> |A> on the full conditional model, T = π/K.

    ``omega_sigma`` defaults to ``omega1``.
    """
    if omega_sigma is None:
        omega_sigma = omega1
    space = HilbertSpace(n_max)
    lasers = LaserAmplitudes(omega1, omega_sigma)
    T = raman_constants(params, lasers).prep_time
    src = full_source(params, space, pulse=Constant(omega1, omega_sigma, T))
    res = propagate(src, QuantumState.qubits("11", space), T, cfg)
    return _finish(res, params, make_named_state(NamedState.A, space=space), window, cfg)


def stirap_prep(
    params: SystemParams,
    omega: float = 0.02,
    freq: float = 4e-5,
    n_max: int = 2,
    cfg: IntegratorConfig = DEFAULT_CFG,
    window: bool = False,
    readout: Readout = "transfer",
) -> PrepResult:
    """E-STIRAP transfer |11> -> |A> with the counterintuitive pair, T = 3π/(2ω).

    ``readout="transfer"`` reads the state at 2T/3, when Ωσ has closed and
    the transfer is complete. ``readout="end"`` keeps Ω1 on until T; the
    tail only pumps the |1> half of |A> towards level 2, which costs P0
    (about 0.08 at Ω = 0.02, ω = 4e-5) and barely moves F.
    """
    space = HilbertSpace(n_max)
    pulse = StirapPair(omega=omega, freq=freq)
    if readout == "transfer":
        T = pulse.transfer_time
    elif readout == "end":
        T = pulse.duration
    else:
        raise ValueError(f"readout must be 'transfer' or 'end', got {readout!r}")
    src = full_source(params, space, pulse=pulse)
    res = propagate(src, QuantumState.qubits("11", space), T, cfg)
    return _finish(res, params, make_named_state(NamedState.A, space=space), window, cfg)


def trivial_evolution(
    params: SystemParams,
    omega1: float = 0.01,
    Delta: Optional[float] = None,
    T: float = 2000.0,
    initial: str = "01",
    n_max: int = 2,
    cfg: IntegratorConfig = DEFAULT_CFG,
    window: bool = True,
) -> PrepResult:
    """Drive Ω1 alone on a computational state; fidelity is to the initial state."""
    if Delta is not None:
        params = params.with_(Delta=Delta)
    space = HilbertSpace(n_max)
    psi0 = QuantumState.qubits(initial, space)
    src = full_source(params, space, pulse=Constant(omega1, 0.0, T))
    res = propagate(src, psi0, T, cfg)
    return _finish(res, params, psi0, window, cfg)


@dataclass(frozen=True)
class ConvergenceReport:
    fidelity_nmax: float  # |F(n_max+1) - F(n_max)|
    p0_nmax: float
    fidelity_step: float  # |F(h/2) - F(h)|
    p0_step: float

    @property
    def worst(self) -> float:
        return max(self.fidelity_nmax, self.p0_nmax, self.fidelity_step, self.p0_step)


def convergence_check(
    experiment: Callable[..., PrepResult],
    params: SystemParams,
    n_max: int = 2,
    cfg: IntegratorConfig = DEFAULT_CFG,
    **kwargs,
) -> ConvergenceReport:
    """Rerun an experiment with one more photon and with half the step."""
    base = experiment(params, n_max=n_max, cfg=cfg, **kwargs)
    more = experiment(params, n_max=n_max + 1, cfg=cfg, **kwargs)
    finer = experiment(params, n_max=n_max, cfg=cfg.model_copy(update={"step": cfg.step / 2}), **kwargs)
    report = ConvergenceReport(
        fidelity_nmax=abs(more.fidelity - base.fidelity),
        p0_nmax=abs(more.p0 - base.p0),
        fidelity_step=abs(finer.fidelity - base.fidelity),
        p0_step=abs(finer.p0 - base.p0),
    )
    log.info("convergence: worst deviation %.3g", report.worst)
    return report
