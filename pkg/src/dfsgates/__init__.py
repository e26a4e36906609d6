"""Decoherence-free two-qubit phase gates with two four-level atoms in a cavity.

Public API:
- hilbert: HilbertSpace, QuantumState, AtomLevel, NamedState, make_named_state
- hamiltonian: SystemParams, LaserAmplitudes, build_full, build_conditional,
  build_effective, full_source, effective_source, raman_source
- pulses: Constant, StirapPair, LinearRampRatio, SineRampRatio
- propagate: IntegratorConfig, propagate, propagate_effective, decay_window
- analytic: raman_propagator, stirap_eigensystem, stirap_propagator, phases, ramp_phase
- gates: GateKind, GateProtocol, run_gate, extract_phase, gate_fidelity
- experiments: raman_prep, stirap_prep, trivial_evolution
- sweep / figures: SweepSpec, run_sweep, reproduce_figure
"""

__version__ = "0.1.0"

from .analytic import phases, ramp_phase, raman_propagator, stirap_eigensystem, stirap_propagator
from .experiments import raman_prep, stirap_prep, trivial_evolution
from .figures import reproduce_figure
from .gates import GateKind, GateProtocol, extract_phase, gate_fidelity, run_gate
from .hamiltonian import (
    LaserAmplitudes,
    SystemParams,
    build_conditional,
    build_effective,
    build_full,
    effective_source,
    full_source,
    raman_source,
)
from .hilbert import AtomLevel, HilbertSpace, NamedState, QuantumState, make_named_state
from .propagate import IntegratorConfig, decay_window, propagate, propagate_effective
from .pulses import Constant, LinearRampRatio, SineRampRatio, StirapPair
from .sweep import SweepSpec, run_sweep

__all__ = [
    "__version__",
    "AtomLevel",
    "HilbertSpace",
    "NamedState",
    "QuantumState",
    "make_named_state",
    "SystemParams",
    "LaserAmplitudes",
    "build_full",
    "build_conditional",
    "build_effective",
    "full_source",
    "effective_source",
    "raman_source",
    "Constant",
    "StirapPair",
    "LinearRampRatio",
    "SineRampRatio",
    "IntegratorConfig",
    "propagate",
    "propagate_effective",
    "decay_window",
    "raman_propagator",
    "stirap_eigensystem",
    "stirap_propagator",
    "phases",
    "ramp_phase",
    "GateKind",
    "GateProtocol",
    "run_gate",
    "extract_phase",
    "gate_fidelity",
    "raman_prep",
    "stirap_prep",
    "trivial_evolution",
    "SweepSpec",
    "run_sweep",
    "reproduce_figure",
]
