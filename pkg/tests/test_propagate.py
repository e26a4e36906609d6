import csv
import math

import numpy as np
import pytest
from scipy.linalg import expm

from dfsgates.errors import IntegrationDivergedError, NormGrowthError
from dfsgates.hamiltonian import FunctionHamiltonian, LaserAmplitudes, SystemParams, effective_source, full_source
from dfsgates.analytic import raman_propagator
from dfsgates.hamiltonian import raman_constants
from dfsgates.hilbert import AtomLevel, HilbertSpace, NamedState, QuantumState, make_named_state
from dfsgates.propagate import (
    IntegratorConfig,
    decay_window,
    default_window,
    propagate,
    propagate_effective,
    propagate_many,
    reachable_indices,
    rk4_step_matrix,
)
from dfsgates.pulses import Constant, StirapPair

L0, L1, LS, L2 = AtomLevel

H2 = np.array([[0.3, 0.8 - 0.2j], [0.8 + 0.2j, -0.5]])


def _rk4_error(source, h: float, T: float = 10.0) -> float:
    psi0 = np.array([1.0, 0.0], dtype=complex)
    exact = expm(-1j * H2 * T) @ psi0
    res = propagate_effective(source, psi0, T, IntegratorConfig(step=h))
    return float(np.linalg.norm(res.amplitudes - exact))


@pytest.mark.parametrize("static", [True, False])
def test_rk4_is_fourth_order(static):
    src = FunctionHamiltonian(lambda t: H2, 2, static=static)
    errors = [_rk4_error(src, h) for h in (0.1, 0.05, 0.025)]
    slopes = np.diff(np.log2(errors)) * -1
    assert np.all(np.abs(slopes - 4.0) < 0.3)


def test_step_matrix_is_taylor_polynomial():
    dt = 0.01
    assert np.max(np.abs(rk4_step_matrix(H2, dt) - expm(-1j * H2 * dt))) < 1e-10


def test_driven_matches_function_source():
    params = SystemParams(Delta=0.3)
    pulse = StirapPair(omega=0.5, freq=0.05)
    driven = effective_source(params, pulse=pulse)
    generic = FunctionHamiltonian(driven.matrix, 3)
    psi0 = [1.0, 0.0, 0.0]
    cfg = IntegratorConfig(step=0.05)
    a = propagate_effective(driven, psi0, pulse.duration, cfg).amplitudes
    b = propagate_effective(generic, psi0, pulse.duration, cfg).amplitudes
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_unitary_evolution_keeps_the_norm():
    space = HilbertSpace(2)
    src = full_source(SystemParams(Delta=0.5), space, pulse=StirapPair(omega=0.1, freq=0.01))
    res = propagate(src, QuantumState.qubits("11", space), 100.0, IntegratorConfig(step=0.05))
    assert res.norm2 == pytest.approx(1.0, abs=1e-8)
    assert res.p0 == pytest.approx(res.norm2)


def test_doubly_excited_state_decays():
    space = HilbertSpace(2)
    params = SystemParams(kappa=0.1, gamma=0.1)
    src = full_source(params, space, lasers=LaserAmplitudes())
    res = propagate(src, QuantumState.basis(space, L2, L2, 0), 100.0)
    assert res.norm2 == pytest.approx(math.exp(-20.0), rel=1e-6)


def test_recorded_norm_never_grows():
    space = HilbertSpace(1)
    params = SystemParams(kappa=0.1, gamma=0.1, Delta=0.5)
    src = full_source(params, space, pulse=Constant(0.3, 0.1, 50.0, ripple=0.2))
    res = propagate(src, QuantumState.qubits("11", space), 50.0, IntegratorConfig(step=0.05, record_stride=10))
    traj = res.trajectory
    assert traj is not None
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(50.0)
    assert np.all(np.diff(traj.norm2) <= 1e-15)
    assert traj.norm2[-1] < 1.0


def test_many_states_match_single_runs():
    space = HilbertSpace(1)
    src = full_source(SystemParams(kappa=0.1, gamma=0.1, Delta=1.0), space, pulse=StirapPair(omega=0.2, freq=0.02))
    states = [QuantumState.qubits(b, space) for b in ("01", "11")]
    cfg = IntegratorConfig(step=0.05)
    together = propagate_many(src, states, 100.0, cfg)
    for psi, res in zip(states, together):
        alone = propagate(src, psi, 100.0, cfg)
        np.testing.assert_allclose(res.amplitudes, alone.amplitudes, atol=1e-13)


def test_step_plan_lands_on_T():
    res = propagate_effective(np.diag([0.1, 0.2]), [1.0, 0.0], 1.0, IntegratorConfig(step=0.3))
    assert res.steps == 4
    assert res.step * res.steps == pytest.approx(1.0)


def test_zero_duration_is_identity():
    space = HilbertSpace(1)
    psi = QuantumState.qubits("10", space)
    res = propagate(full_source(SystemParams(), space), psi, 0.0)
    assert res.steps == 0
    np.testing.assert_array_equal(res.final_state.amplitudes, psi.amplitudes)


def test_gain_is_reported():
    gain = FunctionHamiltonian(lambda t: np.array([[0.5j]]), 1, static=True, hermitian=False)
    with pytest.raises(NormGrowthError):
        propagate_effective(gain, [1.0], 1.0, IntegratorConfig(step=0.01, check_stride=10))


def test_divergence_is_reported():
    huge = FunctionHamiltonian(lambda t: np.array([[1e200j]]), 1, static=False, hermitian=False)
    with np.errstate(all="ignore"):
        with pytest.raises(IntegrationDivergedError) as info:
            propagate_effective(huge, [1.0], 1.0, IntegratorConfig(step=0.1, check_stride=2))
    assert info.value.step > 0


def test_decay_window():
    params = SystemParams(kappa=0.1, gamma=0.2)
    assert default_window(params) == pytest.approx(50.0)
    assert default_window(SystemParams()) == 0.0

    space = HilbertSpace(1)
    photon = QuantumState.basis(space, L0, L0, 1)
    res = decay_window(photon, params)
    assert res.time == pytest.approx(50.0)
    assert res.norm2 == pytest.approx(math.exp(-5.0), rel=1e-6)
    with pytest.raises(ValueError):
        decay_window(photon, params, duration=-1.0)


def test_decay_window_leaves_ground_amplitudes_alone():
    space = HilbertSpace(2)
    target = make_named_state(NamedState.A, space=space)
    res = decay_window(target, SystemParams(kappa=0.1, gamma=0.1, delta=0.01))
    assert res.time == pytest.approx(50.0)
    assert np.vdot(target.amplitudes, res.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_full_model_follows_the_raman_closed_form():
    params = SystemParams(Delta=1.357)
    lasers = LaserAmplitudes(0.01, 0.01)
    c = raman_constants(params, lasers)
    space = HilbertSpace(2)
    src = full_source(params, space, lasers=lasers)
    res = propagate(src, QuantumState.qubits("11", space), 2 * math.pi / c.K, IntegratorConfig(step=0.02, record_stride=50000))
    target = make_named_state(NamedState.A, space=space).amplitudes
    traj = res.trajectory
    assert len(traj.times) > 100
    full = np.abs(traj.states @ target.conj()) ** 2
    closed = np.array([abs(raman_propagator(c, t)[1, 0]) ** 2 for t in traj.times])
    assert np.max(np.abs(full - closed)) < 1e-3


def test_reachable_indices():
    space = HilbertSpace(2)
    src = full_source(SystemParams(kappa=0.1, gamma=0.1), space, pulse=StirapPair())
    ground = QuantumState.qubits("00", space)
    assert reachable_indices(src, ground.amplitudes).tolist() == [space.index(L0, L0, 0)]

    keep = reachable_indices(src, QuantumState.qubits("11", space).amplitudes)
    assert keep.size == 27
    assert space.index(L1, L1, 0) in keep
    assert space.index(LS, LS, 0) in keep
    assert space.index(L0, L1, 0) not in keep


def test_trajectory_csv(tmp_path):
    space = HilbertSpace(1)
    src = full_source(SystemParams(Delta=1.0), space, lasers=LaserAmplitudes(0.1, 0.1))
    res = propagate(src, QuantumState.qubits("11", space), 1.0, IntegratorConfig(step=0.1, record_stride=5))
    path = res.trajectory.write_csv(tmp_path / "traj.csv", ["1,1,0", "s,1,0"])
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "norm2", "1,1,0", "s,1,0"]
    assert len(rows) == 1 + 3
    assert complex(rows[1][2]) == 1
