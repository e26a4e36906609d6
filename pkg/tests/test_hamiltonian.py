import math

import numpy as np
import pytest

from dfsgates.errors import RamanDetuningError
from dfsgates.hamiltonian import (
    LaserAmplitudes,
    SystemParams,
    build_conditional,
    build_effective,
    build_full,
    build_raman_reduced,
    check_projector_identity,
    effective_source,
    full_source,
    raman_constants,
    raman_cp_delta,
    raman_source,
)
from dfsgates.hilbert import AtomLevel, HilbertSpace, NamedState, make_named_state
from dfsgates.pulses import Constant, StirapPair

L0, L1, LS, L2 = AtomLevel


def test_full_hamiltonian_is_hermitian():
    space = HilbertSpace(2)
    params = SystemParams(Delta=0.7, delta=1e-3)
    h = build_full(params, LaserAmplitudes(0.03 + 0.01j, 0.02), space)
    assert h.hermitian
    assert h.hermiticity_error() < 1e-14


def test_conditional_anti_hermitian_part():
    space = HilbertSpace(2)
    params = SystemParams(kappa=0.1, gamma=0.2, Delta=1.0)
    lasers = LaserAmplitudes(0.01, 0.01)
    h = build_conditional(params, lasers, space)
    assert not h.hermitian
    anti = (h.matrix - h.matrix.conj().T) / 2j
    expected = -0.5 * params.kappa * space.number - 0.5 * params.gamma * (
        space.atom_operator(1, L2, L2) + space.atom_operator(2, L2, L2)
    )
    np.testing.assert_allclose(anti, expected, atol=1e-15)


def test_lossless_conditional_is_hermitian():
    h = build_conditional(SystemParams(), LaserAmplitudes(0.01, 0.01), HilbertSpace(1))
    assert h.hermitian


def test_computational_zero_state_is_uncoupled():
    space = HilbertSpace()
    h = build_conditional(SystemParams(kappa=0.1, gamma=0.1, Delta=1.0), LaserAmplitudes(0.05, 0.05), space).matrix
    k = space.index(L0, L0, 0)
    assert np.all(h[:, k] == 0)
    assert np.all(h[k, :] == 0)


def test_alpha_is_dark_to_the_cavity():
    space = HilbertSpace()
    alpha = make_named_state(NamedState.ALPHA, space=space).amplitudes
    h = build_full(SystemParams(Delta=0.0), LaserAmplitudes(), space).matrix
    np.testing.assert_allclose(h @ alpha, 0.0, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_projector_identity(seed):
    rng = np.random.default_rng(seed)
    o1, os_ = rng.normal(size=2) + 1j * rng.normal(size=2)
    err = check_projector_identity(SystemParams(Delta=rng.normal()), LaserAmplitudes(o1, os_), HilbertSpace(2))
    assert err < 1e-12


def test_effective_hamiltonian_entries():
    h = build_effective(SystemParams(Delta=1.5, delta=0.2), LaserAmplitudes(0.4, 0.6j)).matrix
    assert h[0, 2] == pytest.approx(0.2)
    assert h[2, 0] == pytest.approx(0.2)
    assert h[1, 2] == pytest.approx(0.3j)
    assert h[2, 1] == pytest.approx(-0.3j)
    np.testing.assert_allclose(np.diag(h), [0.0, -0.2, -1.5])


def test_effective_spectrum_at_zero_delta():
    rng = np.random.default_rng(7)
    for _ in range(100):
        o1, os_ = rng.normal(size=2) + 1j * rng.normal(size=2)
        Delta = rng.uniform(-3.0, 3.0)
        h = build_effective(SystemParams(Delta=Delta), LaserAmplitudes(o1, os_)).matrix
        root = math.sqrt(abs(o1) ** 2 + abs(os_) ** 2 + Delta ** 2)
        expected = sorted([0.0, 0.5 * (-Delta + root), 0.5 * (-Delta - root)])
        np.testing.assert_allclose(np.linalg.eigvalsh(h), expected, atol=1e-10)

def test_raman_constants():
    c = raman_constants(SystemParams(Delta=1.357), LaserAmplitudes(0.01, 0.01))
    assert c.Omega == pytest.approx(1e-4 / 2.714)
    assert c.Delta11 == pytest.approx(-1e-4 / 5.428)
    assert c.DeltaA == pytest.approx(c.Delta11)
    assert c.K == pytest.approx(abs(c.Omega))
    assert c.prep_time == pytest.approx(math.pi * 2.714 / 1e-4)
    assert c.gate_time == pytest.approx(2 * c.prep_time)


def test_raman_needs_detuning():
    with pytest.raises(RamanDetuningError):
        raman_constants(SystemParams(Delta=0.0), LaserAmplitudes(0.01, 0.01))
    with pytest.raises(ZeroDivisionError):
        raman_cp_delta(0.01, 0.01, 0.0)


def test_cp_detuning_cancels_light_shifts():
    delta = raman_cp_delta(0.01, 0.02, 1.2)
    c = raman_constants(SystemParams(Delta=1.2, delta=delta), LaserAmplitudes(0.01, 0.02))
    assert c.Delta11 + c.DeltaA == pytest.approx(0.0, abs=1e-18)


def test_reduced_model_matrix():
    h = build_raman_reduced(SystemParams(Delta=2.0), LaserAmplitudes(0.2, 0.1)).matrix
    np.testing.assert_allclose(h, [[0.005, 0.0025], [0.0025, 0.00125]])


def test_driven_source_matches_static_build():
    space = HilbertSpace(1)
    params = SystemParams(kappa=0.1, gamma=0.1, Delta=0.5)
    pulse = StirapPair(omega=0.02, freq=1e-3)
    src = full_source(params, space, pulse=pulse)
    assert not src.is_static
    t = 0.5 * pulse.duration
    o1, os_ = pulse.evaluate(t)
    expected = build_conditional(params, LaserAmplitudes(o1, os_), space).matrix
    np.testing.assert_allclose(src.matrix(t), expected, atol=1e-15)


def test_constant_sources_are_static():
    params = SystemParams(Delta=1.0)
    assert full_source(params, HilbertSpace(), pulse=Constant(0.01, 0.01, 10.0)).is_static
    assert effective_source(params, lasers=LaserAmplitudes(0.01)).is_static
    assert raman_source(params, pulse=Constant(0.01, 0.01, 10.0)).is_static
    assert not raman_source(params, pulse=Constant(0.01, 0.0, 10.0, ripple=0.1)).is_static


def test_raman_source_tracks_the_pulse():
    params = SystemParams(Delta=1.0)
    pulse = Constant(0.1, 0.0, 100.0, ripple=0.5, ripple_periods=1)
    src = raman_source(params, pulse=pulse)
    o1, _ = pulse.evaluate(25.0)
    assert src.matrix(25.0)[0, 0] == pytest.approx(abs(o1) ** 2 / 4.0)
