import logging
import math

import numpy as np
import pytest
from scipy.linalg import expm

from dfsgates.analytic import (
    RamanConstants,
    StirapPath,
    StirapPhases,
    bloch_vector,
    linear_ramp_integral,
    phases,
    r_matrix,
    raman_gate_phase,
    raman_propagator,
    ramp_phase,
    regime_report,
    sine_ramp_integral,
    stirap_eigensystem,
    stirap_propagator,
    wrap_phase,
)
from dfsgates.errors import DegenerateInputError, OpenPathError, PreconditionError
from dfsgates.hamiltonian import (
    LaserAmplitudes,
    SystemParams,
    build_effective,
    effective_source,
    raman_constants,
    raman_reduced_matrix,
    raman_source,
)
from dfsgates.propagate import IntegratorConfig, propagate_effective
from dfsgates.pulses import Constant, LinearRampRatio, SineRampRatio, StirapPair


def _random_constants(rng) -> RamanConstants:
    omega = complex(rng.normal(), rng.normal())
    return RamanConstants(Omega=omega, Delta11=float(rng.normal()), DeltaA=float(rng.normal()))


def test_raman_propagator_matches_expm():
    rng = np.random.default_rng(7)
    for _ in range(100):
        c = _random_constants(rng)
        T = float(rng.uniform(0.0, 20.0))
        expected = expm(-1j * raman_reduced_matrix(c) * T)
        assert np.max(np.abs(raman_propagator(c, T) - expected)) < 1e-9


def test_raman_propagator_group_property():
    c = RamanConstants(Omega=0.3 - 0.1j, Delta11=0.2, DeltaA=-0.05)
    np.testing.assert_allclose(raman_propagator(c, 1.3) @ raman_propagator(c, 2.1), raman_propagator(c, 3.4), atol=1e-12)
    np.testing.assert_allclose(raman_propagator(c, 0.0), np.eye(2), atol=1e-15)


def test_raman_propagator_without_coupling():
    c = RamanConstants(Omega=0.0, Delta11=0.25, DeltaA=0.25)
    assert c.K == 0
    np.testing.assert_allclose(raman_propagator(c, 4.0), np.exp(1j) * np.eye(2), atol=1e-15)


def test_raman_transfer_and_gate_times():
    c = raman_constants(SystemParams(Delta=1.357), LaserAmplitudes(0.01, 0.01))
    half = raman_propagator(c, c.prep_time)
    assert abs(half[1, 0]) == pytest.approx(1.0)
    assert abs(half[0, 0]) < 1e-12

    full = raman_propagator(c, c.gate_time)
    assert abs(full[1, 0]) < 1e-12
    assert abs(wrap_phase(np.angle(full[0, 0]) - raman_gate_phase(c))) < 1e-9


def test_raman_propagator_matches_integrator():
    rng = np.random.default_rng(3)
    for _ in range(5):
        o1, os_ = rng.uniform(0.005, 0.03, size=2)
        params = SystemParams(Delta=float(rng.uniform(0.5, 2.0)), delta=float(rng.uniform(-1e-4, 1e-4)))
        c = raman_constants(params, LaserAmplitudes(o1, os_))
        T = c.gate_time * rng.uniform(0.1, 1.0)
        res = propagate_effective(raman_source(params, lasers=LaserAmplitudes(o1, os_)), [1.0, 0.0], T)
        assert np.max(np.abs(res.amplitudes - raman_propagator(c, T)[:, 0])) < 1e-8


def test_stirap_eigensystem_values():
    eig = stirap_eigensystem(0.01, 0.01, Delta=1.357)
    e0, ep, em = eig.energies
    assert e0 == 0
    assert ep == pytest.approx(3.684e-5, rel=1e-3)
    assert em == pytest.approx(-1.35704, rel=1e-5)


@pytest.mark.parametrize("o1, os_, Delta", [(0.3, 0.4, 0.0), (0.02 + 0.01j, 0.01j, 1.357), (1.0, 0.2, -0.5)])
def test_stirap_eigensystem_diagonalizes_effective_model(o1, os_, Delta):
    h = build_effective(SystemParams(Delta=Delta), LaserAmplitudes(o1, os_)).matrix
    eig = stirap_eigensystem(o1, os_, Delta=Delta)
    for energy, vec in zip(eig.energies, eig.vectors.T):
        assert np.linalg.norm(vec) == pytest.approx(1.0)
        assert np.linalg.norm(h @ vec - energy * vec) < 1e-12
    np.testing.assert_allclose(sorted(eig.energies), np.linalg.eigvalsh(h), atol=1e-12)


def test_dark_state_limits():
    np.testing.assert_allclose(stirap_eigensystem(0.0, 0.1).vectors[:, 0], [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(stirap_eigensystem(0.1, 0.0).vectors[:, 0], [0, -1, 0], atol=1e-15)
    with pytest.raises(DegenerateInputError):
        stirap_eigensystem(0.0, 0.0)


def test_r_matrix_is_unitary():
    rng = np.random.default_rng(11)
    for theta, phi in rng.uniform(-np.pi, np.pi, size=(100, 2)):
        r = r_matrix(theta, phi)
        np.testing.assert_allclose(r.conj().T @ r, np.eye(3), atol=1e-12)


def test_r_matrix_at_quarter_turn():
    r = r_matrix(math.pi / 2, 0.0)
    np.testing.assert_allclose(r[:, 0], [0.0, -1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)


def test_trivial_path_gives_identity():
    path = StirapPath(LinearRampRatio(alpha=1e-3, total_time=100.0), delta=0.0)
    zero = StirapPhases((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    np.testing.assert_allclose(stirap_propagator(path, zero), np.eye(3), atol=1e-12)


def test_propagator_needs_dark_start():
    path = StirapPath(Constant(0.01, 0.01, 100.0))
    with pytest.raises(PreconditionError):
        stirap_propagator(path)


def test_phases_on_the_equator():
    T = 100.0
    path = StirapPath(Constant(1.0, 0.0, T), delta=-2 * math.pi / T)
    ph = phases(path)
    assert ph.phi_g[0] == pytest.approx(2 * math.pi, abs=1e-6)
    assert ph.phi_g[1] == pytest.approx(0.0, abs=1e-6)
    assert ph.phi_d == pytest.approx((0.0, -50.0, 50.0), abs=1e-6)


def test_phases_at_the_pole():
    T = 100.0
    path = StirapPath(Constant(0.0, 1.0, T), delta=0.01)
    ph = phases(path)
    assert ph.phi_g[0] == pytest.approx(0.0, abs=1e-12)
    assert ph.phi_g[1] == pytest.approx(-0.5, abs=1e-6)
    assert ph.phi_g[2] == pytest.approx(ph.phi_g[1])


def test_dynamical_phase_of_equal_amplitudes():
    ph = phases(StirapPath(Constant(0.2, 0.2, 50.0)))
    assert ph.phi_d[1] == pytest.approx(-0.2 * 50.0 / math.sqrt(2), rel=1e-9)
    assert ph.phi_d[2] == pytest.approx(-ph.phi_d[1])


def test_open_path_is_rejected_on_request():
    path = StirapPath(Constant(0.01, 0.01, 100.0), delta=0.01)
    assert not path.closed
    with pytest.raises(OpenPathError):
        phases(path, require_closed=True)
    phases(path)


def test_adiabatic_propagator_matches_effective_model():
    pair = StirapPair(omega=1.0, freq=1e-4)
    params = SystemParams()
    u = stirap_propagator(StirapPath(pair))
    res = propagate_effective(effective_source(params, pulse=pair), [1.0, 0.0, 0.0], pair.duration, IntegratorConfig(step=0.2))
    np.testing.assert_allclose(np.abs(res.amplitudes) ** 2, np.abs(u[:, 0]) ** 2, atol=1e-3)
    assert abs(res.amplitudes[1]) ** 2 > 0.999


def test_linear_ramp_phase_matches_closed_form():
    ramp = LinearRampRatio(alpha=2e-5, total_time=1e5)
    res = ramp_phase(ramp, 1e-4)
    assert linear_ramp_integral(2e-5, 1e5) == pytest.approx(1e5 * (1 - math.pi / 4))
    assert abs(res.ratio + linear_ramp_integral(2e-5, 1e5)) < 1e-6
    assert res.phi_g == pytest.approx(1e-4 * res.ratio)


def test_sine_ramp_phase_matches_closed_form():
    res = ramp_phase(SineRampRatio(x_max=1.0, beta=3e-5), 1e-4)
    assert abs(res.ratio + sine_ramp_integral(1.0, 3e-5)) < 1e-6


def test_ramp_ratio_does_not_depend_on_delta():
    ramp = LinearRampRatio(alpha=4e-5, total_time=5e4)
    assert ramp_phase(ramp, 1e-4).ratio == ramp_phase(ramp, 3e-4).ratio


@pytest.mark.parametrize("half_sweep", [20.0, 40.0, 100.0])
def test_linear_ramp_phase_plateau(half_sweep):
    T = 1e5
    alpha = 2 * half_sweep / T
    one = linear_ramp_integral(alpha, T)
    two = linear_ramp_integral(2 * alpha, T)
    assert abs(two - one) / one < 0.05


def test_wrap_phase():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_phase(0.5 + 4 * math.pi) == pytest.approx(0.5)


def test_bloch_vector():
    np.testing.assert_allclose(bloch_vector(1, 0), [0, 0, 1])
    np.testing.assert_allclose(bloch_vector(0, 1j), [0, 0, -1])
    np.testing.assert_allclose(bloch_vector(1 / math.sqrt(2), 1 / math.sqrt(2)), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(bloch_vector(0.3, 0.3j), [0, 1, 0], atol=1e-15)
    with pytest.raises(DegenerateInputError):
        bloch_vector(0, 0)


def test_regime_warnings(caplog):
    with caplog.at_level(logging.WARNING, logger="dfsgates.analytic"):
        report = regime_report(SystemParams(Delta=1.0), LaserAmplitudes(0.5, 0.5))
    assert set(report.violations()) == {"weak_driving", "raman"}
    assert "weak_driving" in caplog.text

    quiet = regime_report(SystemParams(Delta=1.357), LaserAmplitudes(0.01, 0.01))
    assert quiet.violations() == {}
    assert quiet.adiabatic is None
    assert regime_report(SystemParams(), schedule=StirapPair()).raman is None
