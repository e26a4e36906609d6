import math

import pytest

from dfsgates.experiments import convergence_check, raman_prep, stirap_prep, trivial_evolution
from dfsgates.hamiltonian import SystemParams

LOSSY = SystemParams(kappa=0.1, gamma=0.1)


def test_raman_preparation():
    res = raman_prep(LOSSY.with_(Delta=1.357), omega1=0.01)
    assert res.time == pytest.approx(8.5265e4, rel=1e-3)
    assert res.fidelity == pytest.approx(0.993, abs=0.005)
    assert res.p0 == pytest.approx(0.857, abs=0.02)


def test_raman_preparation_converges():
    report = convergence_check(raman_prep, LOSSY.with_(Delta=1.357), omega1=0.01)
    assert report.worst < 1e-6


@pytest.mark.slow
def test_stirap_preparation():
    res = stirap_prep(LOSSY, omega=0.02, freq=4e-5)
    assert res.fidelity == pytest.approx(0.998, abs=0.004)
    assert res.time == pytest.approx(math.pi / 4e-5)
    assert res.p0 == pytest.approx(0.876, abs=0.02)


@pytest.mark.slow
def test_stirap_tail_costs_success_rate_not_fidelity():
    transfer = stirap_prep(LOSSY, omega=0.02, freq=4e-5)
    end = stirap_prep(LOSSY, omega=0.02, freq=4e-5, readout="end")
    assert end.time == pytest.approx(1.5 * transfer.time)
    assert end.p0 < transfer.p0 - 0.05
    assert end.fidelity == pytest.approx(transfer.fidelity, abs=0.01)


@pytest.mark.slow
def test_stirap_preparation_converges():
    report = convergence_check(stirap_prep, LOSSY, omega=0.02, freq=4e-5)
    assert report.worst < 1e-6


def test_stirap_readout_must_be_known():
    with pytest.raises(ValueError, match="readout"):
        stirap_prep(LOSSY, readout="middle")


def test_lossless_preparation_keeps_the_norm():
    res = raman_prep(SystemParams(Delta=1.357), omega1=0.01)
    assert res.p0 == pytest.approx(1.0, abs=1e-7)
    assert res.fidelity > 0.99


@pytest.mark.parametrize("Delta", [0.0, 0.5, 1.0, 2.0])
def test_trivial_evolution_keeps_the_state(Delta):
    res = trivial_evolution(LOSSY, omega1=0.01, Delta=Delta)
    assert res.fidelity >= 1 - 1e-4
    assert 0.99 < res.p0 < 1.0


def test_trivial_evolution_loss_depends_weakly_on_detuning():
    losses = [1 - trivial_evolution(LOSSY, omega1=0.01, Delta=d).p0 for d in (0.0, 0.5, 1.0, 2.0)]
    assert max(losses) / min(losses) < 1.2
    stronger = 1 - trivial_evolution(LOSSY, omega1=0.02, Delta=1.0).p0
    assert stronger > losses[2]
