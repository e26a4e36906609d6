import math

from dfsgates.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from dfsgates.hamiltonian import LaserAmplitudes, SystemParams, raman_constants


def _config(tmp_path, text: str):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_figure_command(tmp_path, capsys):
    code = main(["figure", "fig8a", "--resolution", "3", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "fig8a.csv").is_file()
    assert (tmp_path / "fig8a.plot.json").is_file()
    assert "written" in capsys.readouterr().out


def test_unknown_figure_is_a_config_error(tmp_path, capsys):
    assert main(["figure", "fig42", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "fig42" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert main(["gate", "--frobnicate"]) == EXIT_CONFIG
    assert "frobnicate" in capsys.readouterr().err


def test_misspelled_key_names_the_field(tmp_path, capsys):
    cfg = _config(tmp_path, "kind = ERamanCP\nDelta = 1.357\nomega_1 = 0.01\n")
    assert main(["gate", "--config", cfg]) == EXIT_CONFIG
    assert "omega_1" in capsys.readouterr().err


def test_sweep_axis_must_exist(tmp_path, capsys):
    cfg = _config(tmp_path, "\n".join([
        "experiment = ramp_phase_linear",
        "axis1 = alfa", "axis1_min = 1e-5", "axis1_max = 2e-5", "axis1_count = 2",
        "axis2 = total_time", "axis2_min = 5e4", "axis2_max = 1e5", "axis2_count = 2",
    ]))
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "alfa" in capsys.readouterr().err


def test_sweep_command(tmp_path):
    cfg = _config(tmp_path, "\n".join([
        "experiment = ramp_phase_sine",
        "axis1 = x_max", "axis1_min = 0.5", "axis1_max = 1.0", "axis1_count = 2",
        "axis2 = beta", "axis2_min = 3e-5", "axis2_max = 6e-5", "axis2_count = 2",
    ]))
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "ramp_phase_sine.csv").is_file()


def test_gate_command(tmp_path, capsys):
    cfg = _config(tmp_path, "kind = ERamanCP\nmodel = effective\nDelta = 1.357\n")
    assert main(["gate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "extracted_phi = " in out
    assert (tmp_path / "gate.csv").is_file()


def test_raman_at_zero_detuning(tmp_path, capsys):
    cfg = _config(tmp_path, "protocol = raman\nDelta = 0\n")
    assert main(["prep", "--config", cfg]) == EXIT_CONFIG
    assert "Delta" in capsys.readouterr().err


def test_vanishing_branch_is_a_numerical_failure(tmp_path, capsys):
    # full transfer |11> -> |A> leaves no |11> amplitude to read a phase from
    T = raman_constants(SystemParams(Delta=1.357), LaserAmplitudes(0.01, 0.01)).prep_time
    cfg = _config(tmp_path, f"kind = ERamanCP\nmodel = effective\nDelta = 1.357\ndelta = 0.0\ntotal_time = {T!r}\n")
    assert main(["gate", "--config", cfg]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_evolve_command(tmp_path):
    cfg = _config(tmp_path, "\n".join([
        "shape = Constant", "omega1 = 0.05", "omega_sigma = 0.05", "total_time = 20",
        "Delta = 1.0", "record_stride = 100", "labels = 1,1,0; s,1,0", "initial = 11",
    ]))
    assert main(["evolve", "--config", cfg, "--out", str(tmp_path), "--nmax", "1"]) == EXIT_OK
    assert (tmp_path / "state.csv").is_file()
    traj = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(traj) == 1 + 11
    assert math.isclose(float(traj[-1].split(",")[0]), 20.0)
