from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from .analytic import regime_report
from .config import EvolveConfig, FigureConfig, GateConfig, PrepConfig, config_error, load_config, validate
from .errors import ConfigError, DfsGatesError, NumericalError
from .experiments import raman_prep, stirap_prep
from .figures import FIGURES, reproduce_figure
from .gates import run_gate
from .hamiltonian import LaserAmplitudes, full_source
from .hilbert import HilbertSpace, NamedState, QuantumState, make_named_state, parse_label, write_state_csv
from .propagate import decay_window, propagate
from .sweep import SweepSpec, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    """Unknown flags are configuration errors (exit 1), not usage errors."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Flat 'name = value' config file")
    common.add_argument("--out", type=Path, default=None, help="Output directory for CSV files")
    common.add_argument("--threads", type=int, default=1, help="Worker processes for sweeps and figures")
    common.add_argument("--nmax", type=int, default=None, help="Photon truncation (overrides n_max)")
    common.add_argument("--step", type=float, default=None, help="RK4 step in 1/g (overrides step)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    p = _Parser(
        prog="dfsgates",
        description="Simulate decoherence-free state preparation and two-qubit phase gates of two atoms in a cavity.",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    sub.add_parser("evolve", parents=[common], help="Single trajectory from a config file")
    sub.add_parser("prep", parents=[common], help="E-Raman or E-STIRAP preparation of |A>; prints F and P0")
    sub.add_parser("gate", parents=[common], help="Run a controlled-phase protocol and print its report")
    sub.add_parser("sweep", parents=[common], help="Two-axis parameter sweep to CSV")
    f = sub.add_parser("figure", parents=[common], help="Reproduce a figure grid")
    f.add_argument("fig_id", help=f"One of: {', '.join(FIGURES)}")
    f.add_argument("--resolution", type=int, default=None, help="Points per axis")
    return p


def _values(args: argparse.Namespace) -> Dict[str, Any]:
    values = load_config(args.config) if args.config else {}
    if args.nmax is not None:
        values["n_max"] = args.nmax
    if args.step is not None:
        values["step"] = args.step
    return values


def _out_dir(args: argparse.Namespace) -> Optional[Path]:
    if args.out is None:
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _initial_state(text: str, space: HilbertSpace) -> QuantumState:
    if len(text) == 2 and set(text) <= {"0", "1"}:
        return QuantumState.qubits(text, space)
    if text in {s.value for s in NamedState}:
        return make_named_state(NamedState(text), space=space)
    try:
        l1, l2, n = parse_label(text)
    except ValueError as exc:
        raise ConfigError(str(exc), field="initial") from exc
    return QuantumState.basis(space, l1, l2, n)


def cmd_evolve(args: argparse.Namespace) -> int:
    cfg = validate(EvolveConfig, _values(args))
    schedule = cfg.schedule()
    if schedule is None:
        raise ConfigError("evolve needs a pulse schedule", field="shape")
    params = cfg.system_params()
    space = HilbertSpace(cfg.n_max)
    labels: List[str] = [lab.strip() for lab in cfg.labels.split(";") if lab.strip()]
    integrator = cfg.integrator()
    regime_report(params, schedule=schedule)

    psi0 = _initial_state(cfg.initial, space)
    res = propagate(full_source(params, space, pulse=schedule), psi0, schedule.duration, integrator)
    final = res
    if cfg.window:
        final = decay_window(res.final_state, params, cfg=integrator.model_copy(update={"record_stride": 0}))
    print(f"T      : {res.time:.6g}")
    print(f"steps  : {res.steps}")
    print(f"P0     : {final.norm2:.6f}")

    out = _out_dir(args)
    if out is not None:
        write_state_csv(final.final_state, out / "state.csv")
        if res.trajectory is not None:
            res.trajectory.write_csv(out / "trajectory.csv", labels)
        print(f"written: {out}")
    return EXIT_OK


def cmd_prep(args: argparse.Namespace) -> int:
    cfg = validate(PrepConfig, _values(args))
    params = cfg.system_params()
    integrator = cfg.integrator()
    if cfg.protocol == "raman":
        omega_sigma = cfg.omega_sigma if cfg.omega_sigma is not None else cfg.omega1
        regime_report(params, LaserAmplitudes(cfg.omega1, omega_sigma))
        res = raman_prep(params, cfg.omega1, omega_sigma, n_max=cfg.n_max, cfg=integrator, window=cfg.window)
    else:
        res = stirap_prep(
            params, cfg.omega, cfg.freq, n_max=cfg.n_max, cfg=integrator, window=cfg.window, readout=cfg.readout
        )
    print(f"protocol : {cfg.protocol}")
    print(f"T        : {res.time:.6g}")
    print(f"F        : {res.fidelity:.6f}")
    print(f"P0       : {res.p0:.6f}")
    return EXIT_OK


def cmd_gate(args: argparse.Namespace) -> int:
    cfg = validate(GateConfig, _values(args))
    report = run_gate(cfg.protocol(), model=cfg.model, cfg=cfg.integrator(), space=HilbertSpace(cfg.n_max),
                      window=cfg.window)
    sys.stdout.write(report.to_text())
    out = _out_dir(args)
    if out is not None:
        path = report.write_csv(out / "gate.csv")
        print(f"written: {path}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = SweepSpec.from_flat(_values(args))
    except ValidationError as exc:
        raise config_error(exc) from exc
    result = run_sweep(spec, threads=args.threads)
    out = _out_dir(args) or Path(".")
    path = result.write_csv(out / f"{spec.experiment}.csv")
    print(f"written: {path}")
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    cfg = validate(FigureConfig, _values(args))
    files = reproduce_figure(
        args.fig_id,
        out_dir=args.out or Path("."),
        resolution=args.resolution or cfg.resolution,
        threads=args.threads,
        n_max=cfg.n_max,
        step=cfg.step,
    )
    print(f"written: {files.csv}")
    print(f"written: {files.plot}")
    return EXIT_OK


COMMANDS = {
    "evolve": cmd_evolve,
    "prep": cmd_prep,
    "gate": cmd_gate,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
}


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    p = build_parser()
    try:
        args = p.parse_args(argv)
        _setup_logging(args.verbose)
        return COMMANDS[args.cmd](args)
    except ValidationError as exc:
        print(f"config error: {config_error(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DfsGatesError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
