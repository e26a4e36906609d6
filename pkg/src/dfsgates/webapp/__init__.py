"""Read-only JSON service over the closed-form results and written figure CSVs."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from flask import Flask, jsonify, request

from ..analytic import raman_gate_phase, ramp_phase, stirap_eigensystem
from ..errors import DfsGatesError
from ..figures import FIGURES
from ..hamiltonian import LaserAmplitudes, SystemParams, raman_constants
from ..pulses import LinearRampRatio, SineRampRatio


class BadParameter(ValueError):
    def __init__(self, name: str, message: str) -> None:
        self.name = name
        super().__init__(f"{name}: {message}")


def _arg(name: str, default: Optional[float] = None, cast: Callable[[str], Any] = float) -> Any:
    raw = request.args.get(name)
    if raw is None or raw == "":
        if default is None:
            raise BadParameter(name, "required")
        return default
    try:
        value = cast(raw)
    except ValueError:
        raise BadParameter(name, f"cannot parse {raw!r}") from None
    if isinstance(value, float) and not math.isfinite(value):
        raise BadParameter(name, "must be finite")
    return value


def _number(text: str) -> Optional[float]:
    value = float(text)
    return value if math.isfinite(value) else None


def _read_csv(path: Path) -> Dict[str, Any]:
    meta: Dict[str, str] = {}
    body: List[str] = []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    rows = [
        {k: _number(v) for k, v in row.items()}
        for row in csv.DictReader(io.StringIO("\n".join(body)))
    ]
    return {"metadata": meta, "rows": rows}


def create_app(results_dir: Union[str, Path] = "results") -> Flask:
    app = Flask(__name__)
    results = Path(results_dir)

    @app.after_request
    def add_cors_headers(resp):  # type: ignore[override]
        if request.path.startswith("/api/"):
            resp.headers.setdefault("Access-Control-Allow-Origin", "*")
            resp.headers.setdefault("Access-Control-Allow-Methods", "GET, OPTIONS")
        return resp

    @app.errorhandler(BadParameter)
    def bad_parameter(exc: BadParameter):
        return jsonify({"error": str(exc), "field": exc.name}), 400

    @app.errorhandler(DfsGatesError)
    def domain_error(exc: DfsGatesError):
        return jsonify({"error": str(exc)}), 400

    @app.errorhandler(ValueError)
    def bad_value(exc: ValueError):
        return jsonify({"error": str(exc)}), 400

    @app.get("/api/raman")
    def api_raman():
        omega1 = _arg("omega1", 0.01)
        omega_sigma = _arg("omega_sigma", omega1)
        params = SystemParams(Delta=_arg("Delta", 1.357), delta=_arg("delta", 0.0))
        c = raman_constants(params, LaserAmplitudes(omega1, omega_sigma))
        return jsonify({
            "Omega": [c.Omega.real, c.Omega.imag],
            "Delta11": c.Delta11,
            "DeltaA": c.DeltaA,
            "K": c.K,
            "T_prep": c.prep_time,
            "T_gate": c.gate_time,
            "phi_gate": raman_gate_phase(c),
        })

    @app.get("/api/stirap")
    def api_stirap():
        eig = stirap_eigensystem(_arg("omega1", 0.02), _arg("omega_sigma", 0.02), _arg("Delta", 0.0))
        e0, ep, em = eig.energies
        return jsonify({"E0": e0, "E_plus": ep, "E_minus": em})

    @app.get("/api/ramp-phase")
    def api_ramp_phase():
        shape = request.args.get("shape", "linear")
        if shape == "linear":
            ramp = LinearRampRatio(alpha=_arg("alpha", 2e-5), total_time=_arg("total_time", 1e5))
        elif shape == "sine":
            ramp = SineRampRatio(x_max=_arg("x_max", 1.0), beta=_arg("beta", 3e-5))
        else:
            raise BadParameter("shape", f"expected 'linear' or 'sine', got {shape!r}")
        res = ramp_phase(ramp, _arg("delta", 1e-4))
        return jsonify({"shape": shape, "phi_g": res.phi_g, "ratio": res.ratio, "wrapped": res.wrapped})

    @app.get("/api/figures")
    def api_figures():
        available = [fid for fid in FIGURES if (results / f"{fid}.csv").is_file()]
        return jsonify({"figures": available, "known": list(FIGURES)})

    @app.get("/api/figures/<fig_id>")
    def api_figure(fig_id: str):
        path = results / f"{fig_id}.csv"
        if fig_id not in FIGURES or not path.is_file():
            return jsonify({"error": f"figure {fig_id!r} not found"}), 404
        data = _read_csv(path)
        data["figure"] = fig_id
        return jsonify(data)

    return app
