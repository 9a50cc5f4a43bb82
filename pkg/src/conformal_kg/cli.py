"""Command-line front end.

Usage:
    conformal-kg transform --to conformal --point 1,0,0,0,0,0
    conformal-kg verify-links --points 1000 --seed 0
    conformal-kg residual --ell 0 --n 1.7320508 --lambda-sep 2 --h 1e-3
    conformal-kg radial --p 1 --c1 1 --c2 0.5 --rho 0.5,1,2
    conformal-kg spectrum --mu 2 --ell 5 --out s.json

Every command prints a JSON report on stdout.  Exit codes: 0 all checks
passed, 1 a threshold check failed, 2 usage error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .coords import (
    ConformalPoint,
    ProjectivePoint,
    chart_condition_residual,
    quadric_residual,
    random_quadric_points,
    to_conformal,
    to_projective,
)
from .derivlink import (
    ConformalJet,
    conformal_jet,
    euler_residual,
    fd_projective_gradient,
    link_coefficients,
    project_gradient,
    standard_fields,
)
from .errors import ConformalKGError
from .grid import SCHEMA_VERSION, Axis, fd_residual_norm
from .kgoperator import SeparatedModeSpec, apply_separated_f, bessel_product_grid
from .params import ModelParams
from .ptsolver import PTPotentialParams, SolverConfig, solve_spectrum
from .separation import (
    RadialSolutionParams,
    force_from_potential,
    gravitational_force,
    radial_ode_residual,
    radial_solution,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("transform", "verify-links", "residual", "radial", "spectrum")


@dataclass
class RunConfig:
    command: str
    params: ModelParams
    options: dict[str, Any]
    output_path: Path | None = None
    format: str = "json"


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    results: dict[str, Any] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    checks: list[dict[str, Any]] = field(default_factory=list)
    error: str | None = None
    wall_time_s: float = 0.0
    payload: Any = field(default=None, repr=False)  # data product written by --out

    def check(self, name: str, value: float, threshold: float) -> None:
        self.checks.append({"name": name, "value": value, "threshold": threshold, "pass": bool(value < threshold)})

    @property
    def passed(self) -> bool:
        return self.error is None and all(c["pass"] for c in self.checks)

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return EXIT_NUMERIC
        return EXIT_PASS if self.passed else EXIT_FAIL

    def to_dict(self, include_time: bool = True) -> dict[str, Any]:
        out = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "residuals": self.residuals,
            "checks": self.checks,
            "pass": self.passed,
            "error": self.error,
        }
        if include_time:
            out["wall_time_s"] = self.wall_time_s
        return out

    def to_json(self, include_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_time), indent=2, sort_keys=True)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"need finite numbers: {text!r}")
    return vals


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _positive(text: str) -> float:
    v = _finite(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conformal-kg", description="Conformal Klein-Gordon numerics toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=_finite, default=0.0, help="homogeneity degree N")
    common.add_argument("--msq", type=_finite, default=0.0, help="mass parameter m^2")
    common.add_argument("--r", type=_positive, default=1.0, help="hypersphere radius")
    common.add_argument("--r0", type=_positive, default=1.0, help="second universal constant")
    common.add_argument("--out", type=Path, default=None, help="output file")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="map a point between charts")
    p.add_argument("--to", choices=("conformal", "projective"), required=True)
    p.add_argument("--point", type=_float_list, required=True,
                   help="6 projective or 5 conformal comma-separated components")
    p.add_argument("--threshold", type=_positive, default=1e-10)

    p = sub.add_parser("verify-links", parents=[common], help="check derivative links on random points")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=_positive, default=1e-4, help="FD step for projective gradients")
    p.add_argument("--euler-h", type=_positive, default=1e-5, help="FD step for the Euler residual")
    p.add_argument("--threshold", type=_positive, default=1e-6)

    p = sub.add_parser("residual", parents=[common], help="FD residual of a Bessel-product mode")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--n", type=_positive, required=True, help="temporal frequency")
    p.add_argument("--lambda-sep", type=_positive, required=True, help="radial wavenumber lambda")
    p.add_argument("--h", type=_positive, default=1e-3)
    p.add_argument("--r-range", type=_float_list, default=[1.0, 3.0])
    p.add_argument("--x5-range", type=_float_list, default=[1.0, 3.0])
    p.add_argument("--convergence", action="store_true", help="also run at h/2 and report the ratio")
    p.add_argument("--threshold", type=_positive, default=1e-5)

    p = sub.add_parser("radial", parents=[common], help="rho solution, ODE residual and force")
    p.add_argument("--p", type=_finite, required=True)
    p.add_argument("--c1", type=_finite, default=1.0)
    p.add_argument("--c2", type=_finite, default=0.0)
    p.add_argument("--rho", type=_float_list, default=[0.5, 1.0, 1.5, 2.0])
    p.add_argument("--x5-sq", type=_finite, default=0.0, help="x5^2 used for force evaluation")
    p.add_argument("--h", type=_positive, default=1e-3)
    p.add_argument("--threshold", type=_positive, default=1e-7, help="max ODE residual")
    p.add_argument("--force-threshold", type=_positive, default=1e-8, help="max force vs potential-gradient gap")

    p = sub.add_parser("spectrum", parents=[common], help="Poschl-Teller bound states")
    p.add_argument("--mu", type=_finite, default=None, help="core parameter (default: from N, msq)")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--xi-max", type=_positive, default=20.0)
    p.add_argument("--grid-n", type=int, default=20000)
    p.add_argument("--method", choices=("shooting", "matrix"), default="shooting")
    p.add_argument("--tol", type=_positive, default=1e-7)
    p.add_argument("--threshold", type=_positive, default=1e-6, help="max method disagreement")
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and validate a command line; argparse exits with code 2 on usage errors."""
    parser = _build_parser()
    ns = parser.parse_args(list(argv))
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "N", "msq", "r", "r0", "out", "format")}
    if ns.command == "residual" and (len(ns.r_range) != 2 or len(ns.x5_range) != 2):
        parser.error("--r-range and --x5-range take two values")
    if ns.command == "verify-links" and ns.points < 1:
        parser.error("--points must be >= 1")
    if ns.command in ("residual", "spectrum") and ns.ell < 0:
        parser.error("--ell must be >= 0")
    if ns.msq < 0:
        parser.error("--msq must be >= 0")
    params = ModelParams(N=ns.N, msq=ns.msq, r=ns.r, r0=ns.r0)
    return RunConfig(ns.command, params, opts, ns.out, ns.format)


def _run_transform(cfg: RunConfig, rep: Report) -> None:
    pt = cfg.options["point"]
    params = cfg.params
    if cfg.options["to"] == "conformal":
        p = ProjectivePoint.from_array(pt)
        q = to_conformal(p, params)
        back = to_projective(q, params).to_array()
        rep.results["point"] = q.to_array().tolist()
        rep.residuals["chart_condition"] = abs(chart_condition_residual(p, q, params))
        if abs(quadric_residual(p, params)) < 1e-9:
            rep.residuals["round_trip"] = float(np.max(np.abs(back - p.to_array())) / max(1.0, np.max(np.abs(p.to_array()))))
    else:
        q = ConformalPoint.from_array(pt)
        p = to_projective(q, params)
        back = to_conformal(p, params).to_array()
        rep.results["point"] = p.to_array().tolist()
        rep.residuals["quadric"] = abs(quadric_residual(p, params))
        rep.residuals["chart_condition"] = abs(chart_condition_residual(p, q, params))
        rep.residuals["round_trip"] = float(np.max(np.abs(back - q.to_array())) / max(1.0, np.max(np.abs(q.to_array()))))
    for name, value in rep.residuals.items():
        rep.check(name, value, cfg.options["threshold"])


def _run_verify_links(cfg: RunConfig, rep: Report) -> None:
    o = cfg.options
    rng = np.random.default_rng(o["seed"])
    fields = standard_fields()
    link_err = euler_err = coeff_err = 0.0
    for _ in range(o["points"]):
        q = ConformalPoint(tuple(rng.uniform(-0.5, 0.5, 4)), float(rng.uniform(0.7, 1.3)))
        p = to_projective(q)
        c = link_coefficients(q)
        coeff_err = max(
            coeff_err,
            abs(c.a_plus + c.a_minus - 1.0), abs(c.b_plus + c.b_minus - 1.0),
            abs(c.a_minus - c.b_minus - q.x_sq), abs(c.a_plus + c.b_plus - 1.0 - q.x5 ** 2),
        )
        for fld in fields:
            params = ModelParams(N=fld.degree)
            predicted = project_gradient(conformal_jet(fld, q), q, params).to_array()
            fd = fd_projective_gradient(fld, p, o["h"])
            link_err = max(link_err, float(np.max(np.abs(predicted - fd))))
            euler_err = max(euler_err, abs(euler_residual(fld, p, fld.degree, o["euler_h"])))
    rep.residuals.update(link_formula=link_err, euler=euler_err, coefficient_identities=coeff_err)
    rep.results["fields"] = [f.degree for f in fields]
    for name, value in rep.residuals.items():
        rep.check(name, value, o["threshold"])


def _run_residual(cfg: RunConfig, rep: Report):
    o = cfg.options
    spec = SeparatedModeSpec(n=o["n"], ell=o["ell"], m=0, lam=o["lambda_sep"])
    rep.results["nu"] = cfg.params.bessel_order
    rep.results["sigma"] = spec.sigma

    def run(h):
        grid = bessel_product_grid(Axis.span("r", *o["r_range"], h), Axis.span("x5", *o["x5_range"], h), spec, cfg.params)
        return apply_separated_f(grid, spec.n, spec.ell, cfg.params)

    res = run(o["h"])
    max_abs, rms = fd_residual_norm(res)
    rep.residuals.update(max_abs=max_abs, rms=rms)
    rep.check("max_abs", max_abs, o["threshold"])
    if o["convergence"]:
        half, _ = fd_residual_norm(run(o["h"] / 2))
        rep.residuals["max_abs_half_step"] = half
        rep.results["convergence_ratio"] = max_abs / half
        rep.check("convergence_ratio_deviation", abs(max_abs / half - 4.0), 1.0)
    return res


def _run_radial(cfg: RunConfig, rep: Report) -> None:
    o = cfg.options
    rp = RadialSolutionParams(o["p"], o["c1"], o["c2"])
    values, residuals = [], []
    for rho in o["rho"]:
        values.append(radial_solution(rho, rp))
        residuals.append(radial_ode_residual(lambda t: radial_solution(t, rp), rho, rp.p, o["h"]))
    rep.results["rho"] = o["rho"]
    rep.results["U"] = values
    rep.results["ode_residual"] = residuals
    rep.residuals["ode"] = max(abs(r) for r in residuals)
    rep.check("ode", rep.residuals["ode"], o["threshold"])
    if o["p"] == 1.0:
        forces, gaps = [], []
        for rho in o["rho"]:
            x_sq = rho * rho + o["x5_sq"]
            f = gravitational_force(x_sq, o["x5_sq"], o["c1"], o["c2"])
            forces.append(f)
            gaps.append(abs(f - force_from_potential(x_sq, o["x5_sq"], o["c1"], o["c2"], o["h"])))
        rep.results["force"] = forces
        rep.residuals["force_vs_potential"] = max(gaps)
        rep.check("force_vs_potential", max(gaps), o["force_threshold"])


def _run_spectrum(cfg: RunConfig, rep: Report):
    o = cfg.options
    mu = o["mu"] if o["mu"] is not None else cfg.params.mu
    pt = PTPotentialParams(mu, o["ell"])
    sc = SolverConfig(xi_max=o["xi_max"], grid_n=o["grid_n"], method=o["method"], tol=o["tol"])
    spec = solve_spectrum(pt, sc)
    rep.results.update(spec.to_dict())
    rep.residuals["method_agreement"] = spec.error_estimate or 0.0
    rep.check("method_agreement", rep.residuals["method_agreement"], o["threshold"])
    return spec


def execute(cfg: RunConfig) -> Report:
    """Run one command and build its report; numerical errors become exit code 3."""
    inputs = {"params": cfg.params.to_dict(), **{k: _jsonable(v) for k, v in cfg.options.items()}}
    rep = Report(cfg.command, inputs)
    start = time.perf_counter()
    payload = None
    try:
        if cfg.command == "transform":
            _run_transform(cfg, rep)
        elif cfg.command == "verify-links":
            _run_verify_links(cfg, rep)
        elif cfg.command == "residual":
            payload = _run_residual(cfg, rep)
        elif cfg.command == "radial":
            _run_radial(cfg, rep)
        elif cfg.command == "spectrum":
            payload = _run_spectrum(cfg, rep)
        else:
            raise ValueError(f"unknown command {cfg.command!r}")
    except (ConformalKGError, ValueError, ArithmeticError) as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    rep.wall_time_s = time.perf_counter() - start
    rep.payload = payload
    return rep


def _jsonable(v):
    return str(v) if isinstance(v, Path) else v


def write_output(cfg: RunConfig, rep: Report) -> None:
    """Write the command's data product to ``cfg.output_path`` in ``cfg.format``."""
    path = cfg.output_path
    if path is None:
        return
    payload = rep.payload
    if cfg.format == "json":
        if cfg.command == "spectrum" and payload is not None:
            text = json.dumps(payload.to_dict(), indent=2, sort_keys=True)
        else:
            text = rep.to_json()
        path.write_text(text + "\n", encoding="utf-8")
        return
    if cfg.command == "residual" and payload is not None:
        payload.write_csv(path)
        return
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if cfg.command == "spectrum" and payload is not None:
            w.writerow(["k", "energy", "p"])
            for k, (e, p) in enumerate(zip(payload.energies, payload.p_values)):
                w.writerow([k, repr(e), repr(p)])
        elif cfg.command == "radial" and "U" in rep.results:
            cols = [c for c in ("rho", "U", "ode_residual", "force") if c in rep.results]
            w.writerow(cols)
            for row in zip(*(rep.results[c] for c in cols)):
                w.writerow([repr(float(v)) for v in row])
        else:
            w.writerow(["name", "value", "threshold", "pass"])
            for c in rep.checks:
                w.writerow([c["name"], repr(c["value"]), repr(c["threshold"]), c["pass"]])


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    rep = execute(cfg)
    if rep.error is None:
        write_output(cfg, rep)
    else:
        print(rep.error, file=sys.stderr)
    print(rep.to_json())
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
