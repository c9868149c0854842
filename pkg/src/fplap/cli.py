"""Command-line front end.

One verification run per invocation: the command selects the operation, a
flat key=value config file can seed the parameters, and command-line flags
win over the file. Every run writes ``report.json`` (fully-resolved config,
results, assertions) plus CSV series under ``series/`` in the output
directory, and exits 0 only if every assertion passed.

Exit codes: 0 pass, 1 assertion failure, 2 configuration error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .barrier import (
    BarrierSpec,
    barrier_lower_bound_check,
    g_supersolution_check,
    scaled_limit_scan,
)
from .constants import c_nu, c_nu_n, left_tail_term, verify_halfspace_eigen
from .dirichlet import Domain1D, fit_boundary_exponent, make_graded_grid, solve
from .errors import ConfigError, QuadratureError
from .fields import FracParams
from .hopf import (
    HalfSpaceSetup,
    RegionSet,
    delta_scaling_scan,
    flattened_test_field,
    monotone_test_field,
    split_I_II,
)
from .report import Assertion, write_report, write_series

COMMANDS = (
    "constants",
    "eigen-verify",
    "barrier-check",
    "scaled-limit",
    "supersolution",
    "solve",
    "exponent-fit",
    "hopf-split",
    "hopf-scan",
)

_CONFIG_KEYS = {
    "command", "s", "p", "n", "nu", "eta", "R", "delta", "deltas", "tol",
    "out", "seed", "probes", "f_const", "layers", "window", "field",
    "eps_shell", "samples",
}

_DEFAULTS = {
    "s": 0.5, "p": 3.0, "n": 1, "nu": 0.25, "eta": 0.1, "R": 50.0,
    "delta": 2.0**-4, "deltas": "2^-4..2^-9", "tol": None, "out": None,
    "seed": 0, "probes": "0.5,1,2", "f_const": 1.0, "layers": 12,
    "window": None, "field": "flattened", "eps_shell": 0.5, "samples": 20,
}

_FLOAT_KEYS = {"s", "p", "nu", "eta", "R", "delta", "tol", "f_const", "eps_shell"}
_INT_KEYS = {"n", "seed", "layers", "samples"}


def parse_delta_range(text: str):
    """Parse ``a^b..a^c`` geometric ranges or comma-separated floats."""
    text = text.strip()
    if ".." in text and "^" in text:
        lo_s, hi_s = text.split("..", 1)
        base_s, e0_s = lo_s.split("^", 1)
        base2_s, e1_s = hi_s.split("^", 1)
        if base_s.strip() != base2_s.strip():
            raise ConfigError(f"geometric range must use one base: {text!r}")
        base = float(base_s)
        e0, e1 = int(e0_s), int(e1_s)
        step = 1 if e1 >= e0 else -1
        vals = [base**k for k in range(e0, e1 + step, step)]
    else:
        vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ConfigError(f"empty range: {text!r}")
    return vals


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path) as handle:
            for line_no, raw in enumerate(handle, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key = value")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
                out[key] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


def _coerce(key: str, value):
    if value is None or not isinstance(value, str):
        return value
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _INT_KEYS:
        return int(value)
    return value


def resolve_config(argv):
    parser = argparse.ArgumentParser(
        prog="fplap",
        description="Verification runs for the fractional p-Laplacian toolkit",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key = value file; flags win")
    parser.add_argument("--s", type=float, dest="s")
    parser.add_argument("--p", type=float, dest="p")
    parser.add_argument("--n", type=int, dest="n")
    parser.add_argument("--nu", type=float, dest="nu")
    parser.add_argument("--eta", type=float, dest="eta")
    parser.add_argument("--R", type=float, dest="R")
    parser.add_argument("--delta", type=float, dest="delta")
    parser.add_argument("--deltas", dest="deltas")
    parser.add_argument("--tol", type=float, dest="tol")
    parser.add_argument("--out", dest="out")
    parser.add_argument("--seed", type=int, dest="seed")
    parser.add_argument("--probes", dest="probes")
    parser.add_argument("--f-const", type=float, dest="f_const")
    parser.add_argument("--layers", type=int, dest="layers")
    parser.add_argument("--window", dest="window")
    parser.add_argument("--field", choices=("flattened", "monotone"), dest="field")
    parser.add_argument("--eps-shell", type=float, dest="eps_shell")
    parser.add_argument("--samples", type=int, dest="samples")
    args = parser.parse_args(argv)

    config = dict(_DEFAULTS)
    if args.config:
        file_cfg = _read_config_file(args.config)
        if "command" in file_cfg and file_cfg["command"] != args.command:
            raise ConfigError(
                f"config file names command {file_cfg['command']!r}, "
                f"invocation says {args.command!r}"
            )
        for key, value in file_cfg.items():
            if key != "command":
                config[key] = _coerce(key, value)
    for key in config:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            config[key] = flag_val
    config["command"] = args.command
    if config["out"] is None:
        config["out"] = f"fplap-out/{args.command}"
    _validate_config(config)
    return config


def _validate_config(cfg):
    if not 0.0 < cfg["s"] < 1.0:
        raise ConfigError("s must lie in (0, 1)")
    if cfg["p"] <= 1.0:
        raise ConfigError("p must exceed 1")
    if cfg["n"] < 1:
        raise ConfigError("n must be >= 1")


# ---------------------------------------------------------------------------
# command implementations: each returns (results, assertions, series)


def _run_constants(cfg):
    s, p, nu = cfg["s"], cfg["p"], cfg["nu"]
    value = c_nu(s, p, nu)
    left = left_tail_term(s, p)
    results = {"c_nu": value, "left_tail_term": left, "threshold": (p * s - 1.0) / (p - 1.0)}
    if cfg["n"] >= 2:
        eig = c_nu_n(s, p, nu, cfg["n"])
        results.update({
            "c_nu_n": eig.c_nu_n,
            "angular_factor": eig.angular_factor,
            "sphere_area_factor": eig.sphere_area_factor,
        })
    assertions = [
        Assertion("left_tail_exact", left == 1.0 / (p * s), f"left tail {left!r}"),
    ]
    if nu < s:
        assertions.append(Assertion("c_nu_positive", value > 0.0, f"c_nu = {value:g}"))
    sweep = [(t, c_nu(s, p, t)) for t in np.linspace(0.05 * s, 0.95 * s, 10)]
    series = [("c_nu_vs_nu", ("nu", "c_nu"), sweep)]
    return results, assertions, series


def _run_eigen_verify(cfg):
    params = FracParams(cfg["n"], cfg["s"], cfg["p"])
    probes = [float(v) for v in str(cfg["probes"]).split(",")]
    tol = cfg["tol"] if cfg["tol"] is not None else 1.0e-3
    report = verify_halfspace_eigen(params, cfg["nu"], probes)
    results = report.to_dict()
    if report.degenerate:
        ok = max(report.abs_deviation) < max(tol, 1.0e-4)
        detail = f"max abs dev {max(report.abs_deviation):.3e}"
        assertions = [Assertion("degenerate_abs_deviation", ok, detail)]
    else:
        assertions = [Assertion(
            "max_rel_deviation", report.max_rel_deviation < tol,
            f"max rel dev {report.max_rel_deviation:.3e} vs tol {tol:g}",
        )]
    rows = list(zip(report.probes, report.operator_values,
                    report.closed_form_values, report.rel_deviation))
    return results, assertions, [("probe_deviation",
                                  ("probe", "operator", "closed_form", "rel_dev"), rows)]


def _run_barrier_check(cfg):
    params = FracParams(cfg["n"], cfg["s"], cfg["p"])
    spec = BarrierSpec(nu=cfg["nu"], epsilon_shell=cfg["eps_shell"])
    ks = range(3, 3 + max(4, min(cfg["samples"], 10)))
    samples = []
    for k in ks:
        x = np.zeros(cfg["n"])
        x[-1] = 1.0 + 2.0**-k
        samples.append(x)
    report = barrier_lower_bound_check(spec, params, np.array(samples))
    results = report.to_dict()
    assertions = [
        Assertion("min_ratio_positive", report.positive,
                  f"min ratio {report.min_ratio:g}"),
    ]
    rows = list(zip(report.distances, report.operator_values, report.ratios))
    return results, assertions, [("shell_ratios",
                                  ("distance", "operator_value", "ratio"), rows)]


def _run_scaled_limit(cfg):
    params = FracParams(cfg["n"], cfg["s"], cfg["p"])
    spec = BarrierSpec(nu=cfg["nu"], epsilon_shell=cfg["eps_shell"])
    deltas = parse_delta_range(str(cfg["deltas"]))
    tol = cfg["tol"] if cfg["tol"] is not None else 0.05
    report = scaled_limit_scan(spec, params, deltas)
    results = report.to_dict()
    assertions = [Assertion(
        "extrapolated_limit", report.rel_deviation <= tol,
        f"rel dev {report.rel_deviation:.3%} vs {tol:.1%}",
    )]
    rows = list(zip(report.d_sequence, report.scaled_values))
    return results, assertions, [("scaled_values", ("d", "scaled_value"), rows)]


def _run_supersolution(cfg):
    params = FracParams(cfg["n"], cfg["s"], cfg["p"])
    count = max(int(cfg["samples"]), 5)
    ts = np.linspace(-0.9, 0.9, count)
    pts = np.zeros((count, cfg["n"]))
    pts[:, -1] = ts
    report = g_supersolution_check(params, pts)
    results = report.to_dict()
    assertions = [Assertion("min_positive", report.positive,
                            f"min {report.min_value:g}")]
    rows = list(zip(ts, report.values))
    return results, assertions, [("profile_values", ("x_n", "value"), rows)]


def _solve_common(cfg):
    params = FracParams(1, cfg["s"], cfg["p"])
    domain = Domain1D(-1.0, 1.0)
    grid = make_graded_grid(domain, boundary_layers=cfg["layers"])
    result = solve(domain, grid, cfg["f_const"], params)
    return params, domain, grid, result


def _run_solve(cfg):
    _, _, grid, result = _solve_common(cfg)
    results = result.to_dict()
    assertions = [
        Assertion("converged", result.converged,
                  f"residual {result.residual_sup:.3e} vs tol {result.tolerance:.3e}"),
    ]
    if cfg["f_const"] >= 0.0:
        assertions.append(Assertion(
            "nonnegative", bool(np.min(result.values) >= -result.tolerance),
            f"min u {np.min(result.values):.3e}",
        ))
    d = grid.boundary_distances()
    series = [
        ("solution", ("node", "value"),
         list(zip(grid.interior, result.values))),
        ("dist_vs_value", ("dist", "abs_value"),
         list(zip(d, np.abs(result.values)))),
    ]
    return results, assertions, series


def _run_exponent_fit(cfg):
    params, _, grid, result = _solve_common(cfg)
    if cfg["window"]:
        lo_s, hi_s = str(cfg["window"]).split(",")
        window = (float(lo_s), float(hi_s))
    else:
        window = (2.0 ** -float(cfg["layers"]), 2.0**-4)
    fit = fit_boundary_exponent(result, window)
    results = {"solve": result.to_dict(), "fit": fit.to_dict()}
    assertions = [
        Assertion("solver_converged", result.converged, ""),
        Assertion("r_squared", fit.r_squared > 0.99, f"r2 = {fit.r_squared:.5f}"),
        Assertion("exponent_range", 0.0 < fit.nu_hat <= params.s + 0.05,
                  f"nu_hat = {fit.nu_hat:.4f}"),
    ]
    d = grid.boundary_distances()
    series = [("dist_vs_value", ("dist", "abs_value"),
               list(zip(d, np.abs(result.values))))]
    return results, assertions, series


def _hopf_setup(cfg):
    params = FracParams(2, cfg["s"], cfg["p"])
    field = flattened_test_field(2) if cfg["field"] == "flattened" else monotone_test_field(2)
    return HalfSpaceSetup(params=params, u=field)


def _run_hopf_split(cfg):
    setup = _hopf_setup(cfg)
    delta = cfg["delta"]
    regions = RegionSet(delta=delta, eta=cfg["eta"], R=cfg["R"])
    rng = np.random.default_rng(cfg["seed"])
    geometry = regions.check_geometry(rng)
    report = split_I_II(setup, [delta, 0.0], regions)
    results = {"split": report.to_dict(), "geometry": geometry}
    assertions = [
        Assertion("consistency", report.consistency_ok,
                  f"split {report.consistency_split:.6e} vs direct "
                  f"{report.consistency_direct:.6e}"),
        Assertion("geometry", all(geometry.values()), str(geometry)),
    ]
    rows = [(k, v) for k, v in report.I_parts.items()]
    rows.append(("D1_diagnostic", report.D1_diagnostic))
    rows.append(("II", report.II_total))
    return results, assertions, [("region_contributions", ("region", "value"), rows)]


def _run_hopf_scan(cfg):
    setup = _hopf_setup(cfg)
    deltas = parse_delta_range(str(cfg["deltas"]))
    scan = delta_scaling_scan(setup, deltas, eta=cfg["eta"], R=cfg["R"])
    results = scan.to_dict()
    slope_target = min(1.0 + cfg["p"] - cfg["p"] * cfg["s"], 2.0) - 0.2
    assertions = [Assertion("consistency", all(scan.consistency_ok), "")]
    if cfg["field"] == "flattened":
        assertions += [
            Assertion("II_slope", bool(scan.slope_II >= slope_target),
                      f"slope {scan.slope_II:.3f} vs target {slope_target:.3f}"),
            Assertion("I_negative_linear", scan.I_all_negative and scan.c_fit > 0.0,
                      f"c_fit = {scan.c_fit:.4f}"),
            Assertion("combined_bound", scan.combined_ok, ""),
        ]
    else:
        assertions.append(Assertion("hypothesis_gate", scan.theorem_conforming,
                                    f"gate slope {scan.gate_slope:.3f}"))
    rows = list(zip(scan.deltas, scan.I_totals, scan.II_totals,
                    scan.D1_diagnostics, scan.gate_values))
    return results, assertions, [("delta_scan",
                                  ("delta", "I_total", "II_total", "D1", "gate"), rows)]


_RUNNERS = {
    "constants": _run_constants,
    "eigen-verify": _run_eigen_verify,
    "barrier-check": _run_barrier_check,
    "scaled-limit": _run_scaled_limit,
    "supersolution": _run_supersolution,
    "solve": _run_solve,
    "exponent-fit": _run_exponent_fit,
    "hopf-split": _run_hopf_split,
    "hopf-scan": _run_hopf_scan,
}


def run(config: dict) -> int:
    """Execute a resolved configuration; returns the process exit code."""
    out_dir = config["out"]
    try:
        results, assertions, series = _RUNNERS[config["command"]](config)
        nonconverged = False
    except QuadratureError as exc:
        results = {"error": str(exc), "partial_value": exc.value}
        assertions = [Assertion("numerical_convergence", False, str(exc))]
        series = []
        nonconverged = True
    write_report(out_dir, config, results, assertions, __version__)
    for name, header, rows in series:
        write_series(out_dir, name, header, rows)
    for a in assertions:
        status = "PASS" if a.passed else "FAIL"
        print(f"[{status}] {a.name}" + (f": {a.detail}" if a.detail else ""))
    print(f"report: {out_dir}/report.json")
    if nonconverged or results.get("solve", {}).get("converged") is False \
            or results.get("converged") is False:
        return 3
    if not all(a.passed for a in assertions):
        return 1
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = resolve_config(argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse reports its own message
        return 2 if exc.code not in (0,) else 0
    try:
        return run(config)
    except (ValueError, NotImplementedError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
