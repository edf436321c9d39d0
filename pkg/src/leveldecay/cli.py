"""Config-driven experiment runner.

One JSON document describes one experiment; ``leveldecay run config.json``
executes it and writes machine-readable reports (JSON, CSV, and binary field
files) into the output directory.  Exit codes: 0 all checks passed, 1 a
verification failed, 2 input error, 3 solver non-convergence or non-finite
output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .analysis import (
    default_levels,
    distribution_function,
    energy_inequality_check,
    exponent_table,
    regime_verdict,
)
from .errors import (
    ConvergenceError,
    InputError,
    NonFiniteError,
    ParameterError,
)
from .lemmas import LemmaParams, bound_for
from .oracle import run_domination_suite
from .pde import (
    CoefficientSpec,
    SolverConfig,
    SourceSpec,
    excess,
    picard_solve,
    sample_source,
    truncate,
)

SCHEMA_VERSION = "1"
MODES = ("lemma-bound", "lemma-verify", "solve", "analyze", "sweep")
VARIANTS = ("classical", "kv", "generalized")
COLLAPSE_REL_TOL = 1e-10

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_SOLVER_FAILED = 3


# ---------------------------------------------------------------------------
# config parsing (strict: unknown keys rejected with a field path)
# ---------------------------------------------------------------------------

def _expect_object(obj, path):
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")


def _check_keys(obj, path, allowed, required=()):
    _expect_object(obj, path)
    for key in obj:
        if key not in allowed:
            raise InputError(f"{path}.{key}: unknown field")
    for key in required:
        if key not in obj:
            raise InputError(f"{path}.{key}: missing required field")


def _number(obj, path, key, default=None, allow_none=False):
    if key not in obj:
        return default
    value = obj[key]
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{path}.{key}: expected a number")
    return float(value)


def _integer(obj, path, key, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{path}.{key}: expected an integer")
    return value


def _string(obj, path, key, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if not isinstance(value, str):
        raise InputError(f"{path}.{key}: expected a string")
    return value


def _number_list(obj, path, key, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if (not isinstance(value, list) or not value
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in value)):
        raise InputError(f"{path}.{key}: expected a non-empty list of numbers")
    return [float(v) for v in value]


def _int_list(obj, path, key, default=None):
    if key not in obj:
        return default
    value = obj[key]
    if (not isinstance(value, list) or not value
            or any(isinstance(v, bool) or not isinstance(v, int)
                   for v in value)):
        raise InputError(f"{path}.{key}: expected a non-empty list of integers")
    return list(value)


def _domain(path, builder, *args, **kwargs):
    """Build a domain object, rewording domain errors as config errors."""
    try:
        return builder(*args, **kwargs)
    except (ParameterError, InputError) as err:
        raise InputError(f"{path}: {err}") from None


def _parse_lemma_params(obj, path):
    _check_keys(obj, path, allowed=("c", "alpha", "beta", "theta", "k0",
                                    "phi0"),
                required=("c", "alpha", "beta"))
    return _domain(path, LemmaParams,
                   c=_number(obj, path, "c"),
                   alpha=_number(obj, path, "alpha"),
                   beta=_number(obj, path, "beta"),
                   theta=_number(obj, path, "theta", 0.0),
                   k0=_number(obj, path, "k0", 1.0),
                   phi0=_number(obj, path, "phi0", 1.0))


def _parse_lemma_block(obj, path, mode):
    allowed = ("params", "variant", "n_levels", "suite")
    _check_keys(obj, path, allowed)
    out = {}
    if "params" in obj:
        out["params"] = _parse_lemma_params(obj["params"], f"{path}.params")
    variant = _string(obj, path, "variant")
    if variant is not None and variant not in VARIANTS:
        raise InputError(
            f"{path}.variant: expected one of {', '.join(VARIANTS)}")
    out["variant"] = variant
    n_levels = _integer(obj, path, "n_levels", 4000)
    if n_levels < 2:
        raise InputError(f"{path}.n_levels: need at least 2 levels")
    out["n_levels"] = n_levels
    suite = obj.get("suite", {})
    _check_keys(suite, f"{path}.suite", allowed=("n_per_regime",))
    n_per = _integer(suite, f"{path}.suite", "n_per_regime", 200)
    if n_per < 1:
        raise InputError(f"{path}.suite.n_per_regime: must be positive")
    out["n_per_regime"] = n_per
    if mode == "lemma-bound" and "params" not in out:
        raise InputError(f"{path}.params: missing required field")
    return out


def _parse_coefficient(obj, path):
    _check_keys(obj, path, allowed=("alpha_low", "beta_high", "theta"),
                required=("alpha_low", "beta_high"))
    return _domain(path, CoefficientSpec,
                   alpha_low=_number(obj, path, "alpha_low"),
                   beta_high=_number(obj, path, "beta_high"),
                   theta=_number(obj, path, "theta", 0.0))


def _parse_source(obj, path):
    allowed = ("kind", "m", "scale", "center", "cap", "custom_values")
    _check_keys(obj, path, allowed)
    kind = _string(obj, path, "kind", "radial_power")
    kwargs = dict(kind=kind,
                  m=_number(obj, path, "m", 2.0),
                  scale=_number(obj, path, "scale", 1.0),
                  cap=_number(obj, path, "cap", None, allow_none=True))
    center = _number_list(obj, path, "center")
    if center is not None:
        if len(center) != 3:
            raise InputError(f"{path}.center: expected 3 coordinates")
        kwargs["center"] = tuple(center)
    if "custom_values" in obj:
        value = obj["custom_values"]
        if isinstance(value, bool) or not isinstance(value, (int, float, list)):
            raise InputError(
                f"{path}.custom_values: expected a number or nested list")
        kwargs["custom_values"] = (
            float(value) if isinstance(value, (int, float))
            else np.asarray(value, dtype=float))
    return _domain(path, SourceSpec, **kwargs)


def _parse_solver_config(obj, path):
    allowed = ("picard_tol", "picard_max_iters", "cg_tol", "cg_max_iters",
               "face_average", "damping")
    _check_keys(obj, path, allowed)
    kwargs = {}
    for key in ("picard_tol", "cg_tol", "damping"):
        value = _number(obj, path, key)
        if value is not None:
            kwargs[key] = value
    for key in ("picard_max_iters", "cg_max_iters"):
        value = _integer(obj, path, key)
        if value is not None:
            kwargs[key] = value
    value = _string(obj, path, "face_average")
    if value is not None:
        kwargs["face_average"] = value
    return _domain(path, SolverConfig, **kwargs)


def _parse_solver_block(obj, path):
    allowed = ("coefficient", "source", "n_cells", "config")
    _check_keys(obj, path, allowed, required=("coefficient", "source",
                                              "n_cells"))
    n_cells = _int_list(obj, path, "n_cells")
    if any(n < 1 for n in n_cells):
        raise InputError(f"{path}.n_cells: entries must be positive")
    return {
        "coefficient": _parse_coefficient(obj["coefficient"],
                                          f"{path}.coefficient"),
        "source": _parse_source(obj["source"], f"{path}.source"),
        "n_cells": n_cells,
        "config": _parse_solver_config(obj.get("config", {}),
                                       f"{path}.config"),
    }


def _parse_analysis_block(obj, path):
    allowed = ("m", "theta", "n_levels", "pairs", "recursion")
    _check_keys(obj, path, allowed)
    pairs = obj.get("pairs", {})
    pairs_path = f"{path}.pairs"
    _check_keys(pairs, pairs_path,
                allowed=("count", "level_lo", "level_hi", "ratio_lo",
                         "ratio_hi"))
    count = _integer(pairs, pairs_path, "count", 20)
    if count < 0:
        raise InputError(f"{pairs_path}.count: must be nonnegative")
    level_lo = _number(pairs, pairs_path, "level_lo", 0.05)
    level_hi = _number(pairs, pairs_path, "level_hi", 0.5)
    ratio_lo = _number(pairs, pairs_path, "ratio_lo", 1.5)
    ratio_hi = _number(pairs, pairs_path, "ratio_hi", 3.0)
    if not 0.0 < level_lo <= level_hi:
        raise InputError(f"{pairs_path}: need 0 < level_lo <= level_hi")
    if not 1.0 < ratio_lo <= ratio_hi:
        raise InputError(f"{pairs_path}: need 1 < ratio_lo <= ratio_hi")
    n_levels = _integer(obj, path, "n_levels", 64)
    if n_levels < 1:
        raise InputError(f"{path}.n_levels: must be positive")
    recursion = None
    if "recursion" in obj:
        recursion = _parse_lemma_params(obj["recursion"], f"{path}.recursion")
    return {
        "m": _number(obj, path, "m"),
        "theta": _number(obj, path, "theta"),
        "n_levels": n_levels,
        "pairs": {"count": count, "level_lo": level_lo, "level_hi": level_hi,
                  "ratio_lo": ratio_lo, "ratio_hi": ratio_hi},
        "recursion": recursion,
    }


def _parse_sweep_block(obj, path):
    _check_keys(obj, path, allowed=("m", "theta", "n_cells"),
                required=("m", "theta", "n_cells"))
    ms = _number_list(obj, path, "m")
    thetas = _number_list(obj, path, "theta")
    n_cells = _int_list(obj, path, "n_cells")
    if any(n < 1 for n in n_cells):
        raise InputError(f"{path}.n_cells: entries must be positive")
    return {"m": ms, "theta": thetas, "n_cells": n_cells}


def load_config(path):
    """Parse and strictly validate an experiment config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        raise InputError(f"config: {err}") from None
    except json.JSONDecodeError as err:
        raise InputError(
            f"config: parse error at line {err.lineno}, column {err.colno}: "
            f"{err.msg}") from None
    return validate_config(doc)


def validate_config(doc):
    """Normalize a parsed config document; InputError names the bad field."""
    _check_keys(doc, "config",
                allowed=("schema_version", "mode", "seed", "out_dir", "lemma",
                         "solver", "analysis", "sweep"),
                required=("schema_version", "mode"))
    version = _string(doc, "config", "schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(
            f"config.schema_version: expected {SCHEMA_VERSION!r}, "
            f"got {version!r}")
    mode = _string(doc, "config", "mode")
    if mode not in MODES:
        raise InputError(f"config.mode: expected one of {', '.join(MODES)}")
    seed = _integer(doc, "config", "seed", 0)
    if not 0 <= seed < 2 ** 64:
        raise InputError("config.seed: expected an unsigned 64-bit integer")
    out = {"mode": mode, "seed": seed,
           "out_dir": _string(doc, "config", "out_dir", ".")}

    if mode in ("lemma-bound", "lemma-verify"):
        lemma = doc.get("lemma")
        if mode == "lemma-bound" and lemma is None:
            raise InputError("config.lemma: missing required field")
        out["lemma"] = _parse_lemma_block(lemma if lemma is not None else {},
                                          "config.lemma", mode)
    elif mode in ("solve", "analyze"):
        if "solver" not in doc:
            raise InputError("config.solver: missing required field")
        out["solver"] = _parse_solver_block(doc["solver"], "config.solver")
        if mode == "analyze":
            out["analysis"] = _parse_analysis_block(doc.get("analysis", {}),
                                                    "config.analysis")
            src = out["solver"]["source"]
            if out["analysis"]["m"] is None and src.kind != "radial_power":
                raise InputError(
                    "config.analysis.m: required for non-radial sources")
    elif mode == "sweep":
        if "sweep" not in doc:
            raise InputError("config.sweep: missing required field")
        out["sweep"] = _parse_sweep_block(doc["sweep"], "config.sweep")
        solver = doc.get("solver", {})
        _check_keys(solver, "config.solver",
                    allowed=("coefficient", "source", "config"))
        coeff = solver.get("coefficient", {})
        _check_keys(coeff, "config.solver.coefficient",
                    allowed=("alpha_low", "beta_high"))
        out["sweep_base"] = {
            "alpha_low": _number(coeff, "config.solver.coefficient",
                                 "alpha_low", 1.0),
            "beta_high": _number(coeff, "config.solver.coefficient",
                                 "beta_high", 1.0),
            "source": _parse_source(solver.get("source", {}),
                                    "config.solver.source"),
            "config": _parse_solver_config(solver.get("config", {}),
                                           "config.solver.config"),
        }
    return out


# ---------------------------------------------------------------------------
# deterministic report writing
# ---------------------------------------------------------------------------

def _jsonable(value):
    """Recursively convert to JSON-safe types; non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return "NaN"
        return "Infinity" if value > 0 else "-Infinity"
    return value


def _write_json(path, payload):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True,
                      allow_nan=False)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text + "\n")


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(cell) for cell in row])


def _report_skeleton(norm):
    return {"schema_version": SCHEMA_VERSION, "mode": norm["mode"],
            "seed": norm["seed"]}


def _params_dict(p: LemmaParams):
    return {"c": p.c, "alpha": p.alpha, "beta": p.beta, "theta": p.theta,
            "k0": p.k0, "phi0": p.phi0}


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------

def _say(quiet, message):
    if not quiet:
        print(message)


def _run_lemma_bound(norm, out_dir, quiet):
    params = norm["lemma"]["params"]
    bounds = {variant: bound_for(params, variant).as_dict()
              for variant in VARIANTS}
    report = _report_skeleton(norm)
    report["params"] = _params_dict(params)
    report["bounds"] = bounds
    _write_json(os.path.join(out_dir, "lemma_bound.json"), report)
    _say(quiet, "lemma-bound: wrote lemma_bound.json")
    return EXIT_OK


def _record_passes(rec):
    if rec["max_violation"] > rec["tolerance"]:
        return False
    collapse = rec.get("collapse_value")
    if collapse is not None:
        limit = COLLAPSE_REL_TOL * rec["params"]["phi0"]
        if not (collapse < limit or collapse == 0.0):
            return False
    return True


def _run_lemma_verify(norm, out_dir, quiet):
    block = norm["lemma"]
    variants = (block["variant"],) if block["variant"] else VARIANTS
    records = run_domination_suite(n_per_regime=block["n_per_regime"],
                                   seed=norm["seed"], variants=variants,
                                   n_levels=block["n_levels"])
    n_failed = sum(not _record_passes(rec) for rec in records)
    max_violation = max(rec["max_violation"] for rec in records)
    report = _report_skeleton(norm)
    report["summary"] = {
        "n_cases": len(records),
        "n_failed": n_failed,
        "max_violation": max_violation,
        "passed": n_failed == 0,
    }
    report["cases"] = records
    _write_json(os.path.join(out_dir, "lemma_verify.json"), report)
    _say(quiet, f"lemma-verify: {len(records)} cases, {n_failed} failed, "
                f"max violation {max_violation:.3e}")
    return EXIT_OK if n_failed == 0 else EXIT_VERIFICATION_FAILED


def _solve_one(solver, n, out_dir, quiet, tag=""):
    u, iters, history = picard_solve(solver["coefficient"], solver["source"],
                                     n, solver["config"])
    name = f"solution{tag}_N{n}.bin"
    u.save(os.path.join(out_dir, name))
    _say(quiet, f"solve: N={n} converged in {iters} iterations "
                f"(sup |u| = {u.sup_norm():.6g})")
    entry = {"n_cells": n, "iterations": iters, "final_change": history[-1],
             "history": list(history), "sup_u": u.sup_norm(),
             "solution_file": name}
    return u, entry


def _run_solve(norm, out_dir, quiet):
    report = _report_skeleton(norm)
    report["solves"] = []
    for n in norm["solver"]["n_cells"]:
        _, entry = _solve_one(norm["solver"], n, out_dir, quiet)
        report["solves"].append(entry)
    _write_json(os.path.join(out_dir, "solve.json"), report)
    return EXIT_OK


def _sample_energy_pairs(rng, sup, pairs):
    out = []
    for _ in range(pairs["count"]):
        k = float(rng.uniform(pairs["level_lo"], pairs["level_hi"])) * sup
        h = k * float(rng.uniform(pairs["ratio_lo"], pairs["ratio_hi"]))
        out.append((k, h))
    return out


def _energy_results(u, f, coeff, rng, pairs):
    results = []
    ok = True
    if u.sup_norm() == 0.0:
        return results, ok  # no levels below sup: nothing to check
    for k, h in _sample_energy_pairs(rng, u.sup_norm(), pairs):
        residual = energy_inequality_check(u, f, coeff, k, h)
        g = excess(u.values, k)
        rhs = float(np.sum(f.values * truncate(g, h - k)) * u.spacing ** 3)
        passed = residual >= -0.05 * abs(rhs)
        ok = ok and passed
        results.append({"k": k, "h": h, "residual": residual, "rhs": rhs,
                        "passed": passed})
    return results, ok


def _run_analyze(norm, out_dir, quiet):
    solver = norm["solver"]
    analysis = norm["analysis"]
    coeff = solver["coefficient"]
    src = solver["source"]
    m = analysis["m"] if analysis["m"] is not None else src.m
    theta = analysis["theta"] if analysis["theta"] is not None \
        else coeff.theta
    table = exponent_table(m, theta)

    ns = sorted(set(solver["n_cells"]))
    fields = {}
    report = _report_skeleton(norm)
    report["exponent_regime"] = table.regime
    report["solves"] = []
    for n in ns:
        u, entry = _solve_one(solver, n, out_dir, quiet)
        fields[n] = u
        report["solves"].append(entry)

    coarse = fields[ns[0]]
    fine = fields[ns[-1]] if len(ns) > 1 else None
    verdict = regime_verdict(coarse, table,
                             recursion_params=analysis["recursion"],
                             u_fine=fine)
    report["regularity"] = verdict.as_dict()

    rng = np.random.default_rng(norm["seed"])
    energy_ok = True
    report["energy"] = []
    for n in ns:
        f = sample_source(src, n)
        results, ok = _energy_results(fields[n], f, coeff, rng,
                                      analysis["pairs"])
        energy_ok = energy_ok and ok
        report["energy"].append({"n_cells": n, "pairs": results,
                                 "passed": ok})
        dist = distribution_function(
            fields[n], default_levels(fields[n], analysis["n_levels"]))
        dist.to_csv(os.path.join(out_dir, f"distribution_N{n}.csv"))

    passed = verdict.passed and energy_ok
    report["passed"] = passed
    _write_json(os.path.join(out_dir, "analyze.json"), report)
    _say(quiet, f"analyze: regime {table.regime}, "
                f"{'passed' if passed else 'FAILED'}")
    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


def _run_sweep(norm, out_dir, quiet):
    base = norm["sweep_base"]
    rows = []
    any_solver_failure = False
    all_passed = True
    for m in norm["sweep"]["m"]:
        for theta in norm["sweep"]["theta"]:
            for n in norm["sweep"]["n_cells"]:
                row, failed, passed = _sweep_tuple(base, m, theta, n, out_dir,
                                                   quiet, norm)
                rows.append(row)
                any_solver_failure = any_solver_failure or failed
                all_passed = all_passed and passed
    _write_csv(os.path.join(out_dir, "sweep_summary.csv"),
               ["m", "theta", "n_cells", "regime", "status", "sup_u",
                "weak_norm", "fitted_exponent", "predicted_exponent"],
               rows)
    _say(quiet, f"sweep: {len(rows)} tuples, summary in sweep_summary.csv")
    if any_solver_failure:
        return EXIT_SOLVER_FAILED
    return EXIT_OK if all_passed else EXIT_VERIFICATION_FAILED


def _sweep_tuple(base, m, theta, n, out_dir, quiet, norm):
    table = exponent_table(m, theta)
    try:
        coeff = CoefficientSpec(alpha_low=base["alpha_low"],
                                beta_high=base["beta_high"], theta=theta)
        src_base = base["source"]
        src = SourceSpec(kind=src_base.kind, center=src_base.center, m=m,
                         scale=src_base.scale, cap=src_base.cap,
                         custom_values=src_base.custom_values)
    except (ParameterError, InputError) as err:
        raise InputError(f"sweep tuple (m={m}, theta={theta}, N={n}): {err}") \
            from None
    tag = f"m{m:g}_theta{theta:g}_N{n}"
    try:
        u, iters, history = picard_solve(coeff, src, n, base["config"])
    except ConvergenceError as err:
        _say(quiet, f"sweep {tag}: solver did not converge")
        report = _report_skeleton(norm)
        report.update(m=m, theta=theta, n_cells=n, status="no_convergence",
                      history=list(getattr(err, "history", []) or []))
        _write_json(os.path.join(out_dir, f"sweep_{tag}.json"), report)
        row = [m, theta, n, table.regime, "no_convergence", None, None, None,
               table.predicted_exponent]
        return row, True, False
    except NonFiniteError:
        _say(quiet, f"sweep {tag}: non-finite solution")
        report = _report_skeleton(norm)
        report.update(m=m, theta=theta, n_cells=n, status="non_finite")
        _write_json(os.path.join(out_dir, f"sweep_{tag}.json"), report)
        row = [m, theta, n, table.regime, "non_finite", None, None, None,
               table.predicted_exponent]
        return row, True, False

    verdict = regime_verdict(u, table)
    report = _report_skeleton(norm)
    report.update(m=m, theta=theta, n_cells=n, status="ok",
                  iterations=iters, history=list(history),
                  regularity=verdict.as_dict())
    _write_json(os.path.join(out_dir, f"sweep_{tag}.json"), report)
    _say(quiet, f"sweep {tag}: regime {table.regime}, "
                f"{'passed' if verdict.passed else 'FAILED'}")
    row = [m, theta, n, table.regime, "ok", u.sup_norm(),
           verdict.verdicts.get("weak_norm"),
           verdict.verdicts.get("fitted_exponent"),
           table.predicted_exponent]
    return row, False, verdict.passed


_MODE_RUNNERS = {
    "lemma-bound": _run_lemma_bound,
    "lemma-verify": _run_lemma_verify,
    "solve": _run_solve,
    "analyze": _run_analyze,
    "sweep": _run_sweep,
}


def run_experiment(norm, out_dir=None, seed=None, quiet=False):
    """Execute a validated config; returns the process exit code."""
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            raise InputError("--seed: expected an unsigned 64-bit integer")
        norm = dict(norm, seed=seed)
    out_dir = out_dir if out_dir is not None else norm["out_dir"]
    os.makedirs(out_dir, exist_ok=True)
    return _MODE_RUNNERS[norm["mode"]](norm, out_dir, quiet)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="leveldecay",
        description="Level-set decay experiments: lemma bounds, oracle "
                    "verification, degenerate elliptic solves, and "
                    "regularity analysis.")
    sub = parser.add_subparsers(dest="command", required=True)
    run_parser = sub.add_parser("run", help="run one experiment config")
    run_parser.add_argument("config", help="path to a JSON experiment config")
    run_parser.add_argument("--out", default=None, metavar="DIR",
                            help="output directory (overrides config)")
    run_parser.add_argument("--seed", type=int, default=None, metavar="U64",
                            help="random seed (overrides config)")
    run_parser.add_argument("--quiet", action="store_true",
                            help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        norm = load_config(args.config)
        return run_experiment(norm, out_dir=args.out, seed=args.seed,
                              quiet=args.quiet)
    except (InputError, ParameterError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ConvergenceError as err:
        print(f"error: solver did not converge: {err}", file=sys.stderr)
        return EXIT_SOLVER_FAILED
    except NonFiniteError as err:
        print(f"error: non-finite result: {err}", file=sys.stderr)
        return EXIT_SOLVER_FAILED


if __name__ == "__main__":
    sys.exit(main())
