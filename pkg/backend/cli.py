"""
maxgraph command line: verify | mesh | catalog | minimal-measure.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
"""
import argparse
import hashlib
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np
from scipy.stats import qmc

import config
from catalog import class_table
from errors import Infeasible, MaxGraphError, ParamsError
from integrator import angle, default_basepoint, end_tilt, immersion, loop_period
from mesh_builder import GridSpec, assemble, export_obj, export_ply, graph_check, sample_fundamental
from minimal_counterpart import MinimalData, b2n_normalize, counterpart_report, default_loops
from singular_analysis import apex_coincidence, classify_cone, components, stereographic, verify_singular_set
from utils import export_utils
from utils.audit_logger import log_action, set_level
from weierstrass_core import (
    _branch_w,
    _gauss_from_w,
    _normal_from_gauss,
    _phi,
    _w_squared,
    end_value_w0,
    gauss_derivative,
    hyperboloid_normal,
    normalize_horizontal_end,
    validate_params,
)

VERSION = "1.0.0"
BASEPOINT_CONVENTION = "z0 = a_2m + 1 on the positive real axis, f(z0) = 0"
GAUGE_CONVENTION = "a_1 = 1 for catalog-generated parameters"


def run_id_for(resolved):
    blob = json.dumps(resolved, sort_keys=True, default=str)
    return hashlib.sha1(blob.encode("utf-8")).hexdigest()[:10]


def _halton_points(p, count, upper_only=False, min_height=0.0, seed=0):
    u = qmc.Halton(d=2, seed=seed).random(count)
    log_r = np.log(0.25 * p.inner_radius) + u[:, 0] * np.log(16.0 * p.outer_radius / p.inner_radius)
    lo = 0.0 if upper_only else -math.pi
    theta = lo + (math.pi - lo) * u[:, 1]
    z = np.exp(log_r + 1j * theta)
    return z[np.abs(z.imag) > max(min_height, 1e-9)]


# ------------------------------
# Pointwise checks
# ------------------------------
def check_conformality(p, tol):
    z = _halton_points(p, config.CONFORMALITY_SAMPLES)
    phi = _phi(z, p)
    residual = np.abs(phi[0] ** 2 + phi[1] ** 2 - phi[2] ** 2) / np.sum(np.abs(phi) ** 2, axis=0)
    worst = float(np.max(residual))
    return {"samples": int(z.size), "max_relative_residual": worst, "passed": worst <= tol}


def check_branch_coherence(p, tol):
    z = _halton_points(p, config.CONFORMALITY_SAMPLES, seed=1)
    w2 = _w_squared(z, p)
    w = _branch_w(z, p)
    residual = float(np.max(np.abs(w * w - w2) / np.abs(w2)))
    conj = float(np.max(np.abs(_branch_w(np.conj(z), p) - np.conj(w))))
    re_min = float(np.min(w.real))
    return {
        "max_relative_residual": residual,
        "min_re_w": re_min,
        "conjugation_residual": conj,
        "passed": residual <= tol and re_min >= 0 and conj <= tol * max(1.0, float(np.max(np.abs(w)))),
    }


def check_gauss(p, tol):
    z = _halton_points(p, config.CONFORMALITY_SAMPLES, upper_only=True, seed=2)
    G = _gauss_from_w(_branch_w(z, p))
    nu = _normal_from_gauss(G)
    mod = np.abs(G)
    norm_dev = float(np.max(np.abs(np.linalg.norm(nu, axis=0) - 1)))
    up = bool(np.all(nu[2][mod > 1] > 0))
    # sigma must undo the lift to H^2 away from the singular set
    lifted = G[np.isfinite(mod) & (mod > 1 + 1e-6)][:50]
    sigma = max((float(abs(stereographic(hyperboloid_normal(g)) - g) / abs(g)) for g in lifted), default=0.0)
    return {
        "min_abs_g": float(np.min(mod)),
        "nu_norm_deviation": norm_dev,
        "nu3_positive_where_abs_g_gt_1": up,
        "stereographic_residual": sigma,
        "passed": bool(float(np.min(mod)) >= 1 - tol and norm_dev <= 1e-14 and up and sigma <= 1e-9),
    }


def check_hopf(p, tol=1e-6):
    h = config.FD_STEP
    z = _halton_points(p, 4 * config.HOPF_SAMPLES, upper_only=True, min_height=0.1 * p.inner_radius, seed=3)
    z = z[: config.HOPF_SAMPLES]
    analytic = np.array([gauss_derivative(x, p) for x in z])
    G = lambda x: _gauss_from_w(_branch_w(x, p))
    fd = (G(z + h) - G(z - h)) / (2 * h)
    rel = float(np.max(np.abs(fd - analytic) / np.abs(analytic)))
    return {"samples": int(z.size), "step": h, "max_relative_error": rel, "passed": rel <= tol}


# ------------------------------
# Integrated checks
# ------------------------------
def check_periods(p, tol):
    at_zero = loop_period(0, p)
    at_inf = loop_period("inf", p)
    expected_zero = np.array([0.0, -2 * math.pi, 0.0])
    dev_zero = float(np.max(np.abs(at_zero.v - expected_zero)))
    dev_inf = float(np.max(np.abs(at_inf.v + expected_zero)))
    closure = float(np.max(np.abs(at_zero.v + at_inf.v)))
    return {
        "zero": at_zero.to_dict(),
        "infinity": at_inf.to_dict(),
        "deviation_zero": dev_zero,
        "deviation_infinity": dev_inf,
        "closure": closure,
        "passed": max(dev_zero, dev_inf, closure) <= tol,
    }


def check_symmetry(p, basepoint, tol):
    z0 = default_basepoint(p) if basepoint is None else basepoint
    if z0.imag != 0:
        return {"skipped": "basepoint off the real axis", "passed": True}
    c = angle(z0)
    points = [
        0.7 * p.inner_radius * np.exp(1j * math.pi / 3),
        1.5 * p.outer_radius * np.exp(2j * math.pi / 3),
        0.5 * (p.a[0] + p.a[1]) + 0.1j * (p.a[1] - p.a[0]),
    ]
    worst = 0.0
    for z in points:
        f = immersion(z, p, basepoint).f
        g = immersion(np.conj(z), p, basepoint).f
        worst = max(worst, float(np.max(np.abs(g - np.array([f[0], 2 * c - f[1], f[2]])))))
    return {"max_residual": worst, "passed": worst <= tol}


def check_f2_identity(samples, tol=1e-10):
    z0 = default_basepoint(samples.params) if samples.basepoint is None else samples.basepoint
    c = angle(z0)
    dev = np.abs(samples.f[:, :, 1] + np.angle(samples.z) - c)
    worst = float(np.max(dev))
    return {"samples": int(dev.size), "max_deviation": worst, "passed": worst <= tol}


def check_end(p, require_horizontal, tol):
    tilt = end_tilt(p)
    consistent = tilt["direction"] == "horizontal" or np.sign(tilt["slope_numeric"]) == np.sign(tilt["slope_closed_form"])
    result = {"end_tilt": tilt, "slope_sign_consistent": bool(consistent)}
    if require_horizontal:
        result["horizontal"] = bool(abs(tilt["w0"] - 1) <= tol)
        result["passed"] = bool(consistent) and result["horizontal"]
    else:
        result["passed"] = bool(consistent)
    return result


# ------------------------------
# Report
# ------------------------------
def _prepare_params(resolved, require_horizontal):
    """Validated params, normalized to w(0) = 1 when horizontal ends are required."""
    p = validate_params(resolved["params"])
    note = None
    if require_horizontal and abs(end_value_w0(p) - 1) > resolved["tolerances"]["algebraic"]:
        p = normalize_horizontal_end(p)
        note = "params re-solved for w(0) = 1"
    return p, note


def build_verification_report(resolved, require_horizontal=False, run_id=None):
    """Runs every check once under the resolved tolerance ladder. Raises ParamsError for invalid input."""
    with config.active_tolerances(resolved["tolerances"]):
        return _build_report(resolved, require_horizontal, run_id)


def _build_report(resolved, require_horizontal, run_id):
    tol = resolved["tolerances"]
    basepoint = resolved["basepoint"]
    run_id = run_id or run_id_for(resolved)
    report = {
        "version": VERSION,
        "run_id": run_id,
        "tol_level": resolved["tol_level"],
        "tolerances": tol,
        "grid": resolved["grid"],
        "basepoint": {
            "z0": None if basepoint is None else [basepoint.real, basepoint.imag],
            "convention": BASEPOINT_CONVENTION,
        },
        "gauge": GAUGE_CONVENTION,
        "require_horizontal_ends": require_horizontal,
    }

    try:
        p, note = _prepare_params(resolved, require_horizontal)
    except Infeasible as e:
        report.update({
            "params": resolved["params"],
            "checks": {"horizontal_ends": {"passed": False, **e.to_dict()}},
            "cones": [],
            "passed": False,
        })
        return report

    report["params"] = p.to_dict()
    if note:
        report["params_note"] = note
    checks = {}

    def run(name, fn, *args):
        try:
            checks[name] = fn(*args)
        except MaxGraphError as e:
            checks[name] = {"passed": False, **e.to_dict()}

    run("conformality", check_conformality, p, tol["algebraic"])
    run("branch_coherence", check_branch_coherence, p, tol["algebraic"])
    run("gauss_upper_half_plane", check_gauss, p, tol["algebraic"])
    run("hopf_vs_finite_differences", check_hopf, p)
    run("singular_set", verify_singular_set, p)
    run("periods", check_periods, p, tol["integrated"])
    run("symmetry", check_symmetry, p, basepoint, tol["mesh"])
    run("end", check_end, p, require_horizontal, tol["algebraic"])

    coincidence, cones = [], []
    for comp in components(p):
        try:
            coincidence.append(apex_coincidence(comp, p, basepoint))
        except MaxGraphError as e:
            coincidence.append({"component": comp.label, "passed": False, **e.to_dict()})
        try:
            cones.append(classify_cone(comp, p, basepoint=basepoint).to_dict())
        except MaxGraphError as e:
            cones.append({"component": comp.to_dict(), "direction": None, "error": e.to_dict()})
    checks["apex_coincidence"] = {"components": coincidence, "passed": all(c["passed"] for c in coincidence)}
    checks["cone_directions"] = {
        "matches_expected": [c.get("matches_expected") for c in cones],
        "matches_reversed_convention": [c.get("matches_reversed_convention") for c in cones],
        "stable": [c.get("stable") for c in cones],
        "endpoint_gauss_ok": [c.get("endpoint_gauss_ok") for c in cones],
        "passed": all(c.get("matches_expected") and c.get("stable") and c.get("endpoint_gauss_ok") for c in cones),
    }
    checks["nondegeneracy"] = {
        "passed": all(c.get("nondegenerate") and c.get("criteria", {}).get("passed") for c in cones),
    }
    checks["embedded_neighborhood"] = {
        "proxy": True,
        "passed": all(c.get("embedded_neighborhood_check") for c in cones),
    }

    try:
        samples = sample_fundamental(p, GridSpec.from_config(resolved["grid"]), basepoint)
        checks["f2_identity"] = check_f2_identity(samples)
        mesh = assemble(samples, p, copies=0, cone_directions=[c.get("direction") for c in cones])
        checks["graph"] = dict(graph_check(mesh), mesh=mesh.summary())
        quad = max(s.quad_error for s in samples.as_samples())
    except MaxGraphError as e:
        checks.setdefault("f2_identity", {"passed": False, **e.to_dict()})
        checks["graph"] = {"passed": False, **e.to_dict()}
        quad = None

    report["checks"] = checks
    report["cones"] = cones
    report["max_quadrature_error"] = quad
    report["passed"] = all(entry.get("passed") for entry in checks.values())
    return report


def _stamp(report):
    report["generated_at"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return report


def _emit(report, args, default_name):
    _stamp(report)
    if args.json:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    path = args.out or export_utils.default_path(default_name, report.get("run_id", "run"), "json")
    if not args.json or args.out:
        export_utils.write_json_report(path, report)
    return path


# ------------------------------
# Commands
# ------------------------------
def _resolve(args):
    resolved = config.load_run_config(args.config, args.tol)
    if getattr(args, "grid", None):
        g = GridSpec.from_string(args.grid)
        resolved["grid"].update(radial_samples=g.radial_samples, angular_samples=g.angular_samples)
    return resolved


def cmd_verify(args):
    resolved = _resolve(args)
    run_id = run_id_for(resolved)
    log_action("verify", run_id, f"verifying {args.config}")
    report = build_verification_report(resolved, args.require_horizontal_ends, run_id)
    _emit(report, args, "verify")
    if args.pdf:
        export_utils.generate_report_pdf(args.pdf, report)
    if args.csv:
        export_utils.export_cone_csv(args.csv, report.get("cones", []))
    log_action("verify", run_id, "passed" if report["passed"] else "failed")
    if not report["passed"]:
        failed = [k for k, v in report.get("checks", {}).items() if not v.get("passed")]
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
    return 0 if report["passed"] else 1


def cmd_mesh(args):
    resolved = _resolve(args)
    run_id = run_id_for(resolved)
    p, _ = _prepare_params(resolved, args.require_horizontal_ends)
    basepoint = resolved["basepoint"]
    log_action("mesh", run_id, f"meshing {args.config} with {args.copies} copies")

    with config.active_tolerances(resolved["tolerances"]):
        directions = [classify_cone(c, p, basepoint=basepoint, neighborhood=False).direction for c in components(p)]
        samples = sample_fundamental(p, GridSpec.from_config(resolved["grid"]), basepoint)
        mesh = assemble(samples, p, copies=args.copies, cone_directions=directions)
        findings = graph_check(mesh)

    out = args.out or export_utils.default_path("mesh", run_id, "obj")
    if out.lower().endswith(".ply"):
        export_ply(mesh, out)
    else:
        export_obj(mesh, out)
    report = {
        "version": VERSION,
        "run_id": run_id,
        "params": p.to_dict(),
        "grid": samples.grid.to_dict(),
        "tol_level": resolved["tol_level"],
        "basepoint": {"z0": None if basepoint is None else [basepoint.real, basepoint.imag],
                      "convention": BASEPOINT_CONVENTION},
        "mesh": mesh.summary(),
        "output": os.path.abspath(out),
        "cone_directions": directions,
        "graph_check": findings,
        "passed": findings["passed"],
    }
    _stamp(report)
    if args.json:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        export_utils.write_json_report(os.path.splitext(out)[0] + ".json", report)
    log_action("mesh", run_id, f"wrote {out}")
    return 0 if findings["passed"] else 1


def cmd_catalog(args):
    table = class_table(args.cones)
    log_action("catalog", f"cones{args.cones}", f"{table['total']} classes")
    text = json.dumps(table, indent=2)
    if args.out:
        export_utils.write_json_report(args.out, table)
    if args.json or not args.out:
        print(text)
    return 0


def cmd_minimal_measure(args):
    resolved = _resolve(args)
    run_id = run_id_for(resolved)
    opts = resolved["minimal"]
    p = validate_params(resolved["params"])
    if opts.get("normalize"):
        p = b2n_normalize(p)
    d = MinimalData(p, opts.get("orientation", "vertical"))
    log_action("minimal-measure", run_id, f"measuring {len(default_loops(p))} loops")

    with config.active_tolerances(resolved["tolerances"]):
        section = counterpart_report(d, tol=resolved["tolerances"]["integrated"])
    contractible = [e for e in section["measured_loops"] if e["loop"] == "contractible"]
    closed = all(max(abs(x) for x in e["vector"]) <= resolved["tolerances"]["integrated"] for e in contractible)
    report = {
        "version": VERSION,
        "run_id": run_id,
        "params": p.to_dict(),
        "tol_level": resolved["tol_level"],
        "minimal_counterpart": section,
        "passed": closed,
    }
    _emit(report, args, "minimal")
    return 0 if closed else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="maxgraph", description="Singly periodic maximal graphs with cone-like singularities")
    parser.add_argument("--verbose", action="store_true", help="log progress at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(cmd, needs_config=True):
        if needs_config:
            cmd.add_argument("--config", required=True, help="run configuration (JSON)")
            cmd.add_argument("--tol", default=None, choices=sorted(config.TOLERANCE_LADDERS), help="tolerance ladder")
        cmd.add_argument("--out", default=None, help="output path")
        cmd.add_argument("--json", action="store_true", help="print the report to stdout")

    verify = sub.add_parser("verify", help="run the full check suite")
    common(verify)
    verify.add_argument("--grid", default=None, help="RxA sampling grid")
    verify.add_argument("--require-horizontal-ends", action="store_true")
    verify.add_argument("--pdf", default=None, help="also write a PDF summary")
    verify.add_argument("--csv", default=None, help="also write the cone table as CSV")
    verify.set_defaults(func=cmd_verify)

    mesh = sub.add_parser("mesh", help="build and export the triangulated graph")
    common(mesh)
    mesh.add_argument("--grid", default=None, help="RxA sampling grid")
    mesh.add_argument("--copies", type=int, default=0, help="period translates by (0, 2 pi, 0)")
    mesh.add_argument("--require-horizontal-ends", action="store_true")
    mesh.set_defaults(func=cmd_mesh)

    cat = sub.add_parser("catalog", help="list types and canonical cone configurations")
    common(cat, needs_config=False)
    cat.add_argument("--cones", type=int, required=True)
    cat.set_defaults(func=cmd_catalog)

    minimal = sub.add_parser("minimal-measure", help="measure periods of the minimal counterpart")
    common(minimal)
    minimal.set_defaults(func=cmd_minimal_measure)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.verbose:
        set_level(logging.INFO)
    try:
        return args.func(args)
    except ParamsError as e:
        print(f"error: {e.code}: {e.message}", file=sys.stderr)
        return 2
    except MaxGraphError as e:
        print(f"error: {e.code}: {e.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
