# routes/api_routes.py
from datetime import datetime, timezone

from flask import Blueprint, jsonify, request

import config
from catalog import class_table
from cli import build_verification_report, run_id_for
from errors import ConfigError
from minimal_counterpart import MinimalData, b2n_normalize, counterpart_report
from utils.audit_logger import log_action
from weierstrass_core import validate_params

api_bp = Blueprint("api", __name__)


def _body():
    body = request.get_json(silent=True)
    if not isinstance(body, dict):
        raise ConfigError("request body must be a JSON object")
    return body


def _run_config(body):
    raw = {k: v for k, v in body.items() if k not in ("tol", "require_horizontal_ends")}
    return config.resolve_run_config(raw, body.get("tol"))


@api_bp.route("/catalog", methods=["GET"])
def catalog():
    cones = request.args.get("cones", type=int)
    if cones is None:
        raise ConfigError("query parameter 'cones' must be an integer")
    table = class_table(cones)
    log_action("api", f"cones{cones}", "catalog")
    return jsonify({"status": "success", **table})


@api_bp.route("/verify", methods=["POST"])
def verify():
    """
    Body: a run configuration (params plus optional grid / tolerances /
    basepoint) and optional "tol" and "require_horizontal_ends".
    """
    body = _body()
    resolved = _run_config(body)
    run_id = run_id_for(resolved)
    log_action("api", run_id, "verify")
    report = build_verification_report(resolved, bool(body.get("require_horizontal_ends")), run_id)
    report["generated_at"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return jsonify({"status": "success", "report": report})


@api_bp.route("/minimal", methods=["POST"])
def minimal():
    body = _body()
    resolved = _run_config(body)
    opts = resolved["minimal"]
    p = validate_params(resolved["params"])
    if opts.get("normalize"):
        p = b2n_normalize(p)
    d = MinimalData(p, opts.get("orientation", "vertical"))
    log_action("api", run_id_for(resolved), "minimal")

    with config.active_tolerances(resolved["tolerances"]):
        section = counterpart_report(d, tol=resolved["tolerances"]["integrated"])
    return jsonify({"status": "success", "params": p.to_dict(), "minimal_counterpart": section})
