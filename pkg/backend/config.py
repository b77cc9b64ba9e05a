import os
import json
from contextlib import contextmanager

from errors import ConfigError

ROOT_DIR = os.getcwd()
EXPORT_DIR = os.environ.get("MAXGRAPH_EXPORT_DIR", os.path.join(ROOT_DIR, "static", "exports"))
LOG_LEVEL = os.environ.get("MAXGRAPH_LOG_LEVEL", "WARNING")
ACTIVITY_LOG = os.environ.get("MAXGRAPH_ACTIVITY_LOG")

# Tolerance ladder: algebraic identities / integrated quantities / mesh-level checks.
# "segment" is the absolute quadrature tolerance per path segment.
TOLERANCE_LADDERS = {
    "strict": {"algebraic": 1e-13, "integrated": 1e-9, "mesh": 1e-7, "segment": 1e-11},
    "default": {"algebraic": 1e-12, "integrated": 1e-8, "mesh": 1e-6, "segment": 1e-10},
    "loose": {"algebraic": 1e-10, "integrated": 1e-6, "mesh": 1e-4, "segment": 1e-9},
}
DEFAULT_TOL_LEVEL = "default"
# Ladder in force for the current run; modules read it at call time.
TOL = dict(TOLERANCE_LADDERS[DEFAULT_TOL_LEVEL])

# Quadrature
GAUSS_NODES = 24
MAX_SUBDIVISIONS = 2000
AVOIDANCE_FACTOR = 1e-3

# Apex extrapolation
APEX_LEVELS = 3
APEX_EPS_FACTOR = 1e-3
APEX_AXIS_EPS_FACTOR = 1e-6

# Mesh grid defaults
DEFAULT_GRID = {
    "radial_samples": 200,
    "angular_samples": 100,
    "seam_refinement": 3,
    "r_min": None,
    "r_max": None,
}
R_MIN_FACTOR = 0.05
R_MAX_FACTOR = 20.0
MIN_ANGULAR_SAMPLES = 8
OVERLAP_SAMPLE_SIZE = 1500

# Verification sampling
CONFORMALITY_SAMPLES = 1000
OFFSET_SAMPLES = 1000
HOPF_SAMPLES = 100
FD_STEP = 1e-5

CONFIG_SECTIONS = ("m", "n", "a", "b", "alpha", "beta", "grid", "tolerances", "basepoint", "minimal")


def load_run_config(path, tol_level=None):
    """
    Read a run configuration (SurfaceParams JSON plus optional grid, tolerances,
    basepoint and minimal sections) and return it with every default filled in.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    return resolve_run_config(raw, tol_level)


def resolve_run_config(raw, tol_level=None):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    unknown = sorted(set(raw) - set(CONFIG_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    level = tol_level or DEFAULT_TOL_LEVEL
    if level not in TOLERANCE_LADDERS:
        raise ConfigError(f"unknown tolerance level '{level}'")
    tolerances = dict(TOLERANCE_LADDERS[level])
    for key, value in (raw.get("tolerances") or {}).items():
        if key not in tolerances:
            raise ConfigError(f"unknown tolerance '{key}'")
        tolerances[key] = float(value)

    grid = dict(DEFAULT_GRID)
    for key, value in (raw.get("grid") or {}).items():
        if key not in grid:
            raise ConfigError(f"unknown grid setting '{key}'")
        grid[key] = value

    basepoint = raw.get("basepoint")
    if basepoint is not None:
        if not isinstance(basepoint, (list, tuple)) or len(basepoint) != 2:
            raise ConfigError("basepoint must be [re, im]")
        basepoint = complex(float(basepoint[0]), float(basepoint[1]))

    minimal = {"orientation": "vertical"}
    minimal.update(raw.get("minimal") or {})

    return {
        "params": {k: raw.get(k) for k in ("m", "n", "a", "b", "alpha", "beta")},
        "grid": grid,
        "tolerances": tolerances,
        "tol_level": level,
        "basepoint": basepoint,
        "minimal": minimal,
    }


@contextmanager
def active_tolerances(tolerances):
    """Run a block with `tolerances` (a resolved ladder) as config.TOL."""
    saved = dict(TOL)
    TOL.update(tolerances)
    try:
        yield TOL
    finally:
        TOL.clear()
        TOL.update(saved)
