"""
Doubly periodic minimal-surface data on the same curve w^2 = ...:

    vertical ends:    G = w, dh = dz/z,
                      (w1, w2, w3) = (1/2 (1/G - G) dh, i/2 (1/G + G) dh, dh)
    horizontal ends:  the rotated triple with (phi1, phi2, phi3) = (i w1, i w2, w3)

Periods are measured, never solved for.
"""
import math
from dataclasses import dataclass, field

import numpy as np

import config
from errors import ConfigError, NotClosedOnCurve, OrderingInfeasible, OrderingViolation
from integrator import integrate_segments, path_segments
from models import FormTriple, PathSpec, SurfaceParams
from utils import validators
from utils.audit_logger import get_logger
from weierstrass_core import _branch_w, _regular_w, end_value_w0, solve_end_coordinate

logger = get_logger("minimal_counterpart")

ORIENTATIONS = ("vertical", "horizontal")
QUOTIENT_ENDS = 4


@dataclass(frozen=True)
class MinimalData:
    params: SurfaceParams
    orientation: str = "vertical"

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ConfigError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")

    @property
    def genus(self):
        return self.params.m + self.params.n - 1

    def metadata(self):
        return {
            "orientation": self.orientation,
            "genus": self.genus,
            "quotient_ends": QUOTIENT_ENDS,
            "dh_poles": ["0", "inf"],
            "dh_zeros": [],
        }


@dataclass
class PeriodLattice:
    measured_loops: list = field(default_factory=list)

    @property
    def horizontal(self):
        return [entry["horizontal"] for entry in self.measured_loops]

    def to_dict(self):
        return {"measured_loops": self.measured_loops, "horizontal": self.horizontal}


# ------------------------------
# Forms
# ------------------------------
def _vertical(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.stack([0.5 * (1 / w - w) / z, 0.5j * (1 / w + w) / z, 1 / z * np.ones_like(w)])


def _horizontal(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.stack([0.5j * (1 / w + w) / z, 1 / z * np.ones_like(w), 0.5 * (1 / w - w) / z])


def form_for(d):
    return _vertical if d.orientation == "vertical" else _horizontal


def omega(z, d):
    """(w1, w2, w3) as coefficients of dz at a regular point."""
    w = _regular_w(complex(z), d.params)
    o1, o2, o3 = form_for(d)(z, w)
    return FormTriple(phi1=complex(o1), phi2=complex(o2), phi3=complex(o3))


def gauss_at_end(d):
    """G(0) on the principal sheet; w(0) for the vertical data."""
    return end_value_w0(d.params)


# ------------------------------
# Normalization
# ------------------------------
def b2n_normalize(p):
    """
    Re-solve b_2n so that w(0) = 1 (hence G(0) = 1); with canonical signs
    b_2n = prod(a_2k / a_2k-1) prod_{k<n}(b_2k-1 / b_2k) b_2n-1.
    """
    if p.n < 1:
        raise OrderingInfeasible("b_2n normalization needs n >= 1", constraint="n >= 1")
    name = f"b{2 * p.n}"
    a, b, value = solve_end_coordinate(p, name)
    try:
        validators.check_ordering(a, b)
    except OrderingViolation as e:
        raise OrderingInfeasible(
            f"solved {name} = {value:.12g} breaks the ordering: {e.message}",
            constraint=e.details.get("constraint"),
        )
    logger.debug("b2n_normalize: %s -> %.15g", name, value)
    return SurfaceParams(m=p.m, n=p.n, a=a, b=b, alpha=p.alpha, beta=p.beta)


# ------------------------------
# Periods
# ------------------------------
def measure_period(loop, d, tol=None):
    """
    Re of the closed-loop integral of the omega-triple. Crossing a singular
    interval moves to the other sheet (w -> -w); the loop has to come back to
    the sheet it started on. Returns (3-vector, error estimate).
    """
    if not isinstance(loop, PathSpec):
        loop = PathSpec(waypoints=tuple(loop))
    pts = [complex(z) for z in loop.waypoints]
    if pts[0] != pts[-1]:
        raise NotClosedOnCurve("loop does not return to its first waypoint")
    segments, sheet = path_segments(loop, d.params, track_sheets=True)
    if sheet != 1:
        raise NotClosedOnCurve("loop crosses the branch cuts an odd number of times")
    values, errors = integrate_segments(segments, d.params, tol, form=form_for(d))
    return values.sum(axis=0), float(errors.sum())


def residue_period(d):
    """Re(2 pi i Res_0) of the omega-triple, counterclockwise around z = 0."""
    w0 = float(np.real(_branch_w(0.0, d.params)))
    residues = form_for(d)(1.0, w0)
    return np.real(2j * math.pi * residues)


def _polygon(centre, rx, ry, points=64):
    t = 2 * math.pi * np.arange(points + 1) / points
    pts = centre + rx * np.cos(t) + 1j * ry * np.sin(t)
    pts[-1] = pts[0]
    return PathSpec(waypoints=tuple(complex(z) for z in pts))


def default_loops(p):
    """Handle loops around each singular interval, the end loop at 0 and a contractible loop."""
    pts = sorted(set(p.branch_points) | {0.0})
    loops = []
    for lo, hi, idx, _ in p.positive_intervals() + p.negative_intervals():
        i, k = pts.index(lo), pts.index(hi)
        gaps = [hi - lo]
        if i > 0:
            gaps.append(lo - pts[i - 1])
        if k < len(pts) - 1:
            gaps.append(pts[k + 1] - hi)
        rho = 0.25 * min(gaps)
        axis = "a" if lo > 0 else "b"
        label = f"handle {axis}{idx}"
        loops.append((label, _polygon(0.5 * (lo + hi), 0.5 * (hi - lo) + rho, rho)))
    r = 0.5 * p.inner_radius
    loops.append(("end 0", _polygon(0.0, r, r)))
    loops.append(("contractible", _polygon(1j * p.inner_radius, r, r)))
    return loops


def period_lattice(d, loops=None, tol=None):
    tol = tol or config.TOL["integrated"]
    lattice = PeriodLattice()
    for label, loop in loops or default_loops(d.params):
        vector, error = measure_period(loop, d)
        lattice.measured_loops.append({
            "loop": label,
            "vector": [float(x) for x in vector],
            "quad_error": error,
            "horizontal": bool(abs(vector[2]) <= tol),
        })
    return lattice


def counterpart_report(d, tol=None):
    """Metadata, G(0), the residue at the end and the measured lattice, ready for JSON."""
    lattice = period_lattice(d, tol=tol)
    return {
        **d.metadata(),
        "g_at_0": gauss_at_end(d),
        "residue_period_0": [float(x) for x in residue_period(d)],
        **lattice.to_dict(),
    }
