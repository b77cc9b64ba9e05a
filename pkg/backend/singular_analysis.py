"""
The singular set S(f) = {|G| = 1}: closed-form intervals on the real axis,
their numerical verification, non-degeneracy and cone direction.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

import config
from errors import AmbiguousDirection, DegenerateSingularity, NotOnHyperboloid, VerificationFailure
from integrator import apex, immersion, integrate_segments
from models import Segment, SingularComponent
from utils.audit_logger import get_logger
from weierstrass_core import INFINITY, _branch_w, _gauss_from_w, _w_squared, cone_is_up, log_derivative

logger = get_logger("singular_analysis")

APEX_SIDES = ("above", "below", "left", "right")


@dataclass
class ConeReport:
    component: SingularComponent
    apex: np.ndarray
    apex_error: float
    direction: str
    expected_direction: str
    reversed_convention_direction: str
    x3_gaps: tuple
    stable: bool
    endpoint_gauss: dict
    dg_over_gdh_samples: list = field(default_factory=list)
    nondegenerate: bool = True
    embedded_neighborhood_check: bool = True
    criteria: dict = field(default_factory=dict)

    @property
    def matches_expected(self):
        return self.direction == self.expected_direction

    @property
    def matches_reversed_convention(self):
        return self.direction == self.reversed_convention_direction

    @property
    def endpoint_gauss_ok(self):
        return all(abs(e["value"] - e["expected"]) <= 1e-8 for e in self.endpoint_gauss.values())

    def to_dict(self):
        return {
            "component": self.component.to_dict(),
            "apex": [float(x) for x in self.apex],
            "apex_error": self.apex_error,
            "direction": self.direction,
            "expected_direction": self.expected_direction,
            "reversed_convention_direction": self.reversed_convention_direction,
            "matches_expected": self.matches_expected,
            "matches_reversed_convention": self.matches_reversed_convention,
            "x3_gaps": [float(x) for x in self.x3_gaps],
            "stable": self.stable,
            "endpoint_gauss": self.endpoint_gauss,
            "endpoint_gauss_ok": self.endpoint_gauss_ok,
            "dg_over_gdh_samples": [float(x) for x in self.dg_over_gdh_samples],
            "nondegenerate": self.nondegenerate,
            "embedded_neighborhood_check": self.embedded_neighborhood_check,
            "criteria": self.criteria,
        }


def components(p):
    out = [SingularComponent(lo, hi, "positive", j, s) for lo, hi, j, s in p.positive_intervals()]
    out += [SingularComponent(lo, hi, "negative", k, s) for lo, hi, k, s in p.negative_intervals()]
    return out


def _in_closed_set(x, comps):
    x = np.asarray(x, dtype=float)
    inside = np.zeros(x.shape, dtype=bool)
    for c in comps:
        inside |= (x >= c.lo) & (x <= c.hi)
    return inside


def _abs_gauss(z, p):
    return np.abs(_gauss_from_w(_branch_w(z, p)))


# ------------------------------
# Singular set
# ------------------------------
def verify_singular_set(p, samples=None, tol=None):
    """
    Compares the closed-form intervals with the numerical locus ||G| - 1| <= tol:
    interior interval samples, a real-axis sweep and quasi-random off-set points.
    """
    samples = samples or config.OFFSET_SAMPLES
    tol = tol or 1e-10
    comps = components(p)

    interval_dev = 0.0
    for c in comps:
        xs = c.lo + c.length * np.linspace(0.0, 1.0, 11)
        interval_dev = max(interval_dev, float(np.max(np.abs(_abs_gauss(xs, p) - 1))))

    # real-axis sweep, 0 and branch points excluded
    span = 2.0 * p.outer_radius
    xs = np.concatenate([np.linspace(-span, -1e-9, samples), np.linspace(1e-9, span, samples)])
    xs = xs[~np.isin(xs, p.branch_points)]
    locus = np.abs(_abs_gauss(xs, p) - 1) <= tol
    mismatches = int(np.count_nonzero(locus != _in_closed_set(xs, comps)))

    # off-set points of C*, both half-planes
    halton = qmc.Halton(d=2, seed=0).random(samples)
    log_r = np.log(0.25 * p.inner_radius) + halton[:, 0] * np.log(16.0 * p.outer_radius / p.inner_radius)
    theta = -math.pi + 2 * math.pi * halton[:, 1]
    z = np.exp(log_r) * np.exp(1j * theta)
    z = z[np.abs(z.imag) > 1e-12]
    margin = _abs_gauss(z, p) - 1
    offset_hits = int(np.count_nonzero(margin <= tol))

    return {
        "components": len(comps),
        "interval_max_deviation": interval_dev,
        "real_axis_samples": int(xs.size),
        "real_axis_mismatches": mismatches,
        "offset_samples": int(z.size),
        "offset_hits": offset_hits,
        "offset_min_margin": float(np.min(margin)) if margin.size else None,
        "passed": interval_dev <= tol and mismatches == 0 and offset_hits == 0,
    }


def singular_set(p, verify=True):
    """The m + n closed intervals [a_2j-1, a_2j] and [b_2k, b_2k-1]."""
    comps = components(p)
    if verify:
        result = verify_singular_set(p)
        if not result["passed"]:
            raise VerificationFailure("numerical locus {|G| = 1} disagrees with the closed-form intervals", **result)
    return comps


# ------------------------------
# Non-degeneracy
# ------------------------------
def dg_over_gdh(x, p):
    """dG/(G dh) = -2 z L w^2 / (1 - w^2)^2, a function of w^2 only."""
    z = np.asarray(x, dtype=complex)
    w2 = _w_squared(z, p)
    return -2 * z * log_derivative(z, p) * w2 / (1 - w2) ** 2


def nondegeneracy(component, p, samples=None, threshold=1e-8):
    """Samples of dG/(G dh) inside the component; each must be real and nonzero."""
    if samples is None:
        samples = component.lo + component.length * np.linspace(0.0, 1.0, 9)[1:-1]
    values = np.atleast_1d(dg_over_gdh(np.asarray(samples, dtype=float), p))
    bad = (np.abs(values.imag) > 1e-8 * np.abs(values)) | (np.abs(values) < threshold)
    if np.any(bad):
        raise DegenerateSingularity(
            f"dG/(G dh) fails on {component.label}",
            samples=[[v.real, v.imag] for v in values],
        )
    return [float(v.real) for v in values]


def cone_criteria(component, p, samples=64):
    """
    G restricted to the component is injective into S^1, dh/G does not vanish,
    and w^2 maps the open interval one-to-one onto (-inf, 0).
    """
    xs = component.lo + component.length * (np.arange(1, samples + 1) - 0.5) / samples
    w2 = _w_squared(xs, p).real
    w = _branch_w(xs, p)
    G = _gauss_from_w(w)
    args = np.unwrap(np.angle(G))
    steps = np.diff(args)
    injective = bool(np.all(steps > 0) or np.all(steps < 0))
    dh_over_g = np.abs(-0.5 * (1 / w - w) / xs / G)
    dw2 = np.diff(w2)
    monotone = bool(np.all(dw2 > 0) or np.all(dw2 < 0))
    result = {
        "g_injective": injective,
        "dh_over_g_min": float(np.min(dh_over_g)),
        "w2_one_to_one": monotone,
        "w2_negative": bool(np.all(w2 < 0)),
    }
    result["passed"] = injective and result["dh_over_g_min"] > 0 and monotone and result["w2_negative"]
    if not monotone:
        logger.warning("w^2 is not one-to-one on %s", component.label)
    return result


# ------------------------------
# Embedded neighbourhood (proxy)
# ------------------------------
def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def _is_simple(poly):
    n = len(poly)
    for i in range(n):
        a1, a2 = poly[i], poly[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(a1, a2, poly[j], poly[(j + 1) % n]):
                return False
    return True


def _winding(poly, centre):
    angles = np.arctan2(poly[:, 1] - centre[1], poly[:, 0] - centre[0])
    total = np.sum(np.angle(np.exp(1j * np.diff(np.append(angles, angles[0])))))
    return int(round(total / (2 * math.pi)))


def _neighbour_gap(component, p):
    pts = sorted(set(p.branch_points) | {0.0})
    i, k = pts.index(component.lo), pts.index(component.hi)
    gaps = [component.length]
    if i > 0:
        gaps.append(component.lo - pts[i - 1])
    if k < len(pts) - 1:
        gaps.append(pts[k + 1] - component.hi)
    return min(gaps)


def embedded_neighborhood(component, p, rings=2, points=40, centre=None):
    """
    Images of closed curves around the component, projected to the x1x2-plane,
    must be simple and wind once around the apex projection. A finite proxy only.
    """
    if centre is None:
        centre = apex(component, "above", p)[0]
    target = centre[1]
    mid = 0.5 * (component.lo + component.hi)
    findings = []
    for k in range(rings):
        rho = 0.25 * _neighbour_gap(component, p) / 2 ** k
        t = 2 * math.pi * np.arange(points) / points
        height = rho * np.sin(t)
        # t = 0 and t = pi sit exactly on the real axis
        height[np.abs(height) < 1e-12 * rho] = 0.0
        zs = mid + (0.5 * component.length + rho) * np.cos(t) + 1j * height
        poly = np.array([immersion(z, p).f for z in zs])
        poly[:, 1] -= 2 * math.pi * np.round((poly[:, 1] - target) / (2 * math.pi))
        planar = poly[:, :2]
        findings.append({
            "radius": rho,
            "simple": _is_simple(planar),
            "winding": _winding(planar, centre[:2]),
        })
    passed = all(f["simple"] and abs(f["winding"]) == 1 for f in findings)
    return {"proxy": True, "rings": findings, "passed": passed}


# ------------------------------
# Apex coincidence
# ------------------------------
def apex_coincidence(component, p, basepoint=None):
    """Apex from the four sides and at two interior points; all must agree."""
    limits = {}
    errors = {}
    for side in APEX_SIDES:
        limits[side], errors[side] = apex(component, side, p, basepoint)
    for frac in (1 / 3, 2 / 3):
        key = f"above@{frac:.3f}"
        limits[key], errors[key] = apex(component, "above", p, basepoint, at=component.lo + frac * component.length)
    stack = np.array(list(limits.values()))
    spread = float(np.max(np.ptp(stack, axis=0)))
    tol = config.TOL["mesh"]
    return {
        "component": component.label,
        "apex": [float(x) for x in limits["above"]],
        "limits": {k: [float(x) for x in v] for k, v in limits.items()},
        "extrapolation_error": max(errors.values()),
        "spread": spread,
        "tolerance": tol,
        "passed": spread <= tol,
    }


# ------------------------------
# Direction
# ------------------------------
def _x3_gaps(component, p, eps):
    """apex_x3 - f3 at lo - eps and hi + eps, from pinned real-axis integrals."""
    segments = [
        Segment(complex(component.lo - eps), complex(component.lo), pinned="end"),
        Segment(complex(component.hi + eps), complex(component.hi), pinned="end"),
    ]
    values, _ = integrate_segments(segments, p)
    return float(values[0, 2]), float(values[1, 2])


def _direction(gaps, tol):
    if all(g > tol for g in gaps):
        return "up"
    if all(g < -tol for g in gaps):
        return "down"
    return None


def endpoint_gauss(component, p):
    """G at both endpoints with the values expected from the sign alpha_j / beta_k."""
    s = component.sign
    if component.axis == "positive":
        j = component.index
        expected = {f"a{2 * j - 1}": (component.lo, -s), f"a{2 * j}": (component.hi, s)}
    else:
        k = component.index
        expected = {f"b{2 * k - 1}": (component.hi, s), f"b{2 * k}": (component.lo, -s)}
    out = {}
    for name, (x, value) in expected.items():
        G = complex(_gauss_from_w(_branch_w(x, p)))
        out[name] = {"value": G.real, "imag": G.imag, "expected": float(value)}
    return out


def classify_cone(component, p, eps=None, basepoint=None, neighborhood=True):
    """
    Up when the apex is strictly higher in x3 than the real-axis points just
    outside both endpoints, down when strictly lower. Re-checked at eps/10.
    """
    tol = config.TOL["integrated"]
    eps = eps or 1e-2 * _neighbour_gap(component, p)
    gaps = _x3_gaps(component, p, eps)
    direction = _direction(gaps, tol)
    if direction is None:
        raise AmbiguousDirection(
            f"x3 differences at {component.label} are below tolerance or disagree",
            gaps=list(gaps),
        )
    fine = _direction(_x3_gaps(component, p, eps / 10), tol)

    centre, centre_err = apex(component, "above", p, basepoint)
    try:
        samples, nondegenerate = nondegeneracy(component, p), True
    except DegenerateSingularity as e:
        samples, nondegenerate = [s[0] for s in e.details["samples"]], False

    up = cone_is_up(component.axis, component.sign)
    report = ConeReport(
        component=component,
        apex=centre,
        apex_error=centre_err,
        direction=direction,
        expected_direction="up" if up else "down",
        reversed_convention_direction="down" if up else "up",
        x3_gaps=gaps,
        stable=fine == direction,
        endpoint_gauss=endpoint_gauss(component, p),
        dg_over_gdh_samples=samples,
        nondegenerate=nondegenerate,
        criteria=cone_criteria(component, p),
    )
    if neighborhood and basepoint is None:
        report.embedded_neighborhood_check = embedded_neighborhood(component, p, centre=centre)["passed"]
    logger.info("%s points %s (gaps %.3g, %.3g)", component.label, direction, *gaps)
    return report


# ------------------------------
# Gauss map on H^2
# ------------------------------
def stereographic(x, tol=1e-9):
    """sigma(x) = (x1 + i x2)/(1 - x3) on H^2 = {<x, x> = -1}."""
    x1, x2, x3 = (float(c) for c in x)
    lorentz = x1 * x1 + x2 * x2 - x3 * x3
    if abs(lorentz + 1) > tol * max(1.0, x3 * x3):
        raise NotOnHyperboloid(f"<x, x> = {lorentz}, expected -1")
    if x3 == 1:
        return INFINITY
    return complex(x1, x2) / (1 - x3)
