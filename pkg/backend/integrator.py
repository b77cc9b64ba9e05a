"""
f(z) = Re int_{z0}^{z} (phi1, phi2, phi3) by contour integration on C*.

Paths are built from Segment pieces: circular arcs centred at 0 and straight
lines. A line that ends on a branch point is "pinned" there and integrated in
the variable t with z = c + t^2, which turns the square-root singularity of w
or 1/w into an analytic integrand. Every segment is tried with a batched
Gauss-Legendre pair first and falls back to scipy's adaptive quad_vec.
"""
import math
from dataclasses import replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad_vec

import config
from errors import NonConvergent, PathThroughSingularity, QuadratureFailure
from models import ImmersionSample, PathSpec, PeriodVector, Segment
from utils import validators
from utils.audit_logger import get_logger
from weierstrass_core import _branch_w, _phi_from_w, end_value_w0

logger = get_logger("integrator")

# |Im z| / |z| below this counts as lying on the real axis
AXIS_SNAP = 1e-12


# ------------------------------
# Quadrature on segments
# ------------------------------
@lru_cache(maxsize=8)
def _gauss_rule(n):
    x, wt = leggauss(n)
    return (x + 1) / 2, wt / 2


def _nodes(seg, t):
    """z(t) and dz/dt for t in [0, 1]."""
    t = np.asarray(t, dtype=float)
    if seg.kind == "arc":
        span = seg.theta1 - seg.theta0
        z = seg.radius * np.exp(1j * (seg.theta0 + span * t))
        return z, 1j * span * z
    d = seg.end - seg.start
    if seg.pinned == "start":
        return seg.start + d * t ** 2, 2 * d * t
    if seg.pinned == "end":
        u = 1 - t
        return seg.end - d * u ** 2, 2 * d * u
    return seg.start + d * t, d * np.ones_like(t)


def _integrand(seg, t, p, form):
    z, dz = _nodes(seg, t)
    w = seg.sheet * _branch_w(z, p)
    return (form(z, w) * dz).real


def _adaptive(seg, p, tol, form):
    res, err, info = quad_vec(
        lambda t: _integrand(seg, t, p, form),
        0.0,
        1.0,
        epsabs=tol,
        epsrel=1e-13,
        limit=config.MAX_SUBDIVISIONS,
        full_output=True,
    )
    if info.status != 0 or not np.all(np.isfinite(res)):
        raise QuadratureFailure(
            f"segment {seg.start:.6g} -> {seg.end:.6g} ({seg.kind}) did not converge",
            status=int(info.status),
            error=float(err),
        )
    return np.asarray(res, dtype=float), float(err)


def integrate_segments(segments, p, tol=None, form=None):
    """
    Integrate every segment; returns (values (N, 3), error estimates (N,)).
    form(z, w) -> stacked (3, ...) coefficients of dz, defaults to the phi-triple.
    """
    tol = tol or config.TOL["segment"]
    form = form or _phi_from_w
    count = len(segments)
    values = np.zeros((count, 3))
    errors = np.zeros(count)
    if count == 0:
        return values, errors

    t_hi, wt_hi = _gauss_rule(config.GAUSS_NODES)
    t_lo, wt_lo = _gauss_rule(config.GAUSS_NODES // 2)
    t_all = np.concatenate([t_hi, t_lo])
    z = np.empty((count, t_all.size), dtype=complex)
    dz = np.empty_like(z)
    sheets = np.empty(count)
    for i, seg in enumerate(segments):
        z[i], dz[i] = _nodes(seg, t_all)
        sheets[i] = seg.sheet

    with np.errstate(all="ignore"):
        w = sheets[:, None] * _branch_w(z, p)
        f = (form(z, w) * dz).real
    hi = f[:, :, : t_hi.size] @ wt_hi
    lo = f[:, :, t_hi.size:] @ wt_lo
    values[:] = hi.T
    errors[:] = np.max(np.abs(hi - lo), axis=0)

    retry = ~np.isfinite(errors) | (errors > tol)
    for i in np.flatnonzero(retry):
        logger.debug("adaptive fallback on segment %d (%s)", i, segments[i].kind)
        values[i], errors[i] = _adaptive(segments[i], p, tol, form)
    return values, errors


# ------------------------------
# Routing
# ------------------------------
def arc_radius(p):
    return p.outer_radius + 1.0


def default_basepoint(p):
    return complex(p.a[-1] + 1.0, 0.0)


def angle(z):
    """Arg z in (-pi, pi]; points of the negative real axis get pi."""
    z = complex(z)
    if z.imag == 0 and z.real < 0:
        return math.pi
    return math.atan2(z.imag, z.real)


def _line(start, end, branch):
    s_pin, e_pin = start in branch, end in branch
    if s_pin and e_pin:
        mid = (start + end) / 2
        return [Segment(start, mid, pinned="start"), Segment(mid, end, pinned="end")]
    if s_pin:
        return [Segment(start, end, pinned="start")]
    if e_pin:
        return [Segment(start, end, pinned="end")]
    return [Segment(start, end)]


def real_axis_chain(r_from, r_to, direction, p):
    """Segments along the ray direction*[0, inf) from radius r_from to r_to, cut at branch points."""
    x0, x1 = direction * r_from, direction * r_to
    lo, hi = min(x0, x1), max(x0, x1)
    cuts = sorted((c for c in p.branch_points if lo < c < hi), reverse=x1 < x0)
    nodes = [x0] + cuts + [x1]
    branch = set(p.branch_points)
    segments = []
    for s, e in zip(nodes, nodes[1:]):
        if s != e:
            segments += [
                Segment(complex(g.start), complex(g.end), pinned=g.pinned)
                for g in _line(s, e, branch)
            ]
    return segments


def radial_step(r_from, r_to, theta, p):
    if theta == 0:
        return real_axis_chain(r_from, r_to, 1.0, p)
    if abs(theta) == math.pi:
        return real_axis_chain(r_from, r_to, -1.0, p)
    ray = np.exp(1j * theta)
    return [Segment(r_from * ray, r_to * ray)]


def _route_angle(z):
    """Arg z, snapped to 0 or +-pi when z is within round-off of the real axis."""
    if abs(z.imag) > AXIS_SNAP * abs(z):
        return angle(z)
    if z.real > 0:
        return 0.0
    return -math.pi if z.imag < 0 else math.pi


def route(z, p):
    """
    Segments from R_arc (on the positive real axis) to z: an arc of |z| = R_arc
    to Arg z, then radially to z. Real-axis legs are cut at branch points; a
    point a round-off away from the axis is reached along the axis itself.
    """
    z = complex(z)
    if z == 0:
        raise PathThroughSingularity("z = 0 is an end of the surface")
    R = arc_radius(p)
    theta = _route_angle(z)
    segments = []
    if theta != 0:
        segments.append(Segment(complex(R), R * np.exp(1j * theta), kind="arc", radius=R, theta0=0.0, theta1=theta))
    if abs(z) != R:
        segments += radial_step(R, abs(z), theta, p)
    return segments


def _from_arc(z, p, tol):
    values, errors = integrate_segments(route(z, p), p, tol)
    return values.sum(axis=0), float(errors.sum())


@lru_cache(maxsize=64)
def _base_offset(p, basepoint, tol):
    return _from_arc(basepoint, p, tol)


def _check_regular(z, p, what):
    if z == 0 or (z.imag == 0 and z.real in p.branch_points):
        raise PathThroughSingularity(f"{what} {z} is not a regular point of C*")


def immersion(z, p, basepoint=None, tol=None):
    """f(z) with f(basepoint) = 0; basepoint defaults to a_2m + 1."""
    tol = tol or config.TOL["segment"]
    z = complex(z)
    basepoint = default_basepoint(p) if basepoint is None else complex(basepoint)
    _check_regular(basepoint, p, "basepoint")
    if z == 0:
        raise PathThroughSingularity("z = 0 is an end of the surface")
    if z == basepoint:
        return ImmersionSample(z=z, f=np.zeros(3), quad_error=0.0)
    base, base_err = _base_offset(p, basepoint, tol)
    value, err = _from_arc(z, p, tol)
    return ImmersionSample(z=z, f=value - base, quad_error=err + base_err)


def immersion_grid(radii, thetas, p, basepoint=None, tol=None):
    """
    f on the polar grid radii x thetas (both ascending, thetas in [0, pi]) in one
    batched pass; returns (f (len(thetas), len(radii), 3), errors of the same grid).
    """
    tol = tol or config.TOL["segment"]
    radii = [float(r) for r in radii]
    thetas = [float(t) for t in thetas]
    R = arc_radius(p)

    segments, owners = [], []
    prev = 0.0
    for j, th in enumerate(thetas):
        if th != prev:
            segments.append(Segment(R * np.exp(1j * prev), R * np.exp(1j * th), kind="arc", radius=R, theta0=prev, theta1=th))
            owners.append(("arc", j))
        prev = th

    outward = [i for i, r in enumerate(radii) if r > R]
    inward = [i for i, r in reversed(list(enumerate(radii))) if r < R]
    for j, th in enumerate(thetas):
        for chain in (outward, inward):
            r_prev = R
            for i in chain:
                for seg in radial_step(r_prev, radii[i], th, p):
                    segments.append(seg)
                    owners.append(("step", j, i))
                r_prev = radii[i]

    values, errors = integrate_segments(segments, p, tol)

    arc_val = np.zeros((len(thetas), 3))
    arc_err = np.zeros(len(thetas))
    step_val = np.zeros((len(thetas), len(radii), 3))
    step_err = np.zeros((len(thetas), len(radii)))
    for owner, v, e in zip(owners, values, errors):
        if owner[0] == "arc":
            arc_val[owner[1]] += v
            arc_err[owner[1]] += e
        else:
            step_val[owner[1], owner[2]] += v
            step_err[owner[1], owner[2]] += e
    arc_val = np.cumsum(arc_val, axis=0)
    arc_err = np.cumsum(arc_err)

    f = np.zeros((len(thetas), len(radii), 3))
    err = np.zeros((len(thetas), len(radii)))
    for chain in (outward, inward):
        if chain:
            idx = np.array(chain)
            f[:, idx] = np.cumsum(step_val[:, idx], axis=1)
            err[:, idx] = np.cumsum(step_err[:, idx], axis=1)
    f += arc_val[:, None, :]
    err += arc_err[:, None]

    basepoint = default_basepoint(p) if basepoint is None else complex(basepoint)
    _check_regular(basepoint, p, "basepoint")
    base, base_err = _base_offset(p, basepoint, tol)
    return f - base, err + base_err


# ------------------------------
# User paths
# ------------------------------
def _cut_crossing(s, e, p):
    """Real point where s -> e crosses the real axis transversally inside a singular interval."""
    if s.imag == 0 or e.imag == 0 or (s.imag > 0) == (e.imag > 0):
        return None
    t = s.imag / (s.imag - e.imag)
    x = s.real + t * (e.real - s.real)
    for lo, hi, _, _ in p.positive_intervals() + p.negative_intervals():
        if lo <= x <= hi:
            return complex(x, 0.0)
    return None


def _on_singular_set(z, p):
    if z.imag != 0:
        return False
    return any(lo <= z.real <= hi for lo, hi, _, _ in p.positive_intervals() + p.negative_intervals())


def path_segments(path, p, track_sheets=False):
    """
    Segments of a waypoint path. With track_sheets the path may cross singular
    intervals: w changes sign at each crossing. Returns (segments, final sheet).
    """
    pts = [complex(z) for z in path.waypoints]
    if len(pts) < 2:
        raise PathThroughSingularity("a path needs at least two waypoints")
    radius = path.avoidance_radius or config.AVOIDANCE_FACTOR * p.min_gap
    branch = set(p.branch_points)
    hazards = [0j] + [complex(c) for c in p.branch_points]

    for k, z in enumerate(pts):
        interior = 0 < k < len(pts) - 1
        if z == 0:
            raise PathThroughSingularity("waypoint at z = 0")
        if interior:
            if min(abs(z - h) for h in hazards) < radius:
                raise PathThroughSingularity(f"waypoint {z} within {radius:.3g} of a branch point or 0")
            if _on_singular_set(z, p):
                raise PathThroughSingularity(f"waypoint {z} lies on a singular interval")

    segments, sheet = [], 1
    for k, (s, e) in enumerate(zip(pts, pts[1:])):
        if s == e:
            raise PathThroughSingularity(f"consecutive waypoints coincide at {s}")
        for h in hazards:
            if h in (s, e):
                continue
            if validators.segment_distance(s, e, h) < radius:
                raise PathThroughSingularity(f"segment {s} -> {e} passes within {radius:.3g} of {h}")
        crossing = _cut_crossing(s, e, p)
        if crossing is not None:
            if not track_sheets:
                raise PathThroughSingularity(f"segment {s} -> {e} crosses the singular set at {crossing.real:.6g}")
            pieces = [(s, crossing, sheet), (crossing, e, -sheet)]
            sheet = -sheet
        else:
            pieces = [(s, e, sheet)]
        for a, b, sh in pieces:
            segments += [replace(seg, sheet=sh) for seg in _line(a, b, branch)]
    return segments, sheet


def integrate_path(path, p, tol=None):
    """Re int over the path; returns (3-vector, error estimate)."""
    if not isinstance(path, PathSpec):
        path = PathSpec(waypoints=tuple(path))
    segments, _ = path_segments(path, p)
    values, errors = integrate_segments(segments, p, tol)
    return values.sum(axis=0), float(errors.sum())


# ------------------------------
# Periods at the ends
# ------------------------------
def circle(radius, clockwise=False, pieces=8):
    step = (-2 if clockwise else 2) * math.pi / pieces
    return [
        Segment(radius * np.exp(1j * k * step), radius * np.exp(1j * (k + 1) * step), kind="arc",
                radius=radius, theta0=k * step, theta1=(k + 1) * step)
        for k in range(pieces)
    ]


def loop_period(center, p, tol=None, form=None):
    """
    Re of the integral over a circle around the end z = 0 (counterclockwise) or
    z = infinity (clockwise in the plane).
    """
    if center in (0, "0"):
        segments, label = circle(0.5 * p.inner_radius), "0"
    elif center in ("inf", "infinity", math.inf):
        segments, label = circle(2.0 * p.outer_radius, clockwise=True), "inf"
    else:
        raise ValueError(f"loop center must be 0 or 'inf', got {center!r}")
    values, errors = integrate_segments(segments, p, tol, form)
    return PeriodVector(v=values.sum(axis=0), loop_center=label, quad_error=float(errors.sum()))


# ------------------------------
# Limits at singular intervals
# ------------------------------
def _extrapolate(h, values):
    """Limit at h = 0 of values ~ c0 + c1 h + c2 h^3 (sqrt scale) or c0 + c1 h + c2 h^2."""
    return np.linalg.solve(h, values)[0]


def apex(component, side, p, basepoint=None, eps=None, at=None, tol=None):
    """
    Limit of f approaching `component` from one side ("above", "below", "left",
    "right"). Returns (3-vector, extrapolation error estimate).
    Left/right approach along the real axis in sqrt(distance); above/below at the
    point `at` (default the midpoint) in the distance itself.

    APEX_LEVELS + 1 samples at halving distances: the limit is the fit through
    the finest APEX_LEVELS of them and the error is its unscaled change from the
    fit through the coarsest APEX_LEVELS.
    """
    tol = tol or config.TOL["mesh"]
    lo, hi = component.lo, component.hi
    axial = side in ("left", "right")
    factor = config.APEX_AXIS_EPS_FACTOR if axial else config.APEX_EPS_FACTOR
    eps0 = eps or factor * (hi - lo)
    levels = eps0 / 2.0 ** np.arange(config.APEX_LEVELS + 1)
    x = (lo + hi) / 2 if at is None else float(at)

    if side == "above":
        points, h = [complex(x, d) for d in levels], levels
        design = np.vander(h, config.APEX_LEVELS, increasing=True)
    elif side == "below":
        points, h = [complex(x, -d) for d in levels], levels
        design = np.vander(h, config.APEX_LEVELS, increasing=True)
    elif axial:
        points = [complex(lo - d if side == "left" else hi + d, 0.0) for d in levels]
        h = np.sqrt(levels)
        # only odd powers of sqrt(distance) occur next to a branch point
        design = np.column_stack([np.ones_like(h), h, h ** 3])
    else:
        raise ValueError(f"unknown approach side '{side}'")

    values = np.array([immersion(z, p, basepoint, tol=config.TOL["segment"]).f for z in points])
    if side == "below":
        base = default_basepoint(p) if basepoint is None else complex(basepoint)
        target = -angle(complex(x, 0.0)) + angle(base)
        values[:, 1] -= 2 * math.pi * np.round((values[:, 1] - target) / (2 * math.pi))

    limit = _extrapolate(design[1:], values[1:])
    previous = _extrapolate(design[:-1], values[:-1])
    error = float(np.max(np.abs(limit - previous)))
    if not np.all(np.isfinite(limit)) or error > tol:
        raise NonConvergent(
            f"apex of {component.label} from {side} did not settle (residual {error:.3g})",
            residual=error,
        )
    return limit, error


# ------------------------------
# End at z = 0
# ------------------------------
def end_tilt(p, tol=None):
    """
    Slope of x3 against log r as r -> 0 along the positive real axis.
    Closed form (1/w0 - w0)/2: positive means x3 -> -inf at the end (it goes down).
    """
    tol = tol or config.TOL["integrated"]
    w0 = end_value_w0(p)
    closed = 0.5 * (1 / w0 - w0)
    r1, r2 = 1e-3 * p.inner_radius, 1e-4 * p.inner_radius
    f1 = immersion(r1, p).f[2]
    f2 = immersion(r2, p).f[2]
    numeric = (f1 - f2) / (math.log(r1) - math.log(r2))
    if abs(closed) <= tol:
        direction = "horizontal"
    else:
        direction = "down" if closed > 0 else "up"
    return {
        "w0": w0,
        "slope_closed_form": closed,
        "slope_numeric": float(numeric),
        "direction": direction,
    }
