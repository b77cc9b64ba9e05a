"""
Algebraic layer of the Weierstrass data on C* = C \\ {0}:

    w^2 = prod_k ((z - a_2k)/(z - a_2k-1))^alpha_k * prod_k ((z - b_2k-1)/(z - b_2k))^beta_k
    G   = (1 + w)/(1 - w),     dh = -(1/w - w) dz / (2z)
    (phi1, phi2, phi3) = (-(1/w + w)/(2z), i/z, (1/w - w)/(2z)) dz

w is always the root with Re w >= 0 (Im w >= 0 on ties). Array helpers prefixed
with an underscore work elementwise on numpy arrays; the public functions take
one point and return the model types.
"""
import json
import math

import numpy as np

from errors import (
    BranchPointEvaluation,
    DegenerateGauss,
    Infeasible,
    LengthMismatch,
    OrderingViolation,
)
from models import BranchedValue, FormTriple, GaussValue, SurfaceParams
from utils import validators
from utils.audit_logger import get_logger

logger = get_logger("weierstrass_core")

INFINITY = complex(math.inf, 0.0)


def is_infinite(v):
    v = np.asarray(v)
    return np.isinf(v.real) | np.isinf(v.imag)


# ------------------------------
# Parameters
# ------------------------------
def validate_params(raw):
    """Check lengths, sign domain and strict ordering; returns SurfaceParams."""
    if isinstance(raw, SurfaceParams):
        raw = raw.to_dict()
    if not isinstance(raw, dict):
        raise LengthMismatch("parameters must be a mapping")

    m = validators.require_int("m", raw.get("m"), 1)
    n = validators.require_int("n", raw.get("n", 0), 0)
    a = validators.require_reals("a", raw.get("a"), 2 * m)
    b = validators.require_reals("b", raw.get("b"), 2 * n)
    alpha = validators.require_signs("alpha", raw.get("alpha"), m)
    beta = validators.require_signs("beta", raw.get("beta"), n)
    validators.check_ordering(a, b)
    return SurfaceParams(m=m, n=n, a=a, b=b, alpha=alpha, beta=beta)


def params_to_json(p):
    return json.dumps(p.to_dict(), indent=2)


def params_from_json(text):
    return validate_params(json.loads(text))


# ------------------------------
# w^2 and the branch of w
# ------------------------------
def _factors(p):
    """(numerator root, denominator root) per factor, sign already applied."""
    out = []
    for j, s in enumerate(p.alpha):
        top, bottom = p.a[2 * j + 1], p.a[2 * j]
        out.append((top, bottom) if s > 0 else (bottom, top))
    for k, s in enumerate(p.beta):
        top, bottom = p.b[2 * k], p.b[2 * k + 1]
        out.append((top, bottom) if s > 0 else (bottom, top))
    return out


def _w_squared(z, p):
    z = np.asarray(z, dtype=complex)
    num = np.ones_like(z)
    den = np.ones_like(z)
    for top, bottom in _factors(p):
        num = num * (z - top)
        den = den * (z - bottom)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = num / den
    value = np.where(den == 0, INFINITY, value)
    return np.where(is_infinite(z), 1.0 + 0j, value)


def select_branch(w2):
    """Square root with Re w >= 0; Im w >= 0 when Re w = 0. Infinity stays infinite."""
    w2 = np.asarray(w2, dtype=complex)
    with np.errstate(invalid="ignore"):
        w = np.sqrt(w2)
    w = np.where((w.real == 0) & (w.imag < 0), -w, w)
    return np.where(is_infinite(w2), INFINITY, w)


def _branch_w(z, p):
    return select_branch(_w_squared(z, p))


def w_squared(z, p):
    """Rational product at z; INFINITY at denominator roots, 1 at z = infinity."""
    return complex(_w_squared(z, p))


def branch_w(z, p):
    return BranchedValue(z=complex(z), w=complex(_branch_w(z, p)))


def end_value_w0(p):
    """w(0) > 0; the end at z = 0 is horizontal iff this equals 1."""
    return math.sqrt(_w_squared(0.0, p).real)


def log_derivative(z, p):
    """d log(w^2)/dz, branch free."""
    z = np.asarray(z, dtype=complex)
    total = np.zeros_like(z)
    for top, bottom in _factors(p):
        total = total + 1.0 / (z - top) - 1.0 / (z - bottom)
    return total


# ------------------------------
# Gauss map
# ------------------------------
def _gauss_from_w(w):
    w = np.asarray(w, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (1 + w) / (1 - w)
    G = np.where(w == 1, INFINITY, G)
    return np.where(is_infinite(w), -1.0 + 0j, G)


def _normal_from_gauss(G):
    """Euclidean-normalized normal; third component is positive exactly when |G| > 1."""
    G = np.asarray(G, dtype=complex)
    inf = is_infinite(G)
    Gs = np.where(inf, 0j, G)
    mod2 = np.abs(Gs) ** 2
    norm = np.sqrt(mod2 ** 2 + 6 * mod2 + 1)
    sign = np.where(mod2 < 1 - 1e-12, -1.0, 1.0)
    nu = np.stack([-2 * Gs.real, -2 * Gs.imag, mod2 + 1]) * (sign / norm)
    nu[0] = np.where(inf, 0.0, nu[0])
    nu[1] = np.where(inf, 0.0, nu[1])
    nu[2] = np.where(inf, 1.0, nu[2])
    return nu


def gauss_from_w(w):
    G = complex(_gauss_from_w(w))
    return GaussValue(G=G, nu=tuple(float(x) for x in _normal_from_gauss(G)))


def gauss(z, p):
    return gauss_from_w(_branch_w(z, p))


def gauss_derivative(z, p):
    """dG/dz = w L / (1 - w)^2 with L = d log(w^2)/dz."""
    w = complex(_branch_w(z, p))
    if is_infinite(w) or w == 0:
        raise BranchPointEvaluation(f"dG/dz is singular at the branch point z = {z}")
    if w == 1:
        raise DegenerateGauss(f"G is infinite at z = {z}")
    return complex(w * log_derivative(z, p) / (1 - w) ** 2)


def hyperboloid_normal(G):
    """Inverse of stereographic: the point of H^2 over G (|G| != 1)."""
    G = complex(G)
    if is_infinite(G):
        return np.array([0.0, 0.0, 1.0])
    mod2 = abs(G) ** 2
    if mod2 == 1:
        raise DegenerateGauss("|G| = 1 has no point on H^2")
    return np.array([-2 * G.real, -2 * G.imag, mod2 + 1]) / (mod2 - 1)


# ------------------------------
# Forms, metric, Hopf differential
# ------------------------------
def _phi_from_w(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    plus = (1 / w + w) / z
    minus = (1 / w - w) / z
    return np.stack([-0.5 * plus, 1j / z, 0.5 * minus])


def _phi(z, p):
    return _phi_from_w(z, _branch_w(z, p))


def _regular_w(z, p):
    w = complex(_branch_w(z, p))
    if z == 0:
        raise BranchPointEvaluation("z = 0 is an end, not a point of C*")
    if is_infinite(w) or w == 0:
        raise BranchPointEvaluation(f"forms have a square-root singularity at z = {z}")
    return w


def phi(z, p):
    w = _regular_w(z, p)
    f1, f2, f3 = _phi_from_w(z, w)
    return FormTriple(phi1=complex(f1), phi2=complex(f2), phi3=complex(f3))


def conformality_residual(triple):
    v = triple.as_array()
    scale = np.sum(np.abs(v) ** 2)
    return abs(v[0] ** 2 + v[1] ** 2 - v[2] ** 2) / scale


def metric_from_forms(triple):
    """ds^2 / |dz|^2 = (|phi1|^2 + |phi2|^2 - |phi3|^2)/2."""
    return 0.5 * (abs(triple.phi1) ** 2 + abs(triple.phi2) ** 2 - abs(triple.phi3) ** 2)


def metric_factor(z, p):
    w = _regular_w(z, p)
    G = complex(_gauss_from_w(w))
    if is_infinite(G) or G == 0:
        return max(0.0, metric_from_forms(phi(z, p)))
    dh = -0.5 * (1 / w - w) / z
    return (1 / abs(G) - abs(G)) ** 2 * abs(dh) ** 2 / 4


def hopf(z, p):
    """Coefficient of Q = dG dh / G with respect to dz^2."""
    w = _regular_w(z, p)
    G = complex(_gauss_from_w(w))
    if is_infinite(G) or G == 0:
        raise DegenerateGauss(f"G = {G} at z = {z}")
    dh = -0.5 * (1 / w - w) / z
    return gauss_derivative(z, p) * dh / G


# ------------------------------
# Horizontal end
# ------------------------------
def cone_is_up(axis, sign):
    """Cone convention: positive axis up iff alpha = -1, negative axis up iff beta = +1."""
    return sign < 0 if axis == "positive" else sign > 0


def _coordinate_exponents(p):
    """w(0)^2 = prod |c|^e over all branch coordinates."""
    out = {}
    for j, s in enumerate(p.alpha):
        out[f"a{2 * j + 2}"] = s
        out[f"a{2 * j + 1}"] = -s
    for k, s in enumerate(p.beta):
        out[f"b{2 * k + 1}"] = s
        out[f"b{2 * k + 2}"] = -s
    return out


def _coordinate(p, name):
    seq = p.a if name[0] == "a" else p.b
    return seq[int(name[1:]) - 1]


def solve_end_coordinate(p, free_index):
    """
    Closed-form value of one coordinate making w(0) = 1, all others fixed.
    Returns (a, b, value) with the coordinate replaced; ordering is not checked.
    """
    exps = _coordinate_exponents(p)
    if free_index not in exps:
        raise Infeasible(f"unknown coordinate '{free_index}'", constraint="free_index")

    rest = 1.0
    for name, e in exps.items():
        if name != free_index:
            rest *= abs(_coordinate(p, name)) ** e
    magnitude = rest ** (-exps[free_index])
    value = magnitude if free_index[0] == "a" else -magnitude

    a, b = list(p.a), list(p.b)
    (a if free_index[0] == "a" else b)[int(free_index[1:]) - 1] = value
    return tuple(a), tuple(b), value


def normalize_horizontal_end(p, free_index=None):
    """
    Re-solve one coordinate (e.g. "b2", "a3") in closed form so that w(0) = 1.
    Defaults to the outermost negative point, or a_2m when n = 0.
    """
    dirs = [cone_is_up("positive", s) for s in p.alpha] + [cone_is_up("negative", s) for s in p.beta]
    if all(dirs) or not any(dirs):
        raise Infeasible(
            "all cone-like singularities point in the same direction; the end z = 0 cannot be horizontal",
            constraint="mixed directions",
        )

    if free_index is None:
        free_index = f"b{2 * p.n}" if p.n else f"a{2 * p.m}"
    a, b, value = solve_end_coordinate(p, free_index)
    try:
        validators.check_ordering(a, b)
    except OrderingViolation as e:
        raise Infeasible(
            f"solved {free_index} = {value:.12g} breaks the ordering: {e.message}",
            constraint=e.details.get("constraint"),
        )
    logger.debug("normalized %s -> %.15g", free_index, value)
    return SurfaceParams(m=p.m, n=p.n, a=a, b=b, alpha=p.alpha, beta=p.beta)
