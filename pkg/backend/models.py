from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SurfaceParams:
    """
    Parameter vector of one surface.
    a: a_1 < ... < a_2m (positive), b: b_1 > ... > b_2n (negative),
    alpha / beta: one sign per positive / negative interval.
    """
    m: int
    n: int
    a: tuple
    b: tuple
    alpha: tuple
    beta: tuple

    def positive_intervals(self):
        # (lo, hi, index, sign) with index 1-based as j in [a_{2j-1}, a_{2j}]
        return [(self.a[2 * j], self.a[2 * j + 1], j + 1, self.alpha[j]) for j in range(self.m)]

    def negative_intervals(self):
        # [b_{2k}, b_{2k-1}], lo is the more negative end
        return [(self.b[2 * k + 1], self.b[2 * k], k + 1, self.beta[k]) for k in range(self.n)]

    @property
    def branch_points(self):
        return tuple(sorted(self.a + self.b))

    @property
    def zeros(self):
        """Points where w^2 vanishes."""
        out = []
        for j, s in enumerate(self.alpha):
            out.append(self.a[2 * j + 1] if s > 0 else self.a[2 * j])
        for k, s in enumerate(self.beta):
            out.append(self.b[2 * k] if s > 0 else self.b[2 * k + 1])
        return tuple(sorted(out))

    @property
    def poles(self):
        """Points where w^2 is infinite."""
        zeros = set(self.zeros)
        return tuple(x for x in self.branch_points if x not in zeros)

    @property
    def min_gap(self):
        pts = sorted(self.branch_points + (0.0,))
        return min(hi - lo for lo, hi in zip(pts, pts[1:]))

    @property
    def outer_radius(self):
        return max(self.a[-1], abs(self.b[-1]) if self.b else 0.0)

    @property
    def inner_radius(self):
        return min(self.a[0], abs(self.b[0]) if self.b else self.a[0])

    def to_dict(self):
        return {
            "m": self.m,
            "n": self.n,
            "a": list(self.a),
            "b": list(self.b),
            "alpha": list(self.alpha),
            "beta": list(self.beta),
        }


@dataclass(frozen=True)
class BranchedValue:
    z: complex
    w: complex


@dataclass(frozen=True)
class FormTriple:
    """Coefficients of dz of (phi1, phi2, phi3) at one point."""
    phi1: complex
    phi2: complex
    phi3: complex

    def as_array(self):
        return np.array([self.phi1, self.phi2, self.phi3], dtype=complex)


@dataclass(frozen=True)
class GaussValue:
    G: complex
    nu: tuple


@dataclass(frozen=True)
class PathSpec:
    waypoints: tuple
    avoidance_radius: float = 0.0


@dataclass
class ImmersionSample:
    z: complex
    f: np.ndarray
    quad_error: float = 0.0

    def to_dict(self):
        return {
            "z": [self.z.real, self.z.imag],
            "f": [float(x) for x in self.f],
            "quad_error": float(self.quad_error),
        }


@dataclass
class PeriodVector:
    v: np.ndarray
    loop_center: str
    quad_error: float = 0.0

    def to_dict(self):
        return {
            "loop_center": self.loop_center,
            "v": [float(x) for x in self.v],
            "quad_error": float(self.quad_error),
        }


@dataclass
class Segment:
    """
    One integration piece. Lines run start -> end; arcs run along |z| = radius
    from theta0 to theta1. `pinned` names a branch-point endpoint ("start"/"end")
    that gets the z = c + t^2 substitution.
    """
    start: complex
    end: complex
    kind: str = "line"
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0
    pinned: str = ""
    sheet: int = 1
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SingularComponent:
    """One interval of the singular set; lo < hi on the real axis."""
    lo: float
    hi: float
    axis: str
    index: int
    sign: int
    kind: str = "cone"

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def label(self):
        if self.axis == "positive":
            return f"[a{2 * self.index - 1}, a{2 * self.index}]"
        return f"[b{2 * self.index}, b{2 * self.index - 1}]"

    def to_dict(self):
        return {
            "endpoints": [self.lo, self.hi],
            "axis": self.axis,
            "index": self.index,
            "sign": self.sign,
            "kind": self.kind,
            "label": self.label,
        }
