"""
Triangulated graph: log-polar samples of the closed upper half-plane, welded
to the reflected copy (x1, 2c - x2, x3) and to translates by (0, 2 pi, 0).
"""
import math
from dataclasses import dataclass, field

import numpy as np

import config
from errors import ConfigError, WeldFailure
from integrator import apex, immersion_grid
from models import ImmersionSample
from singular_analysis import components
from utils import export_utils
from utils.audit_logger import get_logger
from weierstrass_core import _branch_w, _gauss_from_w, _normal_from_gauss, cone_is_up

logger = get_logger("mesh_builder")


@dataclass
class GridSpec:
    radial_samples: int = config.DEFAULT_GRID["radial_samples"]
    angular_samples: int = config.DEFAULT_GRID["angular_samples"]
    seam_refinement: int = config.DEFAULT_GRID["seam_refinement"]
    r_min: float = None
    r_max: float = None

    @classmethod
    def from_config(cls, grid):
        grid = dict(grid or {})
        return cls(**{k: grid[k] for k in config.DEFAULT_GRID if grid.get(k) is not None})

    @classmethod
    def from_string(cls, text, **overrides):
        """'RxA', e.g. '200x100'."""
        try:
            radial, angular = (int(part) for part in text.lower().split("x"))
        except ValueError:
            raise ConfigError(f"grid must look like RxA (e.g. 200x100), got '{text}'")
        return cls(radial_samples=radial, angular_samples=angular, **overrides)

    def resolved(self, p):
        """Copy with the truncation radii filled in and every bound checked."""
        r_min = self.r_min if self.r_min is not None else config.R_MIN_FACTOR * p.inner_radius
        r_max = self.r_max if self.r_max is not None else config.R_MAX_FACTOR * p.outer_radius
        if int(self.radial_samples) < 2:
            raise ConfigError("radial_samples must be at least 2")
        if int(self.angular_samples) < config.MIN_ANGULAR_SAMPLES:
            raise ConfigError(f"angular_samples must be at least {config.MIN_ANGULAR_SAMPLES}")
        if int(self.seam_refinement) < 0:
            raise ConfigError("seam_refinement must be nonnegative")
        if not 0 < r_min < p.inner_radius:
            raise ConfigError(f"r_min = {r_min} must lie in (0, {p.inner_radius})")
        if not r_max > p.outer_radius:
            raise ConfigError(f"r_max = {r_max} must exceed {p.outer_radius}")
        return GridSpec(int(self.radial_samples), int(self.angular_samples), int(self.seam_refinement), float(r_min), float(r_max))

    def to_dict(self):
        return {
            "radial_samples": self.radial_samples,
            "angular_samples": self.angular_samples,
            "seam_refinement": self.seam_refinement,
            "r_min": self.r_min,
            "r_max": self.r_max,
        }


def grid_axes(g):
    """Radii (log-spaced) and angles; refinement rows at theta_1 / 2^k next to 0 and pi."""
    radii = np.geomspace(g.r_min, g.r_max, g.radial_samples)
    base = np.linspace(0.0, math.pi, g.angular_samples)
    step = base[1]
    extra = [step / 2 ** k for k in range(1, g.seam_refinement + 1)]
    thetas = np.sort(np.concatenate([base, extra, [math.pi - e for e in extra]]))
    return radii, thetas


@dataclass
class FundamentalSamples:
    params: object
    grid: GridSpec
    radii: np.ndarray
    thetas: np.ndarray
    f: np.ndarray
    errors: np.ndarray
    apexes: list
    basepoint: complex = None

    def __len__(self):
        return self.f.shape[0] * self.f.shape[1] + len(self.apexes)

    @property
    def z(self):
        return self.radii[None, :] * np.exp(1j * self.thetas[:, None])

    @property
    def mirror_plane(self):
        """x2 of the image of the positive real axis."""
        return float(self.f[0, 0, 1])

    def as_samples(self):
        """Grid points row by row, then one sample per apex."""
        z = self.z
        out = [
            ImmersionSample(z=complex(z[j, i]), f=self.f[j, i].copy(), quad_error=float(self.errors[j, i]))
            for j in range(z.shape[0])
            for i in range(z.shape[1])
        ]
        for comp, vec, err in self.apexes:
            out.append(ImmersionSample(z=complex(0.5 * (comp.lo + comp.hi)), f=np.asarray(vec), quad_error=err))
        return out


def sample_fundamental(p, g=None, basepoint=None):
    g = (g or GridSpec()).resolved(p)
    radii, thetas = grid_axes(g)
    logger.info("sampling %d x %d grid", thetas.size, radii.size)
    f, errors = immersion_grid(radii, thetas, p, basepoint)
    apexes = []
    for comp in components(p):
        vec, err = apex(comp, "above", p, basepoint)
        apexes.append((comp, vec, err))
    return FundamentalSamples(p, g, radii, thetas, f, errors, apexes, basepoint)


# ------------------------------
# Assembly
# ------------------------------
@dataclass
class GraphMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    cone_vertices: list
    cone_directions: list
    copies: int
    nu3: np.ndarray
    row_zero: list = field(default_factory=list)
    row_pi: list = field(default_factory=list)
    n_fundamental_triangles: int = 0
    weld_residual: float = 0.0
    piece_vertices: dict = field(default_factory=dict)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=int), [], [], 0, np.zeros(0))

    def summary(self):
        extent = float(np.ptp(self.vertices[:, 1])) if len(self.vertices) else 0.0
        links = cone_links(self)
        return {
            "vertices": int(len(self.vertices)),
            "triangles": int(len(self.triangles)),
            "copies": self.copies,
            "cones": len(self.cone_vertices),
            "closed_cone_fans": sum(links),
            "weld_residual": self.weld_residual,
            "x2_extent": extent,
        }


class _VertexPool:
    def __init__(self):
        self.positions = []
        self.nu3 = []
        self.index = {}
        self.residual = 0.0

    def add(self, key, position, nu3):
        if key in self.index:
            k = self.index[key]
            self.residual = max(self.residual, float(np.max(np.abs(position - self.positions[k]))))
            return k
        self.index[key] = len(self.positions)
        self.positions.append(np.asarray(position, dtype=float))
        self.nu3.append(nu3)
        return self.index[key]


def _collapse_map(samples):
    """(row, i) -> component number for real-row samples lying on a singular interval."""
    comps = [c for c, _, _ in samples.apexes]
    out = {}
    last = len(samples.thetas) - 1
    for i, r in enumerate(samples.radii):
        for k, c in enumerate(comps):
            if c.axis == "positive" and c.lo <= r <= c.hi:
                out[(0, i)] = k
            if c.axis == "negative" and c.lo <= -r <= c.hi:
                out[(last, i)] = k
    return out


def _triangulate(idx, mirrored):
    a, b, c, d = idx[:-1, :-1], idx[:-1, 1:], idx[1:, 1:], idx[1:, :-1]
    tris = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)])
    keep = (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 0] != tris[:, 2])
    tris = tris[keep]
    return tris[:, [0, 2, 1]] if mirrored else tris


def link_is_cycle(triangles, vertex):
    """True when the edges opposite `vertex` in its triangles form one closed cycle."""
    around = triangles[np.any(triangles == vertex, axis=1)]
    if len(around) == 0:
        return False
    neighbours = {}
    for tri in around:
        a, b = (int(v) for v in tri if v != vertex)
        neighbours.setdefault(a, []).append(b)
        neighbours.setdefault(b, []).append(a)
    if any(len(n) != 2 for n in neighbours.values()):
        return False
    start = next(iter(neighbours))
    prev, current, seen = None, start, 0
    while True:
        a, b = neighbours[current]
        prev, current = current, (b if a == prev else a)
        seen += 1
        if current == start:
            return seen == len(neighbours)


def cone_links(mesh):
    return [link_is_cycle(mesh.triangles, v) for v in mesh.cone_vertices]


def assemble(samples, p=None, copies=0, cone_directions=None, tol=None):
    """
    Upper piece U_c and its mirror M_c for c = 0..copies. Row theta = 0 is shared
    by U_c and M_c, row theta = pi by M_c and U_c+1; real-row samples on a
    singular interval collapse to the apex vertex.

    A negative-axis cone is tagged where M_0 and U_1 meet, so its fan is closed
    once copies >= 1. With copies = 0 the tagged apex borders U_0 only and its
    fan closes modulo the period (0, 2 pi, 0).
    """
    tol = tol or config.TOL["mesh"]
    p = p or samples.params
    copies = int(copies)
    if copies < 0:
        raise ConfigError("copies must be nonnegative")
    comps = [c for c, _, _ in samples.apexes]
    apex_pos = [np.asarray(v, dtype=float) for _, v, _ in samples.apexes]
    if cone_directions is None:
        cone_directions = ["up" if cone_is_up(c.axis, c.sign) else "down" for c in comps]

    J, R = samples.f.shape[:2]
    plane = samples.mirror_plane
    collapse = _collapse_map(samples)

    residual = 0.0
    for (j, i), k in collapse.items():
        residual = max(residual, float(np.max(np.abs(samples.f[j, i] - apex_pos[k]))))
    if residual > tol:
        raise WeldFailure(f"real-axis samples miss the apex by {residual:.3g}", residual=residual)

    nu = _normal_from_gauss(_gauss_from_w(_branch_w(samples.z, p)))
    nu3 = nu[2]

    def mirror(x):
        return np.array([x[0], 2 * plane - x[1], x[2]])

    def row_key(j, mirrored, c):
        if j == 0:
            return 2 * c
        if j == J - 1:
            return 2 * c + 1 if mirrored else 2 * c - 1
        return None

    def apex_key(k, mirrored, c):
        level = 2 * c if comps[k].axis == "positive" else (2 * c + 1 if mirrored else 2 * c - 1)
        return ("apex", level, k)

    pool = _VertexPool()
    shift = np.array([0.0, 2 * math.pi, 0.0])
    cone_vertices = [pool.add(apex_key(k, False, 0), apex_pos[k], math.nan) for k in range(len(comps))]

    triangles, pieces = [], {}
    for c in range(copies + 1):
        for mirrored in (False, True):
            idx = np.empty((J, R), dtype=int)
            for j in range(J):
                level = row_key(j, mirrored, c)
                for i in range(R):
                    if (j, i) in collapse:
                        k = collapse[(j, i)]
                        pos = mirror(apex_pos[k]) if mirrored else apex_pos[k]
                        idx[j, i] = pool.add(apex_key(k, mirrored, c), pos + c * shift, math.nan)
                        continue
                    pos = mirror(samples.f[j, i]) if mirrored else samples.f[j, i]
                    key = ("row", level, i) if level is not None else ("M" if mirrored else "U", c, j, i)
                    idx[j, i] = pool.add(key, pos + c * shift, float(nu3[j, i]))
            pieces[("M" if mirrored else "U", c)] = idx
            triangles.append(_triangulate(idx, mirrored))

    # theta = pi rows of U_0 and M_0 agree modulo the period
    for i in range(R):
        if (J - 1, i) not in collapse:
            gap = mirror(samples.f[J - 1, i]) - shift - samples.f[J - 1, i]
            residual = max(residual, float(np.max(np.abs(gap))))
    residual = max(residual, pool.residual)
    if residual > tol:
        raise WeldFailure(f"seam rows disagree by {residual:.3g}", residual=residual)

    if copies >= 1:
        cone_vertices = [
            pool.add(apex_key(k, True, 0), mirror(apex_pos[k]), math.nan) if comps[k].axis == "negative" else v
            for k, v in enumerate(cone_vertices)
        ]

    upper = pieces[("U", 0)]
    mesh = GraphMesh(
        vertices=np.array(pool.positions).reshape(-1, 3),
        triangles=np.concatenate(triangles) if triangles else np.zeros((0, 3), dtype=int),
        cone_vertices=cone_vertices,
        cone_directions=list(cone_directions),
        copies=copies,
        nu3=np.array(pool.nu3, dtype=float),
        row_zero=[None if (0, i) in collapse else int(upper[0, i]) for i in range(R)],
        row_pi=[None if (J - 1, i) in collapse else int(upper[J - 1, i]) for i in range(R)],
        n_fundamental_triangles=len(triangles[0]),
        weld_residual=residual,
        piece_vertices=pieces,
    )
    logger.info("assembled %d vertices, %d triangles", len(mesh.vertices), len(mesh.triangles))
    return mesh


# ------------------------------
# Graph property
# ------------------------------
def _signed_areas(v2, tris):
    a, b, c = v2[tris[:, 0]], v2[tris[:, 1]], v2[tris[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def _overlapping(tri, others, tol):
    """Separating-axis test of one projected triangle against many; True where interiors meet."""
    edges_a = np.roll(tri, -1, axis=0) - tri
    edges_b = np.roll(others, -1, axis=1) - others
    axes = np.concatenate([np.broadcast_to(edges_a, (len(others), 3, 2)), edges_b], axis=1)
    normals = np.stack([-axes[..., 1], axes[..., 0]], -1)
    normals /= np.maximum(np.linalg.norm(normals, axis=-1, keepdims=True), 1e-300)
    proj_a = np.einsum("kad,pd->kap", normals, tri)
    proj_b = np.einsum("kad,kpd->kap", normals, others)
    separated = (proj_a.max(-1) <= proj_b.min(-1) + tol) | (proj_b.max(-1) <= proj_a.min(-1) + tol)
    return ~np.any(separated, axis=1)


def graph_check(mesh, sample_size=None, seed=0):
    """
    Findings on the copy-0 upper piece: normals up, boundary monotonicity of x1,
    positive projected orientation and a sampled projected-overlap test.
    """
    sample_size = sample_size or config.OVERLAP_SAMPLE_SIZE
    tris = mesh.triangles[: mesh.n_fundamental_triangles]
    v2 = mesh.vertices[:, :2]

    regular = np.isfinite(mesh.nu3)
    min_nu3 = float(np.min(mesh.nu3[regular])) if np.any(regular) else None

    def strictly(rows, sign):
        x1 = np.array([mesh.vertices[k, 0] for k in rows if k is not None])
        return bool(np.all(sign * np.diff(x1) > 0))

    areas = _signed_areas(v2, tris) if len(tris) else np.zeros(0)
    scale = float(np.ptp(v2, axis=0).max()) if len(v2) else 1.0
    tol = 1e-9 * scale

    overlaps = 0
    checked = 0
    if len(tris):
        corners = v2[tris]
        lo, hi = corners.min(axis=1), corners.max(axis=1)
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(tris), size=min(sample_size, len(tris)), replace=False)
        for t in picks:
            cand = np.flatnonzero(np.all(lo <= hi[t] + tol, axis=1) & np.all(hi >= lo[t] - tol, axis=1))
            cand = cand[cand != t]
            shared = np.any(np.isin(tris[cand], tris[t]), axis=1)
            cand = cand[~shared]
            checked += 1
            if cand.size:
                overlaps += int(np.count_nonzero(_overlapping(corners[t], corners[cand], tol)))

    report = {
        "min_nu3": min_nu3,
        "normals_up": min_nu3 is not None and min_nu3 > 0,
        # x1 falls with r on both rows: it decreases along the positive axis
        # and increases along the negative axis as x runs from -inf to 0
        "x1_decreasing_positive_axis": strictly(mesh.row_zero, -1),
        "x1_increasing_negative_axis": strictly(mesh.row_pi, -1),
        "min_projected_area": float(areas.min()) if areas.size else None,
        "orientation_consistent": bool(np.all(areas > 0)),
        "overlap_samples": checked,
        "overlapping_pairs": overlaps,
    }
    report["passed"] = (
        report["normals_up"]
        and report["x1_decreasing_positive_axis"]
        and report["x1_increasing_negative_axis"]
        and report["orientation_consistent"]
        and overlaps == 0
    )
    return report


# ------------------------------
# Export
# ------------------------------
def cone_tags(mesh):
    return [(k, d) for k, d in zip(mesh.cone_vertices, mesh.cone_directions)]


def export_obj(mesh, destination):
    return export_utils.write_obj(destination, mesh.vertices, mesh.triangles, cone_tags(mesh))


def export_ply(mesh, destination):
    return export_utils.write_ply(destination, mesh.vertices, mesh.triangles)
