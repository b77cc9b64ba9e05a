import math

import numpy as np
import pytest

from catalog import classes, enumerate_types, instantiate
from errors import ConfigError, WeldFailure
from mesh_builder import (
    GraphMesh,
    GridSpec,
    assemble,
    cone_links,
    export_obj,
    export_ply,
    graph_check,
    grid_axes,
    link_is_cycle,
    sample_fundamental,
)
from models import ImmersionSample

CATALOG = [c for total in range(1, 5) for m, n in enumerate_types(total) for c, _ in classes(m, n)]


@pytest.fixture
def simple_samples(simple, coarse_grid):
    return sample_fundamental(simple, coarse_grid)


# ------------------------------
# Grid
# ------------------------------
def test_grid_string():
    g = GridSpec.from_string("200x100")
    assert (g.radial_samples, g.angular_samples) == (200, 100)


def test_bad_grid_string():
    with pytest.raises(ConfigError):
        GridSpec.from_string("200by100")


def test_truncation_radii_default_from_params(simple):
    g = GridSpec().resolved(simple)
    assert g.r_min == pytest.approx(0.05)
    assert g.r_max == pytest.approx(40.0)


@pytest.mark.parametrize("overrides", [{"r_min": 1.5}, {"r_max": 1.0}, {"angular_samples": 4}, {"radial_samples": 1}])
def test_grid_bounds(simple, overrides):
    with pytest.raises(ConfigError):
        GridSpec(**overrides).resolved(simple)


def test_seam_refinement_rows(simple):
    radii, thetas = grid_axes(GridSpec(radial_samples=10, angular_samples=9, seam_refinement=2).resolved(simple))
    step = math.pi / 8
    assert thetas[0] == 0.0 and thetas[-1] == math.pi
    assert np.all(np.diff(thetas) > 0)
    for extra in (step / 2, step / 4):
        assert np.any(np.isclose(thetas, extra))
        assert np.any(np.isclose(thetas, math.pi - extra))
    assert radii[0] == pytest.approx(0.05) and np.all(np.diff(np.log(radii)) > 0)


# ------------------------------
# Sampling
# ------------------------------
def test_sample_count(simple_samples):
    J, R = simple_samples.f.shape[:2]
    assert (J, R) == (14, 24)
    assert len(simple_samples) == J * R + 1


def test_second_coordinate_on_grid(simple_samples):
    dev = simple_samples.f[:, :, 1] + np.angle(simple_samples.z)
    assert np.max(np.abs(dev)) <= 1e-10


def test_mirror_plane_through_basepoint(simple_samples):
    assert simple_samples.mirror_plane == pytest.approx(0.0, abs=1e-12)


def test_samples_flatten_grid_then_apexes(simple_samples):
    flat = simple_samples.as_samples()
    assert len(flat) == len(simple_samples)
    assert all(isinstance(s, ImmersionSample) for s in flat)
    assert flat[1].z == complex(simple_samples.z[0, 1])
    assert flat[-1].quad_error == simple_samples.apexes[0][2]


# ------------------------------
# Assembly
# ------------------------------
def test_single_cone_vertex(simple_samples):
    mesh = assemble(simple_samples)
    assert len(mesh.cone_vertices) == 1
    assert mesh.cone_directions == ["down"]
    assert mesh.weld_residual <= 1e-6
    assert np.all(mesh.triangles < len(mesh.vertices))


def test_translates_extend_the_period(simple_samples):
    base = assemble(simple_samples, copies=0).summary()["x2_extent"]
    more = assemble(simple_samples, copies=2).summary()["x2_extent"]
    assert more - base == pytest.approx(4 * math.pi, abs=1e-9)


def test_seams_are_shared(simple_samples):
    mesh = assemble(simple_samples, copies=1)
    upper, mirror = mesh.piece_vertices[("U", 0)], mesh.piece_vertices[("M", 0)]
    assert np.array_equal(upper[0], mirror[0])
    assert np.array_equal(mirror[-1], mesh.piece_vertices[("U", 1)][-1])


def test_negative_copies_rejected(simple_samples):
    with pytest.raises(ConfigError):
        assemble(simple_samples, copies=-1)


def test_weld_failure(simple_samples):
    radii = simple_samples.radii
    i = int(np.flatnonzero((radii > 1.0) & (radii < 2.0))[0])
    simple_samples.f[0, i, 2] += 1e-3
    with pytest.raises(WeldFailure):
        assemble(simple_samples)


def test_four_cones_two_per_axis(tmp_path, coarse_grid):
    config, _ = classes(2, 2)[0]
    p = instantiate(config)
    mesh = assemble(sample_fundamental(p, coarse_grid), p)
    assert len(mesh.cone_vertices) == 4
    out = export_obj(mesh, tmp_path / "four.obj")
    cones = [line for line in open(out, encoding="utf-8") if line.startswith("# cone")]
    assert len(cones) == 4
    apexes = mesh.vertices[mesh.cone_vertices]
    # positive-axis apexes sit in the plane x2 = 0, negative-axis ones in x2 = -pi
    assert np.sum(np.isclose(apexes[:, 1], 0.0, atol=1e-6)) == 2
    assert np.sum(np.isclose(apexes[:, 1], -math.pi, atol=1e-6)) == 2


def test_cone_fans_close_with_one_translate(mixed, coarse_grid):
    samples = sample_fundamental(mixed, coarse_grid)
    axes = [c.axis for c, _, _ in samples.apexes]

    alone = assemble(samples, mixed, copies=0)
    assert dict(zip(axes, cone_links(alone))) == {"positive": True, "negative": False}

    mesh = assemble(samples, mixed, copies=1)
    assert all(cone_links(mesh))
    assert mesh.summary()["closed_cone_fans"] == 2
    negative = mesh.vertices[mesh.cone_vertices[axes.index("negative")]]
    assert negative[1] == pytest.approx(math.pi, abs=1e-6)


def test_link_of_open_fan():
    triangles = np.array([[0, 1, 2], [0, 2, 3]])
    assert not link_is_cycle(triangles, 0)
    closed = np.array([[0, 1, 2], [0, 2, 3], [0, 3, 1]])
    assert link_is_cycle(closed, 0)


@pytest.mark.parametrize("m, n", [(8, 1), (7, 2)])
def test_nine_cones(tmp_path, m, n):
    cones, _ = classes(m, n)[0]
    p = instantiate(cones)
    samples = sample_fundamental(p, GridSpec(radial_samples=160, angular_samples=16, seam_refinement=1))
    mesh = assemble(samples, p)
    assert len(mesh.cone_vertices) == 9
    out = export_obj(mesh, tmp_path / "nine.obj")
    tags = [line for line in open(out, encoding="utf-8") if line.startswith("# cone")]
    assert len(tags) == 9


# ------------------------------
# Graph property
# ------------------------------
@pytest.mark.parametrize("name", ["simple", "mixed"])
def test_graph_check_passes(name, request):
    p = request.getfixturevalue(name)
    samples = sample_fundamental(p, GridSpec(radial_samples=40, angular_samples=16, seam_refinement=2))
    report = graph_check(assemble(samples, p))
    assert report["normals_up"]
    assert report["x1_decreasing_positive_axis"]
    assert report["x1_increasing_negative_axis"]
    assert report["orientation_consistent"]
    assert report["overlapping_pairs"] == 0
    assert report["passed"]


@pytest.mark.slow
@pytest.mark.parametrize("cones", CATALOG, ids=lambda c: "-".join(c.dirs_pos) + "|" + "-".join(c.dirs_neg))
def test_graph_check_on_catalog(cones):
    p = instantiate(cones)
    samples = sample_fundamental(p, GridSpec(radial_samples=80, angular_samples=32))
    report = graph_check(assemble(samples, p))
    assert report["passed"], report


# ------------------------------
# Export
# ------------------------------
def test_obj_has_one_cone_tag(simple_samples, tmp_path):
    mesh = assemble(simple_samples)
    path = export_obj(mesh, tmp_path / "mesh.obj")
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0] == "# maximal graph mesh"
    assert [l for l in lines if l.startswith("# cone")] == [f"# cone {mesh.cone_vertices[0] + 1} down"]
    assert sum(l.startswith("v ") for l in lines) == len(mesh.vertices)
    assert sum(l.startswith("f ") for l in lines) == len(mesh.triangles)


def test_obj_export_is_deterministic(simple_samples, tmp_path):
    mesh = assemble(simple_samples)
    first = open(export_obj(mesh, tmp_path / "a.obj"), "rb").read()
    second = open(export_obj(mesh, tmp_path / "b.obj"), "rb").read()
    assert first == second


def test_empty_mesh_is_header_only(tmp_path):
    path = export_obj(GraphMesh.empty(), tmp_path / "empty.obj")
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines == ["# maximal graph mesh", "# vertices 0 faces 0"]


def test_ply_layout(simple_samples, tmp_path):
    mesh = assemble(simple_samples)
    data = open(export_ply(mesh, tmp_path / "mesh.ply"), "rb").read()
    header, body = data.split(b"end_header\n", 1)
    assert header.startswith(b"ply\nformat binary_little_endian 1.0\n")
    assert f"element vertex {len(mesh.vertices)}".encode() in header
    assert len(body) == 24 * len(mesh.vertices) + 13 * len(mesh.triangles)
