import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial.legendre import leggauss

import config
from errors import NonConvergent, PathThroughSingularity
from integrator import (
    angle,
    apex,
    default_basepoint,
    end_tilt,
    immersion,
    immersion_grid,
    integrate_path,
    loop_period,
    path_segments,
    route,
)
from models import PathSpec
from singular_analysis import components
from weierstrass_core import validate_params


def _oracle_real_segment(x0, x1, panels=10, nodes=48):
    """Composite Gauss rule for phi on the real axis of the (1, 0) surface, w = sqrt((x-2)/(x-1))."""
    t, wt = leggauss(nodes)
    edges = np.linspace(x0, x1, panels + 1)
    total = np.zeros(3)
    for lo, hi in zip(edges, edges[1:]):
        x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        w = np.sqrt((x - 2) / (x - 1))
        f = np.stack([-(1 / w + w) / (2 * x), np.zeros_like(x), (1 / w - w) / (2 * x)])
        total += 0.5 * (hi - lo) * (f @ wt)
    return total


def test_real_segment_matches_independent_quadrature(simple):
    value, error = integrate_path([3.0, 4.0], simple)
    assert np.max(np.abs(value - _oracle_real_segment(3.0, 4.0))) <= 1e-9
    assert error < 1e-9


@pytest.mark.parametrize("x0, x1", [(3.0, 6.0), (2.1, 3.0), (0.2, 0.9), (-3.0, -0.5)])
def test_error_estimate_bounds_actual_error(simple, x0, x1):
    value, error = integrate_path([x0, x1], simple)
    assert np.max(np.abs(value - _oracle_real_segment(x0, x1))) <= error + 1e-12


def test_homotopic_paths_agree(simple):
    z0, z = 3.0, 1.5 + 1.0j
    direct, _ = integrate_path([z0, z], simple)
    detour, _ = integrate_path([z0, 3.0 + 2.0j, 0.5 + 2.0j, z], simple)
    assert np.max(np.abs(direct - detour)) <= 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_paths_through_upper_half_plane_agree(simple, seed):
    rng = np.random.default_rng(seed)
    z = complex(rng.uniform(-6.0, 6.0), rng.uniform(0.1, 4.0))
    u, v = (complex(rng.uniform(-6.0, 6.0), rng.uniform(0.5, 4.0)) for _ in range(2))
    first, _ = integrate_path([3.0, u, z], simple)
    second, _ = integrate_path([3.0, v, z], simple)
    assert np.max(np.abs(first - second)) <= 1e-8
    assert np.max(np.abs(first - immersion(z, simple).f)) <= 1e-8


def test_immersion_vanishes_at_basepoint(simple):
    assert np.all(immersion(default_basepoint(simple), simple).f == 0)


@pytest.mark.parametrize("z", [1.5 + 1.0j, -1.0 + 0.5j, 0.2 - 0.3j, -4.0 - 0.01j, 5.0j])
def test_second_coordinate_is_minus_argument(simple, z):
    f2 = immersion(z, simple).f[1]
    assert f2 == pytest.approx(-cmath.phase(z), abs=1e-10)


def test_negative_axis_has_argument_pi(mixed):
    assert angle(-3.0) == math.pi
    assert immersion(-3.0, mixed).f[1] == pytest.approx(-math.pi, abs=1e-10)


def test_grid_matches_pointwise(simple):
    radii = np.array([0.3, 1.5, 3.0, 10.0])
    thetas = np.array([0.0, 0.7, math.pi / 2, math.pi])
    f, err = immersion_grid(radii, thetas, simple)
    for j, th in enumerate(thetas):
        for i, r in enumerate(radii):
            expected = immersion(r * cmath.exp(1j * th), simple).f
            assert np.max(np.abs(f[j, i] - expected)) <= 1e-8
    assert np.all(err < 1e-6)


def test_point_next_to_positive_axis_follows_the_axis(simple):
    z = 0.75 + 3e-17j
    assert all(seg.kind != "arc" for seg in route(z, simple))
    assert immersion(z, simple).f == pytest.approx(immersion(0.75, simple).f, abs=1e-10)


def test_point_just_below_negative_axis(mixed):
    below = immersion(-0.5 - 3e-17j, mixed).f
    on_axis = immersion(-0.5, mixed).f
    assert below[1] - on_axis[1] == pytest.approx(2 * math.pi, abs=1e-10)
    assert below[[0, 2]] == pytest.approx(on_axis[[0, 2]], abs=1e-9)


# ------------------------------
# Periods at the ends
# ------------------------------
@pytest.mark.parametrize("name", ["simple", "mixed"])
def test_end_periods(name, request):
    p = request.getfixturevalue(name)
    at_zero = loop_period(0, p)
    at_inf = loop_period("inf", p)
    assert np.max(np.abs(at_zero.v - [0.0, -2 * math.pi, 0.0])) <= 1e-8
    assert np.max(np.abs(at_inf.v - [0.0, 2 * math.pi, 0.0])) <= 1e-8
    assert np.max(np.abs(at_zero.v + at_inf.v)) <= 1e-8


TYPES = [(1, 0), (2, 0), (1, 1), (3, 0), (2, 1), (3, 1), (2, 2), (3, 2)]


@st.composite
def surface_params(draw):
    m, n = draw(st.sampled_from(TYPES))

    def ordered(count):
        out = [draw(st.floats(min_value=0.3, max_value=2.0))]
        for _ in range(count - 1):
            out.append(out[-1] + draw(st.floats(min_value=0.2, max_value=2.0)))
        return out

    def signs(count):
        return draw(st.lists(st.sampled_from([-1, 1]), min_size=count, max_size=count))

    return validate_params({
        "m": m,
        "n": n,
        "a": ordered(2 * m),
        "b": [-x for x in ordered(2 * n)],
        "alpha": signs(m),
        "beta": signs(n),
    })


@settings(max_examples=30, deadline=None)
@given(surface_params())
def test_end_periods_for_random_params(p):
    at_zero = loop_period(0, p)
    at_inf = loop_period("inf", p)
    assert np.max(np.abs(at_zero.v - [0.0, -2 * math.pi, 0.0])) <= 1e-8
    assert np.max(np.abs(at_inf.v - [0.0, 2 * math.pi, 0.0])) <= 1e-8


@pytest.mark.parametrize("turns", [1, 2, 3])
@pytest.mark.parametrize("clockwise", [False, True])
def test_winding_around_zero_shifts_second_coordinate(simple, turns, clockwise):
    step = (-1 if clockwise else 1) * 2 * math.pi / 8
    loop = [0.5 * simple.inner_radius * cmath.exp(1j * k * step) for k in range(8 * turns + 1)]
    value, _ = integrate_path(loop, simple)
    expected = 2 * math.pi * turns if clockwise else -2 * math.pi * turns
    assert value == pytest.approx([0.0, expected, 0.0], abs=1e-8)


def test_loop_center_must_be_an_end(simple):
    with pytest.raises(ValueError):
        loop_period(1.5, simple)


# ------------------------------
# Paths
# ------------------------------
def test_path_may_not_cross_singular_interval(simple):
    with pytest.raises(PathThroughSingularity):
        integrate_path([1.5 - 1.0j, 1.5 + 1.0j], simple)


def test_path_may_not_touch_zero(simple):
    with pytest.raises(PathThroughSingularity):
        integrate_path([1.0j, -1.0j], simple)


def test_interior_waypoint_at_branch_point(simple):
    with pytest.raises(PathThroughSingularity):
        integrate_path([3.0, 2.0, 3.0 + 1.0j], simple)


def test_endpoint_on_branch_point_is_pinned(simple):
    segments, _ = path_segments(PathSpec(waypoints=(3.0, 2.0)), simple)
    assert segments[-1].pinned == "end"
    value, _ = integrate_path([3.0, 2.0], simple)
    assert np.all(np.isfinite(value))


def test_sheet_tracking(simple):
    around = PathSpec(waypoints=(0.5 - 0.5j, 3.0 - 0.5j, 3.0 + 0.5j, 0.5 + 0.5j, 0.5 - 0.5j))
    assert path_segments(around, simple, track_sheets=True)[1] == 1
    through = PathSpec(waypoints=(1.25 - 0.5j, 1.25 + 0.5j, 1.75 + 0.5j, 1.75 - 0.5j, 1.25 - 0.5j))
    assert path_segments(through, simple, track_sheets=True)[1] == 1
    one_end = PathSpec(waypoints=(1.5 - 0.5j, 1.5 + 0.5j, 3.0 + 0.5j, 3.0 - 0.5j, 1.5 - 0.5j))
    assert path_segments(one_end, simple, track_sheets=True)[1] == -1


def test_immersion_at_end_raises(simple):
    with pytest.raises(PathThroughSingularity):
        immersion(0, simple)


# ------------------------------
# Apex limits
# ------------------------------
def test_apex_is_side_independent(mixed):
    for comp in components(mixed):
        limits = [apex(comp, side, mixed)[0] for side in ("above", "below", "left", "right")]
        spread = np.max(np.ptp(np.array(limits), axis=0))
        assert spread <= 1e-6


def test_apex_constant_along_interval(simple):
    comp = components(simple)[0]
    first, _ = apex(comp, "above", simple, at=1.25)
    second, _ = apex(comp, "above", simple, at=1.75)
    assert np.max(np.abs(first - second)) <= 1e-6


def test_apex_on_positive_axis_has_zero_second_coordinate(simple):
    limit, _ = apex(components(simple)[0], "above", simple)
    assert limit[1] == pytest.approx(0.0, abs=1e-6)


def test_apex_rejects_unknown_side(simple):
    with pytest.raises(ValueError):
        apex(components(simple)[0], "sideways", simple)


@pytest.mark.parametrize("side", ["above", "below", "left", "right"])
def test_apex_error_within_mesh_tolerance(simple, side):
    _, error = apex(components(simple)[0], side, simple)
    assert 0 <= error <= config.TOL["mesh"]


def test_apex_unsettled_under_tight_tolerance(simple):
    with config.active_tolerances({"mesh": 1e-14}):
        with pytest.raises(NonConvergent) as info:
            apex(components(simple)[0], "above", simple)
    assert info.value.details["residual"] > 1e-14


# ------------------------------
# End tilt
# ------------------------------
def test_horizontal_end(mixed):
    tilt = end_tilt(mixed)
    assert tilt["direction"] == "horizontal"
    assert abs(tilt["slope_numeric"]) < 1e-3


def test_tilted_end_slope(simple):
    tilt = end_tilt(simple)
    assert tilt["slope_closed_form"] == pytest.approx(0.5 * (1 / math.sqrt(2) - math.sqrt(2)))
    assert tilt["direction"] == "up"
    assert tilt["slope_numeric"] == pytest.approx(tilt["slope_closed_form"], abs=1e-2)
