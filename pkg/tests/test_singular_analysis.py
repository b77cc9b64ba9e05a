import numpy as np
import pytest

import config
from catalog import classes, enumerate_types, instantiate
from errors import DegenerateSingularity
from models import SingularComponent
from singular_analysis import (
    apex_coincidence,
    classify_cone,
    components,
    cone_criteria,
    dg_over_gdh,
    embedded_neighborhood,
    endpoint_gauss,
    nondegeneracy,
    singular_set,
    verify_singular_set,
)
from weierstrass_core import _branch_w, _gauss_from_w, validate_params

# every canonical configuration with at most four cones
CATALOG = [c for total in range(1, 5) for m, n in enumerate_types(total) for c, _ in classes(m, n)]


def test_single_interval(simple):
    comps = singular_set(simple)
    assert [(c.lo, c.hi) for c in comps] == [(1.0, 2.0)]
    assert comps[0].label == "[a1, a2]"


def test_one_interval_per_axis(mixed):
    comps = singular_set(mixed)
    assert {(c.lo, c.hi) for c in comps} == {(1.0, 2.0), (-2.0, -1.0)}
    assert [c.label for c in comps] == ["[a1, a2]", "[b2, b1]"]


@pytest.mark.parametrize("name", ["simple", "mixed"])
def test_numerical_locus_matches_intervals(name, request):
    result = verify_singular_set(request.getfixturevalue(name))
    assert result["passed"]
    assert result["real_axis_mismatches"] == 0
    assert result["offset_hits"] == 0


# ------------------------------
# Non-degeneracy
# ------------------------------
def test_dg_over_gdh_real_and_nonzero(simple):
    comp = components(simple)[0]
    values = nondegeneracy(comp, simple, samples=[1.25, 1.5, 1.75])
    assert all(v != 0 for v in values)


def test_dg_over_gdh_matches_finite_differences(simple):
    h = 1e-6
    G = lambda x: complex(_gauss_from_w(_branch_w(x, simple)))
    for x in (1.25, 1.5, 1.75):
        dG = (G(x + h) - G(x - h)) / (2 * h)
        w = complex(_branch_w(x, simple))
        dh = -0.5 * (1 / w - w) / x
        expected = dG / (G(x) * dh)
        value = complex(dg_over_gdh(x, simple))
        assert abs(expected.imag) <= 1e-6 * abs(expected)
        assert abs(value - expected) <= 1e-5 * abs(expected)


def test_degenerate_samples_are_reported(simple):
    comp = components(simple)[0]
    with pytest.raises(DegenerateSingularity) as info:
        nondegeneracy(comp, simple, samples=[1.5], threshold=1e6)
    assert len(info.value.details["samples"]) == 1


def test_cone_criteria(mixed):
    for comp in components(mixed):
        result = cone_criteria(comp, mixed)
        assert result["g_injective"]
        assert result["w2_one_to_one"]
        assert result["w2_negative"]
        assert result["passed"]


# ------------------------------
# Endpoint values and apex
# ------------------------------
def test_endpoint_gauss_follows_signs(mixed):
    for comp in components(mixed):
        for entry in endpoint_gauss(comp, mixed).values():
            assert entry["value"] == pytest.approx(entry["expected"], abs=1e-12)


def test_endpoint_gauss_positive_interval_values(simple):
    values = endpoint_gauss(components(simple)[0], simple)
    assert values["a1"]["expected"] == -1.0
    assert values["a2"]["expected"] == 1.0


def test_apex_coincidence(mixed):
    for comp in components(mixed):
        result = apex_coincidence(comp, mixed)
        assert result["passed"], result


def test_embedded_neighborhood_proxy(simple):
    result = embedded_neighborhood(components(simple)[0], simple)
    assert result["proxy"] is True
    assert result["passed"]


def test_embedded_neighborhood_on_both_axes(mixed):
    for comp in components(mixed):
        assert embedded_neighborhood(comp, mixed)["passed"], comp.label


def test_apex_coincidence_follows_active_ladder(simple):
    with config.active_tolerances(config.TOLERANCE_LADDERS["loose"]):
        result = apex_coincidence(components(simple)[0], simple)
    assert result["tolerance"] == 1e-4
    assert result["passed"] is True


# ------------------------------
# Cone direction
# ------------------------------
def test_single_cone_points_down(simple):
    report = classify_cone(components(simple)[0], simple)
    assert report.direction == "down"
    assert report.expected_direction == "down"
    assert report.matches_expected
    assert not report.matches_reversed_convention
    assert report.stable
    assert report.nondegenerate
    assert report.endpoint_gauss_ok


def test_up_cone_on_positive_axis():
    p = validate_params({"m": 1, "n": 0, "a": [1, 2], "alpha": [-1]})
    report = classify_cone(components(p)[0], p, neighborhood=False)
    assert report.direction == "up"
    assert report.matches_expected


def test_mixed_axes(mixed):
    positive, negative = components(mixed)
    assert classify_cone(positive, mixed, neighborhood=False).direction == "down"
    assert classify_cone(negative, mixed, neighborhood=False).direction == "up"


def test_direction_stable_under_smaller_offset(mixed):
    comp = components(mixed)[0]
    coarse = classify_cone(comp, mixed, eps=1e-2, neighborhood=False)
    fine = classify_cone(comp, mixed, eps=1e-3, neighborhood=False)
    assert coarse.direction == fine.direction


@pytest.mark.slow
@pytest.mark.parametrize("cones", CATALOG, ids=lambda c: "-".join(c.dirs_pos) + "|" + "-".join(c.dirs_neg))
def test_direction_matches_configuration(cones):
    p = instantiate(cones)
    for comp in components(p):
        wanted = cones.dirs_pos if comp.axis == "positive" else cones.dirs_neg
        report = classify_cone(comp, p, neighborhood=False)
        assert report.direction == wanted[comp.index - 1], comp.label
        assert report.matches_expected


def test_report_serializes(simple):
    data = classify_cone(components(simple)[0], simple, neighborhood=False).to_dict()
    assert data["component"]["label"] == "[a1, a2]"
    assert data["direction"] in ("up", "down")
    assert len(data["apex"]) == 3


def test_component_length():
    comp = SingularComponent(-3.0, -1.5, "negative", 2, 1)
    assert comp.length == 1.5
    assert comp.label == "[b4, b3]"
