"""Geometry and spiral-classification tests."""

import numpy as np
import pytest

from logtorus.errors import AllCellsInside, ConfigError, EmptyDomain
from logtorus.torus import (
    Band, Disc, Grid, Polygon, Rect, ShapeUnion, Strip, TorusSpec, Tube,
    build_domain, classify_spiral, components, mask_from_inside,
    parse_shape_lines, reflect_mask, translate_mask,
)

LOG2 = float(np.log(2.0))


def test_torus_spec_validation():
    spec = TorusSpec(LOG2)
    assert spec.T == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        TorusSpec(-1.0)
    with pytest.raises(ConfigError):
        Grid(spec, 4, 64)


def test_strip_is_one_component_connected_k1():
    spec = TorusSpec(LOG2)
    mask = build_domain(spec, 64, 64, Strip(-np.pi / 4, np.pi / 4))
    assert mask.n_components == 1
    sc = mask.spiral_of(0)
    assert sc.connected and sc.k == 1 and sc.y_winding == 0
    assert sc.conclusive


def test_vertical_band_not_connected_on_spirals():
    spec = TorusSpec(LOG2)
    P = spec.P
    mask = build_domain(spec, 64, 64, Band(P / 4, 3 * P / 4))
    assert mask.n_components == 1
    sc = mask.spiral_of(0)
    assert not sc.connected
    assert sc.conclusive


def test_union_of_band_and_strip_is_connected():
    # the band alone is not connected on spirals, the union with a strip is
    spec = TorusSpec(LOG2)
    P = spec.P
    shape = ShapeUnion(Band(P / 4, 3 * P / 4), Strip(-np.pi / 4, np.pi / 4))
    mask = build_domain(spec, 64, 64, shape)
    assert mask.n_components == 1
    assert mask.spiral_of(0).connected
    assert mask.spiral_of(0).k == 1


@pytest.mark.parametrize("k", [1, 2, 3])
def test_tube_detects_construction_winding(k):
    spec = TorusSpec(LOG2)
    mask = build_domain(spec, 96, 96, Tube(k, 0, 0.05), window_periods=4)
    assert mask.n_components == 1
    sc = mask.spiral_of(0)
    assert sc.connected
    assert sc.k == k
    assert sc.y_winding == 1
    assert sc.conclusive


def test_tube_winding_beyond_window_flagged():
    spec = TorusSpec(LOG2)
    mask = build_domain(spec, 96, 96, Tube(4, 0, 0.04), window_periods=4)
    sc = mask.spiral_of(0)
    assert not sc.conclusive  # needs window_periods >= 5
    mask = build_domain(spec, 96, 96, Tube(4, 0, 0.04), window_periods=6)
    sc = mask.spiral_of(0)
    assert sc.connected and sc.k == 4 and sc.conclusive


def test_two_strips_two_components_disc_one():
    spec = TorusSpec(LOG2)
    two = ShapeUnion(Strip(-1.0, -0.5), Strip(0.5, 1.0))
    mask = build_domain(spec, 64, 64, two)
    assert mask.n_components == 2
    assert len(components(mask)) == 2
    disc = build_domain(spec, 64, 64, Disc(LOG2 / 2, 0.0, 0.3))
    assert disc.n_components == 1
    assert not disc.spiral_of(0).connected  # precompact component


def test_component_split_preserves_cells():
    spec = TorusSpec(LOG2)
    two = ShapeUnion(Strip(-1.0, -0.5), Disc(0.2, 2.0, 0.25))
    mask = build_domain(spec, 64, 64, two)
    subs = components(mask)
    total = sum(s.n_inside for s in subs)
    assert total == mask.n_inside
    for s in subs:
        assert s.n_components == 1


def test_empty_and_full_are_rejected():
    spec = TorusSpec(LOG2)
    with pytest.raises(EmptyDomain):
        build_domain(spec, 64, 64, Strip(2.9, 2.95).__sub__(Strip(-4, 4)))
    with pytest.raises(AllCellsInside):
        build_domain(spec, 64, 64, Strip(-4.0, 4.0))


def test_rasterization_monotone():
    # shape A inside shape B pointwise -> cellwise containment
    spec = TorusSpec(LOG2)
    a = Disc(0.3, 0.1, 0.2)
    b = Disc(0.3, 0.1, 0.5)
    ma = build_domain(spec, 64, 64, a, classify=False)
    mb = build_domain(spec, 64, 64, b, classify=False)
    assert np.all(~ma.inside | mb.inside)


def test_classification_invariant_under_translation_and_reflection():
    spec = TorusSpec(LOG2)
    mask = build_domain(spec, 64, 64, Tube(2, 0, 0.06))
    for m2 in (translate_mask(mask, 7, 13), reflect_mask(mask)):
        sc2 = classify_spiral(m2)[0]
        sc = mask.spiral_of(0)
        assert sc2.kind == sc.kind and sc2.k == sc.k


def test_wrapping_component_labels_merge_across_seams():
    spec = TorusSpec(LOG2)
    grid = Grid(spec, 32, 32)
    inside = np.zeros(grid.shape, dtype=bool)
    inside[:, :4] = True
    inside[:, -4:] = True   # same component across the x seam
    mask = mask_from_inside(grid, inside, classify=False)
    assert mask.n_components == 1


def test_polygon_and_rect_rasterize():
    spec = TorusSpec(LOG2)
    tri = Polygon(((0.1, -0.5), (0.6, -0.5), (0.35, 0.5)))
    mask = build_domain(spec, 64, 64, tri, classify=False)
    assert 0 < mask.n_inside < mask.grid.ncells
    r = build_domain(spec, 64, 64, Rect(0.1, 0.5, -1.0, 1.0), classify=False)
    X, Y = r.grid.meshgrid()
    expect = (X > 0.1) & (X < 0.5) & (Y > -1.0) & (Y < 1.0)
    assert np.array_equal(r.inside, expect)


def test_shape_file_parsing_roundtrip():
    lines = [
        "torus 0.6931471805599453 64 64",
        "# strip with a bite taken out",
        "+ strip -0.785398 0.785398",
        "- disc 0.34657 0.0 0.2",
        "+ tube 2 0 0.05",
    ]
    spec, nx, ny, shape = parse_shape_lines(lines)
    assert spec.P == pytest.approx(LOG2)
    mask = build_domain(spec, nx, ny, shape)
    assert mask.n_inside > 0
    with pytest.raises(ConfigError):
        parse_shape_lines(["+ strip 0 1"])          # missing header
    with pytest.raises(ConfigError):
        parse_shape_lines(["torus 0.7 64 64", "- strip 0 1"])  # leading difference
