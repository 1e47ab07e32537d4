import math

import numpy as np
import pytest

from anisolap import (
    Disk,
    Polygon,
    Rectangle,
    area,
    domain_from_json,
    domain_to_json,
    lshape,
    named_domain,
    polygonize,
    rotate,
    shear_y,
)


def vertex_set(p: Polygon) -> set:
    return {(round(x, 12), round(y, 12)) for x, y in p.vertices}


# -------------------------------------------------------------------- areas


def test_areas():
    assert area(Disk(1.0)) == pytest.approx(math.pi)
    assert area(Rectangle(1.0, 1.0)) == 4.0
    assert area(Rectangle(1.0, 2.0)) == 8.0
    assert area(lshape()) == pytest.approx(3.0, abs=1e-15)


# ------------------------------------------------------------------- rotate


def test_rotate_disk_fixed_point():
    d = Disk(1.0)
    for theta in (0.0, 0.3, math.pi / 2):
        r = rotate(d, theta)
        assert isinstance(r, Disk)
        assert r.radius == 1.0
        assert r.center == pytest.approx((0.0, 0.0), abs=1e-15)


def test_rotate_square_quarter_turn_same_set():
    sq = polygonize(Rectangle(1.0, 1.0))
    assert vertex_set(rotate(sq, math.pi / 2)) == vertex_set(sq)


def test_rotate_tall_rectangle_quarter_turn():
    rect = Rectangle(1.0, 2.0)
    rotated = rotate(rect, math.pi / 2)
    assert vertex_set(rotated) == {(2.0, -1.0), (2.0, 1.0), (-2.0, 1.0), (-2.0, -1.0)}


def test_rotate_preserves_area():
    p = lshape()
    for theta in (0.2, 0.9, math.pi / 2):
        assert area(rotate(p, theta)) == pytest.approx(3.0, abs=1e-12)


def test_rotate_composition():
    p = lshape()
    once = rotate(rotate(p, 0.3), 0.4)
    combined = rotate(p, 0.7)
    np.testing.assert_allclose(once.vertices, combined.vertices, atol=1e-12)


def test_rotate_rejects_out_of_range():
    with pytest.raises(ValueError):
        rotate(lshape(), -0.5)
    with pytest.raises(ValueError):
        rotate(lshape(), 2.0)


# ------------------------------------------------------------------- shear


def test_shear_identity_level():
    p = lshape()
    assert shear_y(p, 1.0) is p


def test_shear_disk_to_ellipse_area():
    ell = shear_y(Disk(1.0), 0.25)
    assert isinstance(ell, Polygon)
    # inscribed polygon of the ellipse with semi-axes (1, 0.5)
    assert area(ell) == pytest.approx(math.pi / 2, abs=1e-4)
    xs, ys = ell.vertices[:, 0], ell.vertices[:, 1]
    assert xs.max() == pytest.approx(1.0) and ys.max() == pytest.approx(0.5)


def test_shear_tall_rectangle_to_square():
    sheared = shear_y(Rectangle(1.0, 2.0), 0.25)
    assert isinstance(sheared, Rectangle)
    assert sheared.halfwidth == 1.0 and sheared.halfheight == pytest.approx(1.0)


def test_shear_scales_polygon_area_exactly():
    p = lshape()
    for a in (0.9, 0.5, 0.1):
        assert area(shear_y(p, a)) == pytest.approx(math.sqrt(a) * 3.0, abs=1e-12)


def test_shear_rejects_bad_level():
    with pytest.raises(ValueError):
        shear_y(lshape(), 0.0)
    with pytest.raises(ValueError):
        shear_y(lshape(), 1.5)


# --------------------------------------------------------------- polygonize


def test_polygonize_disk_area_formula():
    poly = polygonize(Disk(1.0), 4096)
    # inscribed n-gon area (n/2) sin(2 pi / n)
    assert area(poly) == pytest.approx(2048 * math.sin(2 * math.pi / 4096), abs=1e-12)
    assert area(poly) == pytest.approx(math.pi, abs=1e-5)


def test_polygonize_square_passthrough():
    sq = polygonize(Rectangle(1.0, 1.0), 64)
    poly = polygonize(sq, 64)
    assert poly is sq


def test_polygonize_ellipse_area():
    ell = shear_y(Disk(1.0), 0.25, n_boundary=4096)
    assert area(ell) == pytest.approx(math.pi / 2, abs=1e-5)


def test_polygonize_rejects_small_n():
    with pytest.raises(ValueError):
        polygonize(Disk(1.0), 8)


# --------------------------------------------------------------- validation


def test_polygon_rejects_clockwise():
    with pytest.raises(ValueError):
        Polygon(np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]))


def test_polygon_rejects_self_intersection():
    bowtie = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        Polygon(bowtie)


def test_polygon_rejects_too_few_vertices():
    with pytest.raises(ValueError):
        Polygon(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_domain_validation():
    with pytest.raises(ValueError):
        Disk(-1.0)
    with pytest.raises(ValueError):
        Rectangle(0.0, 1.0)


# --------------------------------------------------------------------- json


def test_json_round_trips():
    for d in (Disk(2.0, (0.5, -0.5)), Rectangle(1.0, 2.0), lshape()):
        back = domain_from_json(domain_to_json(d))
        assert type(back) is type(d)
        assert area(back) == pytest.approx(area(d), abs=1e-12)


def test_named_domains():
    assert isinstance(named_domain("square"), Rectangle)
    assert isinstance(named_domain("disk"), Disk)
    assert isinstance(named_domain("lshape"), Polygon)
    assert isinstance(domain_from_json("square"), Rectangle)
    with pytest.raises(ValueError):
        named_domain("pentagon")


def test_json_rejects_bad_spec():
    with pytest.raises(ValueError):
        domain_from_json({"radius": 1.0})
    with pytest.raises(ValueError):
        domain_from_json({"type": "torus"})
