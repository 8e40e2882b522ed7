import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipeflow.errors import GeometryError, NonPositiveRadius
from pipeflow.geometry import (
    SectionKind,
    area_perimeter,
    curvature,
    disk,
    make_section,
    section_from_dict,
)


def test_unit_disk_area_perimeter():
    area, perim = area_perimeter(disk())
    assert area == pytest.approx(math.pi, abs=1e-13)
    assert perim == pytest.approx(2 * math.pi, abs=1e-13)


def test_scaled_disk():
    area, perim = area_perimeter(disk(2.0))
    assert area == pytest.approx(4 * math.pi, abs=1e-12)
    assert perim == pytest.approx(4 * math.pi, abs=1e-12)
    assert curvature(disk(2.0), 0.3) == pytest.approx(0.5, abs=1e-15)


def test_three_lobe_accepted(three_lobe):
    theta = np.linspace(0, 2 * np.pi, 4096)
    assert three_lobe.radius(theta).min() == pytest.approx(0.85, abs=1e-6)
    assert three_lobe.kind is SectionKind.STAR_SHAPED


def test_negative_radius_rejected():
    with pytest.raises(NonPositiveRadius):
        make_section("StarShaped", 1.0, [[1, 1.2, 0.0]])


def test_disk_takes_no_harmonics():
    with pytest.raises(GeometryError):
        make_section("Disk", 1.0, [[2, 0.1, 0.0]])


def test_unit_disk_curvature_is_one():
    theta = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    assert np.all(np.abs(curvature(disk(), theta) - 1.0) <= 1e-15)


def test_curvature_ellipse_like_by_hand(ellipse_like):
    # r = 1 + 0.1 cos 2t: at t=0, r = 1.1, r' = 0, r'' = -0.4
    r, r1, r2 = 1.1, 0.0, -0.4
    expected = (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5
    assert curvature(ellipse_like, 0.0) == pytest.approx(expected, rel=1e-14)


def test_curvature_integrates_to_two_pi(three_lobe):
    # turning number of a simple closed curve
    t = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    speed = np.hypot(three_lobe.radius(t), three_lobe.radius(t, 1))
    total = np.sum(curvature(three_lobe, t) * speed) * 2 * np.pi / t.size
    assert total == pytest.approx(2 * np.pi, abs=1e-10)


def test_area_perimeter_vs_fine_quadrature(ellipse_like):
    area, perim = area_perimeter(ellipse_like)
    n = 1_000_000
    t = (np.arange(n) + 0.5) * 2 * np.pi / n
    r = 1 + 0.1 * np.cos(2 * t)
    dr = -0.2 * np.sin(2 * t)
    assert area == pytest.approx(0.5 * np.sum(r * r) * 2 * np.pi / n, abs=1e-10)
    assert perim == pytest.approx(np.sum(np.hypot(r, dr)) * 2 * np.pi / n, abs=1e-10)
    # closed form of the area: pi (a0^2 + a2^2 / 2)
    assert area == pytest.approx(math.pi * 1.005, abs=1e-12)


def test_quadrature_resolution_is_converged(three_lobe):
    a1, p1 = area_perimeter(three_lobe, 512)
    a2, p2 = area_perimeter(three_lobe, 1024)
    assert abs(a1 - a2) < 1e-10 and abs(p1 - p2) < 1e-10


@settings(max_examples=40, deadline=None)
@given(
    a2=st.floats(-0.2, 0.2),
    b3=st.floats(-0.15, 0.15),
    angle=st.floats(0, 2 * np.pi),
)
def test_rotation_invariance(a2, b3, angle):
    s = make_section("StarShaped", 1.0, [[2, a2, 0.0], [3, 0.0, b3]])
    rot = s.rotated(angle)
    for x, y in zip(area_perimeter(s), area_perimeter(rot)):
        assert x == pytest.approx(y, abs=1e-12)
    assert rot.radius(0.4 + angle) == pytest.approx(s.radius(0.4), abs=1e-13)


@settings(max_examples=20, deadline=None)
@given(a0=st.floats(0.2, 5.0))
def test_disk_scaling(a0):
    a, p = area_perimeter(disk(a0))
    a2, p2 = area_perimeter(disk(2 * a0))
    assert a2 == pytest.approx(4 * a, rel=1e-13)
    assert p2 == pytest.approx(2 * p, rel=1e-13)


def test_json_round_trip(three_lobe):
    assert section_from_dict(three_lobe.to_dict()) == three_lobe


@pytest.mark.parametrize(
    "doc, word",
    [
        ({"a0": 1}, "kind"),
        ({"kind": "Disk", "radius": 2}, "radius"),
        ({"kind": "Blob"}, "Blob"),
        ({"kind": "StarShaped", "harmonics": [[0, 1, 0]]}, "index"),
        ({"kind": "StarShaped", "harmonics": "x"}, "harmonics"),
        ({"kind": "Disk", "a0": "big"}, "a0"),
    ],
)
def test_json_errors_name_the_key(doc, word):
    with pytest.raises(GeometryError, match=word):
        section_from_dict(doc)


def test_strip_section():
    s = make_section("Strip1D")
    assert area_perimeter(s) == (1.0, 2.0)
    assert curvature(s, 0.2) == 0.0
