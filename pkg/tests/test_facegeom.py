import json
import math

import numpy as np
import pytest

from fractal_spectra.btables import make_angle_table
from fractal_spectra.facegeom import (
    chain_vertex_triples,
    corner_triple,
    face_area,
    facenet_to_json,
    layout_face,
    layout_to_csv,
    layout_vertex_angles,
    solve_sidelengths,
)


def test_level0_unit_triangle():
    net = solve_sidelengths(make_angle_table(0))
    geom = net.upward[()]
    assert geom.sides == (1.0, 1.0, 1.0)
    assert geom.area == pytest.approx(math.sqrt(3) / 4, rel=1e-15)
    assert face_area(net) == pytest.approx(math.sqrt(3) / 4, rel=1e-15)


def test_level1_hand_oracle():
    # the four-triangle face solved by hand with the sine rule: both
    # boundary segments per side are 1/2 and the central flat side is
    # sin(5pi/9) / (2 sin(2pi/9))
    net = solve_sidelengths(make_angle_table(1))
    segs = [s.length for s in net.boundary[2]]
    assert segs == pytest.approx([0.5, 0.5], abs=1e-14)
    central = math.sin(5 * math.pi / 9) / (2 * math.sin(2 * math.pi / 9))
    assert net.downward[()].side == pytest.approx(central, rel=1e-14)

    corner = net.upward[(0,)]
    assert corner.angles[0] == pytest.approx(5 * math.pi / 9)
    assert corner.sides[1] == pytest.approx(0.5, abs=1e-14)
    assert corner.sides[0] == pytest.approx(central, rel=1e-14)


def test_level1_face_area_oracle():
    net = solve_sidelengths(make_angle_table(1))
    central = math.sin(5 * math.pi / 9) / (2 * math.sin(2 * math.pi / 9))
    upward_area = 0.5 * 0.5 * 0.5 * math.sin(5 * math.pi / 9)
    expected = 3 * upward_area + math.sqrt(3) / 4 * central**2
    assert face_area(net) == pytest.approx(expected, rel=1e-12)


def test_level2_hand_oracle():
    net = solve_sidelengths(make_angle_table(2))
    t01 = math.sin(17 * math.pi / 27) / math.sin(8 * math.pi / 27)
    total = 2 * (math.sin(5 * math.pi / 27) + t01 * math.sin(8 * math.pi / 27))
    assert net.downward[()].side == pytest.approx(
        2 * t01 * math.sin(11 * math.pi / 27) / total, rel=1e-13
    )
    assert net.downward[(0,)].side == pytest.approx(
        math.sin(17 * math.pi / 27) / total, rel=1e-13
    )
    cums = np.cumsum([s.length for s in net.boundary[2]])
    assert cums[-1] == pytest.approx(1.0, abs=1e-14)
    assert cums[1] == pytest.approx(0.5, abs=1e-13)  # palindromic chain


@pytest.mark.parametrize("m", [1, 2, 3])
def test_downward_chains_consistent(m):
    net = solve_sidelengths(make_angle_table(m))
    for d in net.downward.values():
        sums = [sum(s.length for s in chain) for chain in d.chains]
        assert max(sums) - min(sums) <= 1e-12 * max(sums)
        assert sums[0] == pytest.approx(d.side, rel=1e-12)
        for chain in d.chains:
            chain_vertex_triples(chain, m)  # asserts contiguity internally


def test_area_grows_with_level():
    areas = [face_area(solve_sidelengths(make_angle_table(m))) for m in range(4)]
    assert all(a < b for a, b in zip(areas, areas[1:]))


def test_scale_covariance():
    base = solve_sidelengths(make_angle_table(2), scale=1.0)
    scaled = solve_sidelengths(make_angle_table(2), scale=3.0)
    for w, g in base.upward.items():
        assert scaled.upward[w].sides == pytest.approx(
            tuple(3 * s for s in g.sides), rel=1e-13
        )
    assert face_area(scaled) == pytest.approx(9 * face_area(base), rel=1e-12)


def test_straight_normalization_shorter_than_chain():
    chain = solve_sidelengths(make_angle_table(3), "chain")
    straight = solve_sidelengths(make_angle_table(3), "straight")
    # the developed boundary bends inward, so pinning the chord to 1
    # stretches every length slightly
    ratio = straight.upward[(0, 0, 0)].sides[0] / chain.upward[(0, 0, 0)].sides[0]
    assert 1.0 < ratio < 1.05


def test_unknown_normalization_rejected():
    with pytest.raises(ValueError):
        solve_sidelengths(make_angle_table(1), "geodesic")


def test_corner_triples():
    assert corner_triple((0,), 1, 1) == (1, 1, 0)
    assert corner_triple((0, 0), 0, 2) == (4, 0, 0)
    assert corner_triple((0, 1), 2, 2) == (2, 1, 1)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4, 5])
def test_layout_vertex_angles(m):
    net = solve_sidelengths(make_angle_table(m))
    layout = layout_face(net)
    sums = layout_vertex_angles(net, layout)
    corner_expect = 2 * math.pi / 3 - math.pi / 3 ** (m + 1)
    boundary_expect = math.pi - 2 * math.pi / 3 ** (m + 1)
    interior_expect = 2 * math.pi - 2 * math.pi / 3 ** (m + 1)
    for triple, total in sums.items():
        zeros = sum(1 for x in triple if x == 0)
        expect = {2: corner_expect, 1: boundary_expect, 0: interior_expect}[zeros]
        assert total == pytest.approx(expect, abs=1e-12)


def test_layout_slit_pairs_equal_length():
    net = solve_sidelengths(make_angle_table(3))
    layout = layout_face(net)
    assert layout.slits  # nontrivial development
    for s in layout.slits:
        a = np.linalg.norm(s.leaf_xy[1] - s.leaf_xy[0])
        b = np.linalg.norm(s.poly_xy[1] - s.poly_xy[0])
        assert a == pytest.approx(b, rel=1e-10)


def test_layout_level0():
    net = solve_sidelengths(make_angle_table(0))
    layout = layout_face(net)
    xy = layout.leaf_xy[()]
    d01 = np.linalg.norm(xy[0] - xy[1])
    assert d01 == pytest.approx(1.0, rel=1e-12)
    assert not layout.slits


def test_exports_parse():
    net = solve_sidelengths(make_angle_table(2))
    data = json.loads(facenet_to_json(net))
    assert data["level"] == 2
    assert len(data["upward"]) == 9
    assert len(data["downward"]) == 4
    csv_text = layout_to_csv(layout_face(net))
    lines = csv_text.strip().splitlines()
    assert lines[0].startswith("word,")
    assert len(lines) == 10
