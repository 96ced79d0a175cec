import pytest
from hypothesis import given, settings

from strategies import gale_models
from toric_sarkisov.classify import wps
from toric_sarkisov.fan import Fan, FanError, is_fano, is_weak_fano, star_subdivide
from toric_sarkisov.lattice import det
from toric_sarkisov.svg import (
    CONCAVE,
    CONVEX,
    FLAT,
    bend_counts,
    is_convex_shed,
    shed_off,
    shed_svg,
    wall_bends,
)

P2 = Fan([(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
P3 = wps((1, 1, 1, 1))


def test_p3_walls_are_convex():
    assert bend_counts(P3) == {CONVEX: 6, FLAT: 0, CONCAVE: 0}


def test_line_blowup_walls():
    Y = star_subdivide(P3, (1, 1, 0))
    counts = bend_counts(Y)
    assert counts[CONVEX] == 9 and sum(counts.values()) == 9


def test_surface_bends():
    S = Fan([(1, 0), (1, 1), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)])
    T = star_subdivide(S, (2, 1))
    bends = wall_bends(T)
    assert bends[(T.rays.index((1, 1)),)] == FLAT  # now a -2 curve
    U = star_subdivide(star_subdivide(T, (3, 1)), (3, 2))
    assert wall_bends(U)[(U.rays.index((2, 1)),)] == CONCAVE


@settings(max_examples=300)
@given(gale_models())
def test_bends_match_fano_conditions(Y):
    bends = wall_bends(Y).values()
    assert is_convex_shed(Y) == is_weak_fano(Y)
    assert all(b == CONVEX for b in bends) == is_fano(Y)


def test_svg_output():
    for F in (P2, P3, star_subdivide(P3, (1, 1, 0))):
        text = shed_svg(F, title="t")
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
        assert "<title>t</title>" in text
    with pytest.raises(FanError, match="dimension 4"):
        shed_svg(wps((1, 1, 1, 1, 1)))


@settings(max_examples=100)
@given(gale_models())
def test_off_faces_point_outwards(Y):
    if Y.dim != 3:
        with pytest.raises(FanError):
            shed_off(Y)
        return
    lines = shed_off(Y).splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    verts = [tuple(map(int, l.split())) for l in lines[2 : 2 + nv]]
    assert verts == list(Y.rays) and nf == len(Y.cones)
    for l in lines[2 + nv :]:
        _, i, j, k = map(int, l.split())
        assert det([verts[i], verts[j], verts[k]]) > 0
