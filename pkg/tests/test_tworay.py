import pytest
from hypothesis import given, settings

from toric_sarkisov.classify import wps
from toric_sarkisov.fan import FanError, is_terminal, low_point, shed_volume, star_subdivide
from toric_sarkisov.tworay import (
    ANTIFLIP,
    DIVISORIAL,
    FIBRATION,
    FLIP,
    FLOP,
    SMALL_KINDS,
    GaleConfiguration,
    RankTwoModel,
    classify_relation,
    contract_divisor,
    cross_small,
    display_relation,
    extremal_crossings,
    fibration_data,
    flop_base,
    gale_dual,
    hyperplane_kind,
    local_flip_surgery,
)

from strategies import gale_models

P3 = wps((1, 1, 1, 1))
# P^3 blown up along the line through e1 and e2
Y_LINE = RankTwoModel.from_fan(star_subdivide(P3, (1, 1, 0)))


def test_gale_vectors_of_a_line_blowup():
    g = GaleConfiguration(Y_LINE.rays, basis=((1, 1, 0, 0, -1), (1, 1, 1, 1, 0)))
    assert g.vectors == ((1, 1), (1, 1), (0, 1), (0, 1), (-1, 0))
    assert g.n_chambers == 2
    assert sorted(map(sorted, g.groups)) == [[0, 1], [2, 3], [4]]


def test_line_blowup_crossings():
    kinds = {c.kind: c for c in extremal_crossings(Y_LINE)}
    assert set(kinds) == {DIVISORIAL, FIBRATION}
    assert kinds[DIVISORIAL].relation == (1, 1, 0, 0, -1)
    assert kinds[FIBRATION].relation == (0, 0, 1, 1, 1)
    bd = contract_divisor(Y_LINE, kinds[DIVISORIAL])
    assert bd.target.label() == "P^3" and (bd.r, bd.b, bd.index) == (1, (1, 1), 1)
    assert fibration_data(Y_LINE, kinds[FIBRATION]).label() == "P^2/P^1"
    with pytest.raises(FanError):
        cross_small(Y_LINE, kinds[DIVISORIAL])


def test_flip_from_p1112():
    Y = RankTwoModel.from_fan(star_subdivide(wps((1, 1, 1, 2)), (0, 0, -1)))
    small = [c for c in extremal_crossings(Y) if c.is_small]
    assert [c.kind for c in small] == [FLIP]
    (c,) = small
    assert display_relation(c.relation) == (2, 1, -1, -1)
    assert sorted(c.relation) == [-1, -1, 0, 1, 2]
    assert hyperplane_kind(Y, c) == FLIP
    Z = cross_small(Y, c)
    assert Z.cones == local_flip_surgery(Y, c).cones
    assert is_terminal(Z)
    # the shed shrinks across a flip
    assert shed_volume(Z) < shed_volume(Y)


def test_classify_relation():
    assert classify_relation((1, 1, 1, 0, 0)) == FIBRATION
    assert classify_relation((1, 1, 0, 0, -1)) == DIVISORIAL
    assert classify_relation((2, 1, 0, -1, -1)) == FLIP
    assert classify_relation((1, 1, 0, -1, -1)) == FLOP
    assert classify_relation((1, 1, 0, -1, -2)) == ANTIFLIP


def test_display_relation():
    assert display_relation((0, -1, 2, 0, 1, -1)) == (2, 1, 0, -1, -1)
    assert display_relation((1, -1, 0, 2, -2)) == (2, 1, -1, -2)
    assert display_relation((1, -1, 0, 2, -2), drop_zero=False) == (2, 1, 0, -1, -2)


@settings(max_examples=1000)
@given(gale_models())
def test_small_crossings_agree_with_surgery(Y):
    for c in extremal_crossings(Y):
        assert c.source == Y.chamber
        if not c.is_small:
            continue
        assert hyperplane_kind(Y, c) == c.kind
        if c.target is None or not Y.gale.is_moving(c.target):
            continue
        Z = cross_small(Y, c)
        assert Z.cones == local_flip_surgery(Y, c).cones
        back = Z.gale.crossing(Z.chamber, c.wall)
        assert back.relation == tuple(-x for x in c.relation)
        if c.kind in (FLIP, FLOP) and is_terminal(Y):
            assert low_point(Z) is None
        # shed volume: shrinks across flips, is kept by flops, grows across antiflips
        dv = shed_volume(Z) - shed_volume(Y)
        assert (dv < 0, dv == 0, dv > 0) == (c.kind == FLIP, c.kind == FLOP, c.kind == ANTIFLIP)


@settings(max_examples=300)
@given(gale_models())
def test_chamber_walk_is_exhaustive(Y):
    g = Y.gale
    seen = set()
    for a in range(g.n_chambers):
        if g.is_moving(a):
            m = RankTwoModel.in_chamber(g, a)
            assert m.chamber == a
            seen.add(m.cones)
    assert Y.cones in seen


@settings(max_examples=300)
@given(gale_models())
def test_divisorial_crossings_contract_to_simplices(Y):
    for c in extremal_crossings(Y):
        if c.kind != DIVISORIAL:
            continue
        bd = contract_divisor(Y, c)
        X = bd.target
        s = [X.rays[i] for i in bd.face]
        assert tuple(bd.r * x for x in bd.ray) == tuple(sum(b * r[j] for b, r in zip(bd.b, s)) for j in range(X.dim))


def test_flop_base_gorenstein():
    # a flop on a blowup of P(1,1,1,1,2): the base is Gorenstein of degree 567
    X = wps((1, 1, 1, 1, 2))
    Y = RankTwoModel.from_fan(star_subdivide(X, (0, 0, 0, -1)))
    a = Y.chamber
    g = Y.gale
    m = Y
    for _ in range(g.n_chambers):
        flops = [c for c in extremal_crossings(m) if c.kind == FLOP]
        if flops:
            fb = flop_base(m, flops[0])
            assert fb.data is not None
            assert (fb.data.degree, fb.data.h0) == (567, 115)
            return
        small = [c for c in extremal_crossings(m) if c.kind in SMALL_KINDS and c.target is not None and c.target != a]
        assert small
        a = m.chamber
        m = cross_small(m, small[0])
    pytest.fail("no flop met")


def test_gale_dual_incoming_basis():
    Y = RankTwoModel.from_fan(star_subdivide(wps((1, 1, 1, 2)), (0, 0, -1)))
    (c,) = [c for c in extremal_crossings(Y) if c.is_small]
    Z = cross_small(Y, c)
    back = Z.gale.crossing(Z.chamber, c.wall)
    t = gale_dual(Z, back)
    assert t.basis[0] == back.relation
    for i in back.zero:
        assert t.vectors[i][1] > 0


def test_gale_rejects_non_spanning_rays():
    with pytest.raises(FanError):
        GaleConfiguration(((1, 0), (0, 1), (1, 1), (2, 1)))
