from fractions import Fraction
from itertools import permutations
from math import factorial, gcd, prod

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from toric_sarkisov.classify import fake_wps, well_formed, wps
from toric_sarkisov.fan import (
    Fan,
    FanError,
    FanFormatError,
    SimplexVariety,
    automorphisms,
    cone_covector,
    discrepancy,
    format_fan_text,
    gorenstein_data,
    is_canonical,
    is_fano,
    is_terminal,
    is_weak_fano,
    low_point,
    normal_form,
    parse_fan_text,
    point_relation,
    shed_volume,
    star_subdivide,
    wps_label,
)
from toric_sarkisov.lattice import box_points_scan, det, matvec

from strategies import random_unimodular

E1, E2, E3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
P3 = wps((1, 1, 1, 1))


def test_covector_of_a_cone_of_p3_blown_up():
    cov = cone_covector([E1, E3, (-1, -1, -1)])
    assert cov.coefficients == (1, -3, 1)


@given(st.integers(-20, 20).filter(lambda a: a != 1), st.integers(-20, 20))
def test_covector_with_moving_ray(a, b):
    cov = cone_covector([E3, (-1, -1, -1), (a, 1, b)])
    assert cov.coefficients == (Fraction(3 - b, a - 1), Fraction(b - 2 * a - 1, a - 1), 1)


def test_terminal_canonical_examples():
    X = wps((1, 1, 4, 6))
    assert not is_terminal(X) and is_canonical(X)
    cone, point, t = low_point(X)
    assert sum(t) == 1 and point == (1, 1, 2)
    assert is_terminal(P3) and is_terminal(wps((1, 1, 1, 2)))
    assert is_terminal(fake_wps((1, 1, 1, 1), (1, 2, 3, 4), 5))
    # 1/2(1,1,0) along a curve: canonical, not terminal
    assert not is_terminal(wps((1, 1, 2, 2)))


def test_discrepancy_examples():
    assert discrepancy(P3, (1, 1, 1)) == 2
    assert discrepancy(P3, (1, 1, 0)) == 1
    X = wps((1, 1, 4, 6))
    assert discrepancy(X, (1, 1, 2)) == 0
    with pytest.raises(FanError):
        discrepancy(P3, (0, 0, 0))


def terminal_by_scan(fan):
    for c in fan.cones:
        for _, t in box_points_scan([fan.rays[i] for i in c]):
            if any(t) and sum(t) <= 1:
                return False
    return True


weight_tuples = st.integers(4, 5).flatmap(lambda k: st.lists(st.integers(1, 7), min_size=k, max_size=k)).filter(well_formed)


@settings(max_examples=200)
@given(weight_tuples)
def test_wps_invariants(w):
    X = wps(w)
    n = X.dim
    assert X.sorted_weights == tuple(sorted(w))
    assert X.discriminant == ()
    assert all(x == 0 for x in matvec(list(zip(*X.rays)), X.weights))
    for i in range(X.n_rays):
        assert abs(X.cone_det(X.cone_omitting(i))) == X.weights[i]
    assert shed_volume(X) == Fraction(sum(w), factorial(n))
    assert is_terminal(X) == terminal_by_scan(X)
    assert is_fano(X)


def monomials(weights, degree):
    # exponent vectors with weighted sum == degree, counted by dynamic programming
    ways = [1] + [0] * degree
    for a in weights:
        for d in range(a, degree + 1):
            ways[d] += ways[d - a]
    return ways[degree]


@settings(max_examples=40)
@given(st.lists(st.integers(1, 4), min_size=4, max_size=4).filter(well_formed))
def test_anticanonical_degree_of_wps(w):
    g = gorenstein_data(wps(w))
    assert g.degree == Fraction(sum(w) ** 3, prod(w))
    assert g.h0 == monomials(w, sum(w))


def test_gorenstein_examples():
    g = gorenstein_data(P3)
    assert (g.degree, g.h0) == (64, 35) and g.is_lattice
    g = gorenstein_data(wps((1, 1, 1, 1, 1)))
    assert (g.degree, g.h0) == (625, 126)


def test_fake_wps():
    X = fake_wps((1, 1, 1, 1), (1, 2, 3, 4), 5)
    assert X.label() == "P^3/Z5" and X.index == 5
    assert all(abs(X.cone_det(X.cone_omitting(i))) == 5 for i in range(4))
    Y = fake_wps((2, 3, 5, 5, 13), (0, 1, 3, 4, 3), 5)
    assert Y.label() == "P(2,3,5,5,13)/Z5"
    with pytest.raises(FanError):
        fake_wps((1, 1, 1, 1), (1, 0, 0, 0), 2)  # a reflection: one ray stops being primitive


def test_labels():
    assert wps_label((1, 1, 1, 1)) == "P^3"
    assert wps_label((3, 1, 2, 1)) == "P(1,1,2,3)"
    assert wps_label((1, 1, 1, 1), (5,)) == "P^3/Z5"
    assert wps_label((1, 1, 2, 2), (2, 2)) == "P(1,1,2,2)/Z2xZ2"


def test_fan_validation():
    with pytest.raises(FanError, match="not primitive"):
        Fan([(2, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(FanError, match="distinct"):
        Fan([(1, 0), (1, 0), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(FanError):
        Fan([(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2)])
    with pytest.raises(FanError):
        SimplexVariety([(1, 0), (0, 1), (1, 1)])


def test_star_subdivide_blowup_of_a_line():
    Y = star_subdivide(P3, (1, 1, 0))
    assert Y.n_rays == 5 and len(Y.cones) == 6
    assert is_terminal(Y) and is_fano(Y)
    with pytest.raises(FanError, match="already a ray"):
        star_subdivide(P3, E1)
    with pytest.raises(FanError, match="not primitive"):
        star_subdivide(P3, (2, 2, 0))


@settings(max_examples=300)
@given(weight_tuples, st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_star_subdivide_shed_volume(w, v):
    X = wps(w)
    v = tuple(v[: X.dim])
    assume(any(v) and gcd(*v) == 1 and v not in X.rays)
    Y = star_subdivide(X, v)
    _, face, _ = X.locate(v)
    above = sum(abs(X.cone_det(c)) for c in X.cones if set(face) <= set(c))
    assert (shed_volume(Y) - shed_volume(X)) * factorial(X.dim) == (X.psi(v) - 1) * above
    assert Y.psi(v) == 1


def test_point_relation():
    assert point_relation(P3, (1, 1, 0)) == ((0, 1), 1, (1, 1), 1)
    # the 1/2(1,1,1) point of P(1,1,1,2)
    assert point_relation(wps((1, 1, 1, 2)), (1, 1, 1)) == ((0, 1, 2), 2, (1, 1, 1), 2)


def test_fano_checks():
    assert is_fano(P3) and is_weak_fano(P3)
    # blowing up P^2 at a torus-fixed point, then again on the exceptional curve
    S = Fan([(1, 0), (1, 1), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert is_fano(S)
    T = star_subdivide(S, (2, 1))
    assert not is_fano(T) and is_weak_fano(T)
    U = star_subdivide(star_subdivide(T, (3, 1)), (3, 2))
    assert not is_weak_fano(U)  # (2,1) now spans a -3 curve


@settings(max_examples=100)
@given(st.data(), st.sampled_from([(1, 1, 1, 1), (1, 1, 1, 2), (1, 2, 3, 5), (1, 1, 2, 3, 4)]))
def test_normal_form_invariance(data, w):
    X = wps(w)
    A = random_unimodular(data.draw, X.dim)
    assert abs(det(A)) == 1
    order = data.draw(st.permutations(range(X.n_rays)))
    Y = [matvec(A, X.rays[i]) for i in order]
    assert normal_form(Y) == X.key


def test_normal_form_separates():
    keys = {wps(w).key for w in [(1, 1, 1, 1), (1, 1, 1, 2), (1, 1, 2, 3), (1, 2, 3, 5)]}
    keys.add(fake_wps((1, 1, 1, 1), (1, 2, 3, 4), 5).key)
    assert len(keys) == 5


def test_automorphism_counts():
    assert len(automorphisms(P3)) == 24
    assert len(automorphisms(wps((1, 1, 1, 2)))) == 6
    assert len(automorphisms(wps((1, 2, 3, 5)))) == 1
    X = wps((1, 1, 1, 2))
    for A in automorphisms(X):
        imgs = {matvec(A, r) for r in X.rays}
        assert imgs == set(X.rays)


def test_text_round_trip():
    Y = star_subdivide(P3, (1, 1, 0))
    for fan in (P3, Y):
        (rays, cones, name), = parse_fan_text(format_fan_text(fan, name="x"))
        assert name == "x" and rays == fan.rays
        rebuilt = SimplexVariety(rays) if cones is None else Fan(rays, cones)
        assert rebuilt.cones == fan.cones


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("3 4\n1 0 0\n0 1 0\n", 3),
        ("3 4\n1 0 0\n0 1 x\n0 0 1\n-1 -1 -1\n", 3),
        ("3 4\n1 0\n", 2),
        ("3 5\n1 0 0\n0 1 0\n0 0 1\n-1 -1 -1\n1 1 0\n", 6),
        ("2\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(FanFormatError) as exc:
        parse_fan_text(text)
    assert exc.value.line == line


def test_permuted_rays_same_key():
    X = wps((1, 1, 2, 3))
    for perm in list(permutations(range(4)))[:6]:
        assert SimplexVariety([X.rays[i] for i in perm]).key == X.key
