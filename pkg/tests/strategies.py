"""Shared hypothesis strategies."""

from math import gcd

from hypothesis import assume
from hypothesis import strategies as st

from toric_sarkisov.lattice import kernel_basis, transpose
from toric_sarkisov.tworay import GaleConfiguration, RankTwoModel

# random Gale configurations: a 2 x k matrix with columns in the open upper
# half-plane (or on the positive x axis); the rays are its kernel


@st.composite
def gale_models(draw):
    k = draw(st.integers(5, 6))
    cols = []
    for _ in range(k):
        y = draw(st.integers(0, 4))
        x = draw(st.integers(-4, 4) if y else st.integers(1, 4))
        cols.append((x, y))
    B = [[c[0] for c in cols], [c[1] for c in cols]]
    K = kernel_basis(B)
    assume(len(K) == k - 2)
    rays = transpose(K)
    assume(all(gcd(*r) == 1 for r in rays) and len(set(rays)) == k)
    g = GaleConfiguration(tuple(map(tuple, rays)))
    moving = [a for a in range(g.n_chambers) if g.is_moving(a)]
    assume(moving)
    a = draw(st.sampled_from(moving))
    return RankTwoModel.in_chamber(g, a)


def random_unimodular(draw, n):
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(draw(st.integers(1, 8))):
        i, j = draw(st.sampled_from([(i, j) for i in range(n) for j in range(n) if i != j]))
        c = draw(st.integers(-2, 2))
        M = [row[:] for row in M]
        for k in range(n):
            M[i][k] += c * M[j][k]
    if draw(st.booleans()):
        M[0] = [-x for x in M[0]]
    return M
