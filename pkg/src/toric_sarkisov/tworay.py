"""The two-ray game on complete simplicial fans with ``n + 2`` rays.

The integral relations among the rays form a rank-2 lattice. Writing a basis
of it as the rows of a ``2 x (n+2)`` matrix, column ``i`` is the Gale vector
``w_i`` of ray ``i``. All Gale vectors lie in one open half-plane (there is a
strictly positive relation), so they can be sorted by angle. Between two
consecutive Gale directions lies a chamber; for a point ``omega`` of a
chamber, the fan's top cones are the complements of the pairs ``{j, k}``
with ``omega`` strictly inside ``cone(w_j, w_k)``.

Every model in one link shares the Gale configuration, so a link is a walk
through consecutive chambers. The wall between two chambers is a Gale
direction ``d``; the relation recorded for crossing it is ``b_i = lam(w_i)``
with ``lam`` the primitive functional vanishing on ``d`` and positive on the
chamber being left.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

from .fan import (
    Fan,
    FanError,
    GorensteinData,
    SimplexVariety,
    gorenstein_data,
    is_fano,
    is_weak_fano,
    low_point,
    point_relation,
)
from .lattice import CHECKS, IntMatrix, IntVector, as_matrix, kernel_basis, primitive_part, smith_form, transpose, vgcd

FLIP, FLOP, ANTIFLIP, DIVISORIAL, FIBRATION = "flip", "flop", "antiflip", "divisorial", "fibration"
SMALL_KINDS = (FLIP, FLOP, ANTIFLIP)


def _cross(a: Sequence[int], b: Sequence[int]) -> int:
    return a[0] * b[1] - a[1] * b[0]


def classify_relation(b: Sequence[int]) -> str:
    neg = sum(1 for x in b if x < 0)
    if neg == 0:
        return FIBRATION
    if neg == 1:
        return DIVISORIAL
    s = sum(b)
    return FLIP if s > 0 else FLOP if s == 0 else ANTIFLIP


@dataclass(frozen=True)
class WallCrossing:
    """One extremal contraction of a rank-2 model, seen from that model.

    ``relation[i]`` is the coefficient of ray ``i``; entries are positive on
    rays whose Gale vectors sit on the model's side of the wall, zero on the
    wall and negative beyond it.
    """

    relation: IntVector
    kind: str
    wall: int
    source: int
    target: int | None

    @property
    def degree(self) -> int:
        return sum(self.relation)

    @property
    def positive(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.relation) if x > 0)

    @property
    def negative(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.relation) if x < 0)

    @property
    def zero(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.relation) if x == 0)

    @property
    def is_small(self) -> bool:
        return self.kind in SMALL_KINDS


class GaleConfiguration:
    """Gale vectors of ``n + 2`` rays, sorted into directions and chambers."""

    __slots__ = ("rays", "basis", "vectors", "directions", "groups")

    def __init__(self, rays: IntMatrix, basis: IntMatrix | None = None):
        self.rays = rays
        n = len(rays[0])
        if len(rays) != n + 2:
            raise FanError(f"a rank-2 model in dimension {n} has {n + 2} rays, got {len(rays)}")
        if basis is None:
            basis = kernel_basis(transpose(rays))
        if len(basis) != 2:
            raise FanError("rays of rank < n")
        self.basis = basis
        self.vectors = tuple(zip(basis[0], basis[1]))
        if any(v == (0, 0) for v in self.vectors):
            raise FanError("a ray is not involved in any relation; rays do not positively span")
        dirs: list[tuple[int, int]] = []
        groups: list[list[int]] = []
        for i, w in enumerate(self.vectors):
            d, _ = primitive_part(w)
            for k, e in enumerate(dirs):
                if e == d:
                    groups[k].append(i)
                    break
            else:
                dirs.append(d)
                groups.append([i])
        # all directions lie in an open half-plane: sort counterclockwise
        ref = dirs[0]
        for d in dirs:
            if _cross(d, ref) > 0:
                ref = d
        if any(_cross(ref, d) < 0 or (d != ref and _cross(ref, d) == 0) for d in dirs):
            raise FanError("rays do not positively span")
        order = sorted(
            range(len(dirs)),
            key=functools.cmp_to_key(lambda a, b: -_cross(dirs[a], dirs[b])),
        )
        self.directions = tuple(dirs[k] for k in order)
        self.groups = tuple(tuple(groups[k]) for k in order)

    @property
    def n_chambers(self) -> int:
        return len(self.directions) - 1

    def split(self, a: int) -> tuple[list[int], list[int]]:
        left = [i for g in self.groups[: a + 1] for i in g]
        right = [i for g in self.groups[a + 1 :] for i in g]
        return left, right

    def chamber_cones(self, a: int) -> list[tuple[int, ...]]:
        left, right = self.split(a)
        k = len(self.rays)
        return sorted(tuple(x for x in range(k) if x not in (j, l)) for j in left for l in right)

    def is_moving(self, a: int) -> bool:
        left, right = self.split(a)
        return len(left) > 1 and len(right) > 1

    def interior_point(self, a: int) -> tuple[int, int]:
        d, e = self.directions[a], self.directions[a + 1]
        return d[0] + e[0], d[1] + e[1]

    def find_chamber(self, cones: Sequence[Sequence[int]]) -> int:
        target = sorted(tuple(sorted(c)) for c in cones)
        for a in range(self.n_chambers):
            if self.chamber_cones(a) == target:
                return a
        raise FanError("fan is not a chamber of its Gale configuration")

    def crossing(self, a: int, wall: int) -> WallCrossing:
        """Relation of the wall ``directions[wall]`` seen from chamber ``a``."""
        if wall not in (a, a + 1):
            raise ValueError("wall does not bound the chamber")
        d = self.directions[wall]
        omega = self.interior_point(a)
        sign = 1 if _cross(d, omega) > 0 else -1
        lam = (-sign * d[1], sign * d[0])  # lam(x) = sign * cross(d, x)
        b = tuple(lam[0] * r0 + lam[1] * r1 for r0, r1 in zip(*self.basis))
        assert vgcd(b) == 1
        kind = classify_relation(b)
        if wall == a:
            target = a - 1 if a > 0 else None
        else:
            target = a + 1 if a + 1 < self.n_chambers else None
        if kind == FIBRATION:
            target = None
        return WallCrossing(b, kind, wall, a, target)


@functools.lru_cache(maxsize=4096)
def _gale(rays: IntMatrix) -> GaleConfiguration:
    return GaleConfiguration(rays)


class RankTwoModel(Fan):
    """A complete simplicial fan on ``n + 2`` rays with its Gale data."""

    __slots__ = ("gale", "chamber")

    def __init__(self, rays: Sequence[Sequence[int]], cones):
        rays = as_matrix(rays)
        super().__init__(rays, cones)
        if self.n_rays != self.dim + 2:
            raise FanError(f"a rank-2 model in dimension {self.dim} has {self.dim + 2} rays")
        self.gale = _gale(self.rays)
        self.chamber = self.gale.find_chamber(self.cones)

    @classmethod
    def from_fan(cls, fan: Fan) -> "RankTwoModel":
        return fan if isinstance(fan, RankTwoModel) else cls(fan.rays, fan.cones)

    @classmethod
    def in_chamber(cls, gale: GaleConfiguration, a: int) -> "RankTwoModel":
        return cls(gale.rays, gale.chamber_cones(a))


@dataclass(frozen=True)
class GaleTable:
    basis: IntMatrix
    vectors: tuple[tuple[int, int], ...]


def gale_dual(model: RankTwoModel, incoming: WallCrossing | None = None) -> GaleTable:
    """Gale vectors of ``model`` in a canonical basis of the relation lattice.

    Without ``incoming`` the basis is the Hermite form of the relation
    lattice. With it, the first basis vector is the incoming relation, and
    the second is shifted by multiples of the first so that the Gale vectors
    on the incoming wall have positive second coordinate and the opposite
    wall of the chamber is the first direction with positive second
    coordinate reachable by such a shift.
    """
    g = model.gale
    if incoming is None:
        return GaleTable(g.basis, g.vectors)
    b = incoming.relation
    # a complement of b in the relation lattice: the basis row not parallel to b
    c = None
    for row in g.basis:
        M = [list(b), list(row)]
        if smith_form(M).invariant_factors == (1, 1):
            c = row
            break
    if c is None:
        c = tuple(x + y for x, y in zip(*g.basis))
        if smith_form([list(b), list(c)]).invariant_factors != (1, 1):
            raise FanError("relation lattice basis could not be completed")
    on_wall = [i for i, x in enumerate(b) if x == 0]
    if c[on_wall[0]] < 0:
        c = tuple(-x for x in c)
    other = incoming.wall + 1 if incoming.wall == model.chamber else model.chamber
    i = g.groups[other][0]
    k = (-c[i]) // b[i] + 1
    c = tuple(x + k * y for x, y in zip(c, b))
    basis = (tuple(b), c)
    return GaleTable(basis, tuple(zip(*basis)))


def extremal_crossings(model: RankTwoModel) -> tuple[WallCrossing, WallCrossing]:
    a = model.chamber
    return model.gale.crossing(a, a), model.gale.crossing(a, a + 1)


def cross_small(model: RankTwoModel, crossing: WallCrossing) -> RankTwoModel:
    """The other side of a flip, flop or antiflip, by the chamber walk."""
    if crossing.kind not in SMALL_KINDS:
        raise FanError(f"crossing is {crossing.kind}, not small")
    if crossing.source != model.chamber:
        raise FanError("crossing does not belong to this model")
    out = RankTwoModel.in_chamber(model.gale, crossing.target)
    if CHECKS and crossing.kind != ANTIFLIP:
        assert low_point(model) is not None or low_point(out) is None, "flip or flop lost terminality"
    return out


def local_flip_surgery(model: Fan, crossing: WallCrossing) -> Fan:
    """Re-triangulate each amalgam by its own circuit; oracle for :func:`cross_small`."""
    k = model.n_rays
    cones = set(model.cones)
    zero = [i for i, x in enumerate(crossing.relation) if x == 0]
    # walls carry at least one Gale vector, so ``zero`` is never empty
    for z in zero:
        D = [i for i in range(k) if i != z]
        (c,) = kernel_basis(transpose([model.rays[i] for i in D]))
        plus = {tuple(x for x in D if x != D[j]) for j in range(len(D)) if c[j] > 0}
        minus = {tuple(x for x in D if x != D[j]) for j in range(len(D)) if c[j] < 0}
        inside = {cone for cone in cones if z not in cone}
        if inside == plus:
            cones = (cones - plus) | minus
        elif inside == minus:
            cones = (cones - minus) | plus
        else:
            raise FanError(f"cones without ray {z} do not triangulate an amalgam")
    return Fan(model.rays, cones)


def hyperplane_kind(model: Fan, crossing: WallCrossing) -> str:
    """Kind of a small crossing read off the position of the extra ray."""
    p = crossing.positive[0]
    z = crossing.zero[0]
    cone = tuple(i for i in range(model.n_rays) if i not in (z, p))
    val = model.covector(cone)(model.rays[p])
    return FLIP if val < 1 else FLOP if val == 1 else ANTIFLIP


@dataclass(frozen=True)
class Blowdown:
    """A divisorial contraction ``Y -> X'`` recorded as an extraction from ``X'``.

    ``face`` indexes the rays of ``target`` spanning the smallest cone that
    contains the contracted ray, ``r v = sum b_i s_i`` over that face, and
    ``index`` is the lattice index of the face.
    """

    target: SimplexVariety
    ray: IntVector
    face: tuple[int, ...]
    r: int
    b: IntVector
    index: int
    relation: IntVector


def contract_divisor(model: RankTwoModel, crossing: WallCrossing) -> Blowdown:
    if crossing.kind != DIVISORIAL:
        raise FanError(f"crossing is {crossing.kind}, not divisorial")
    (j,) = crossing.negative
    keep = [i for i in range(model.n_rays) if i != j]
    X = SimplexVariety([model.rays[i] for i in keep])
    v = model.rays[j]
    face, r, b, index = point_relation(X, v)
    return Blowdown(X, v, face, r, b, index, crossing.relation)


@dataclass(frozen=True)
class Fibration:
    fibre: SimplexVariety
    base: SimplexVariety
    relation: IntVector

    def label(self) -> str:
        return f"{self.fibre.label()}/{self.base.label()}"


def fibration_data(model: RankTwoModel, crossing: WallCrossing) -> Fibration:
    """Fibre and base of a Mori fibre space contraction."""
    if crossing.kind != FIBRATION:
        raise FanError(f"crossing is {crossing.kind}, not a fibration")
    P = crossing.positive
    Z = crossing.zero
    n = model.dim
    snf = smith_form(transpose([model.rays[i] for i in P]))
    r = snf.rank
    U = snf.U
    fibre_rays = [tuple(sum(U[k][m] * model.rays[i][m] for m in range(n)) for k in range(r)) for i in P]
    base_rays = []
    for i in Z:
        img = tuple(sum(U[k][m] * model.rays[i][m] for m in range(n)) for k in range(r, n))
        w, mult = primitive_part(img)
        assert mult >= 1
        base_rays.append(w)
    fibre = SimplexVariety(fibre_rays)
    base = SimplexVariety(base_rays)
    assert fibre.weights == tuple(crossing.relation[i] for i in P)
    return Fibration(fibre, base, crossing.relation)


def is_fano_model(model: Fan) -> bool:
    return is_fano(model)


@dataclass(frozen=True)
class FlopBase:
    """The anticanonical model over a flopping contraction."""

    cones: tuple[tuple[int, ...], ...]
    data: GorensteinData | None


def flop_base(model: RankTwoModel, crossing: WallCrossing, count_points: bool = True) -> FlopBase:
    """Amalgamated fan of the flop base and its Gorenstein data.

    Across a flop the base is the anticanonical model of ``model``, whose
    polytope is cut out by the same rays; the data is ``None`` when
    ``model`` is not weak Fano.
    """
    if crossing.kind != FLOP:
        raise FanError(f"crossing is {crossing.kind}, not a flop")
    k = model.n_rays
    P = set(crossing.positive)
    cones = set(model.cones)
    merged = set()
    for z in crossing.zero:
        D = tuple(i for i in range(k) if i != z)
        cones -= {tuple(x for x in D if x != p) for p in P}
        merged.add(D)
    data = gorenstein_data(model, count_points) if is_weak_fano(model) else None
    return FlopBase(tuple(sorted(cones | merged)), data)


# ---------------------------------------------------------------------------
# display


def display_relation(b: Sequence[int], drop_zero: bool = True) -> IntVector:
    """Order a relation as positives descending, zeros, negatives by size.

    One zero is dropped when present: it belongs to the ray outside the
    amalgam.
    """
    pos = sorted((x for x in b if x > 0), reverse=True)
    zer = [x for x in b if x == 0]
    neg = sorted((x for x in b if x < 0), reverse=True)
    if drop_zero and zer:
        zer = zer[1:]
    return tuple(pos + zer + neg)


def format_relation(b: Sequence[int]) -> str:
    return "(" + ",".join(map(str, b)) + ")"
