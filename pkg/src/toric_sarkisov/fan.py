"""Complete simplicial fans, sheds and the singularity/Fano predicates.

A fan is a table of primitive rays plus top-dimensional cones given as
sorted tuples of ray indices. Each cone carries its support covector
``psi`` in integral form ``(g, r)`` with ``g . ray == r`` on the cone's rays,
so ``psi(x) = g . x / r``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial, floor, ceil, lcm
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .lattice import (
    IntMatrix,
    IntVector,
    adjugate,
    as_matrix,
    box_group,
    det,
    hermite_form,
    kernel_basis,
    matvec,
    rank,
    smith_form,
    transpose,
    vgcd,
)


class FanError(ValueError):
    pass


class FanFormatError(FanError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ---------------------------------------------------------------------------
# per-cone linear data


@dataclass(frozen=True)
class SupportCovector:
    """The linear form equal to 1 on every ray of a top cone.

    Stored integrally: ``g . x == r`` on the rays, ``r > 0``, ``gcd(g, r) == 1``.
    """

    g: IntVector
    r: int

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.r) for x in self.g)

    def __call__(self, x: Sequence[int]) -> Fraction:
        return Fraction(sum(a * b for a, b in zip(self.g, x)), self.r)

    def scaled(self, x: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.g, x))


@functools.lru_cache(maxsize=1 << 16)
def _cone_linear(rays: IntMatrix) -> tuple[int, IntMatrix, SupportCovector]:
    S = transpose(rays)
    D = det(S)
    if D == 0:
        raise FanError("degenerate cone: rays are linearly dependent")
    adj = adjugate(S)
    g = [sum(adj[i][j] for i in range(len(adj))) for j in range(len(adj))]
    r = D
    if r < 0:
        g, r = [-x for x in g], -r
    c = vgcd([*g, r])
    return D, adj, SupportCovector(tuple(x // c for x in g), r // c)


def barycentric(rays: Sequence[Sequence[int]], x: Sequence[int]) -> tuple[Fraction, ...]:
    D, adj, _ = _cone_linear(as_matrix(rays))
    return tuple(Fraction(v, D) for v in matvec(adj, x))


def cone_covector(rays: Sequence[Sequence[int]]) -> SupportCovector:
    return _cone_linear(as_matrix(rays))[2]


@functools.lru_cache(maxsize=1 << 16)
def _cone_low_point(rays: IntMatrix, canonical: bool) -> tuple | None:
    """First nonzero box point with psi <= 1 (psi < 1 if ``canonical``)."""
    D, gens, orders = box_group(rays)
    bound = abs(D) - 1 if canonical else abs(D)
    if gens.shape[1] == 0:
        return None
    idx = _kernels.first_low_point(gens, orders, abs(D), bound)
    if idx < 0:
        return None
    T = _kernels.group_elements(gens, orders, abs(D))[idx]
    t = tuple(Fraction(int(x), abs(D)) for x in T)
    p = tuple(int(sum(int(x) * r[i] for x, r in zip(T, rays)) // abs(D)) for i in range(len(rays[0])))
    return p, t


# ---------------------------------------------------------------------------


class Fan:
    """A complete simplicial fan, validated on construction.

    Args:
        rays: primitive, pairwise distinct lattice vectors.
        cones: top-dimensional cones as collections of ray indices.
    """

    __slots__ = ("rays", "cones", "dim", "_linear")

    def __init__(self, rays: Sequence[Sequence[int]], cones: Iterable[Iterable[int]]):
        rays = as_matrix(rays)
        if not rays:
            raise FanError("a fan needs rays")
        n = len(rays[0])
        if not 1 <= n <= 5:
            raise FanError(f"dimension {n} unsupported")
        if len(set(rays)) != len(rays):
            raise FanError("rays must be distinct")
        for v in rays:
            if vgcd(v) != 1:
                raise FanError(f"ray {v} is not primitive")
        cones = tuple(sorted(tuple(sorted(set(c))) for c in cones))
        if len(set(cones)) != len(cones):
            raise FanError("repeated cone")
        for c in cones:
            if len(c) != n or not all(0 <= i < len(rays) for i in c):
                raise FanError(f"cone {c} is not a top-dimensional simplicial cone")
        if {i for c in cones for i in c} != set(range(len(rays))):
            raise FanError("every ray must lie in some cone")
        self.rays = rays
        self.cones = cones
        self.dim = n
        self._linear = {c: _cone_linear(tuple(rays[i] for i in c)) for c in cones}
        self._check_complete()

    def _check_complete(self) -> None:
        n = self.dim
        facets: dict[tuple, list[tuple[tuple, int]]] = {}
        for c in self.cones:
            for i in c:
                f = tuple(j for j in c if j != i)
                facets.setdefault(f, []).append((c, i))
        for f, owners in facets.items():
            if len(owners) != 2:
                raise FanError(f"facet {f} is shared by {len(owners)} cones; fan not complete")
            if n == 1:
                (_, a), (_, b) = owners
                if self.rays[a][0] * self.rays[b][0] >= 0:
                    raise FanError("cones overlap")
                continue
            frays = [self.rays[j] for j in f]
            (_, a), (_, b) = owners
            sa = det(transpose([*frays, self.rays[a]]))
            sb = det(transpose([*frays, self.rays[b]]))
            if sa * sb >= 0:
                raise FanError(f"cones on facet {f} overlap")
        c0 = self.cones[0]
        p = [sum((k + 1) * self.rays[i][j] for k, i in enumerate(c0)) for j in range(n)]
        hits = sum(1 for c in self.cones if self.contains(c, p))
        if hits != 1:
            raise FanError("cones overlap; fan covers space more than once")

    # -- per cone -------------------------------------------------------

    def cone_rays(self, cone: tuple[int, ...]) -> IntMatrix:
        return tuple(self.rays[i] for i in cone)

    def cone_det(self, cone: tuple[int, ...]) -> int:
        return abs(self._linear[cone][0])

    def covector(self, cone: tuple[int, ...]) -> SupportCovector:
        return self._linear[cone][2]

    def coordinates(self, cone: tuple[int, ...], x: Sequence[int]) -> tuple[Fraction, ...]:
        D, adj, _ = self._linear[cone]
        return tuple(Fraction(v, D) for v in matvec(adj, x))

    def contains(self, cone: tuple[int, ...], x: Sequence[int]) -> bool:
        D, adj, _ = self._linear[cone]
        return all(v * D >= 0 for v in matvec(adj, x))

    def locate(self, x: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...], tuple[Fraction, ...]]:
        """Top cone containing ``x``, the smallest face containing it, and
        the barycentric coefficients in that top cone."""
        for c in self.cones:
            if self.contains(c, x):
                t = self.coordinates(c, x)
                face = tuple(i for i, s in zip(c, t) if s)
                return c, face, t
        raise FanError("point outside the support")  # complete fans never get here

    def psi(self, x: Sequence[int]) -> Fraction:
        c, _, _ = self.locate(x)
        return self.covector(c)(x)

    # -- derived --------------------------------------------------------

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def __eq__(self, other) -> bool:
        return isinstance(other, Fan) and self.rays == other.rays and self.cones == other.cones

    def __hash__(self) -> int:
        return hash((self.rays, self.cones))

    def __repr__(self) -> str:
        return f"Fan(rays={list(self.rays)}, cones={list(self.cones)})"

    def cone_key_set(self) -> frozenset:
        """Cones as sets of ray vectors, independent of ray ordering."""
        return frozenset(frozenset(self.rays[i] for i in c) for c in self.cones)


def simplex_cones(k: int) -> list[tuple[int, ...]]:
    return [tuple(j for j in range(k) if j != i) for i in range(k)]


class SimplexVariety(Fan):
    """A (fake) weighted projective space: the simplex fan on ``n + 1`` rays.

    ``weights`` is the positive primitive relation among the rays in ray
    order; ``discriminant`` lists the nontrivial invariant factors of
    ``Z^n / <rays>``.
    """

    __slots__ = ("weights", "discriminant", "_key")

    def __init__(self, rays: Sequence[Sequence[int]]):
        rays = as_matrix(rays)
        if not rays:
            raise FanError("a fan needs rays")
        n = len(rays[0])
        if len(rays) != n + 1:
            raise FanError(f"a simplex fan in dimension {n} has {n + 1} rays, got {len(rays)}")
        super().__init__(rays, simplex_cones(n + 1))
        M = transpose(rays)
        (w,) = kernel_basis(M)
        if w[0] < 0:
            w = tuple(-x for x in w)
        if any(x <= 0 for x in w):
            raise FanError("rays do not positively span")
        self.weights: IntVector = w
        self.discriminant: IntVector = tuple(d for d in smith_form(M).invariant_factors if d > 1)
        self._key = None

    @property
    def key(self) -> str:
        if self._key is None:
            self._key = normal_form(self.rays)
        return self._key

    @property
    def sorted_weights(self) -> IntVector:
        return tuple(sorted(self.weights))

    @property
    def index(self) -> int:
        out = 1
        for d in self.discriminant:
            out *= d
        return out

    def cone_omitting(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in range(self.n_rays) if j != i)

    def label(self) -> str:
        return wps_label(self.sorted_weights, self.discriminant)

    def __repr__(self) -> str:
        return f"SimplexVariety({self.label()}, rays={list(self.rays)})"


def wps_label(weights: Sequence[int], discriminant: Sequence[int] = ()) -> str:
    w = tuple(sorted(weights))
    if all(x == 1 for x in w):
        base = f"P^{len(w) - 1}"
    else:
        base = "P(" + ",".join(map(str, w)) + ")"
    if discriminant:
        base += "/" + "x".join(f"Z{d}" for d in discriminant)
    return base


# ---------------------------------------------------------------------------
# operations


def support_covector(fan: Fan, cone: Sequence[int]) -> SupportCovector:
    cone = tuple(sorted(cone))
    if cone not in fan._linear:
        if len(cone) != fan.dim:
            raise FanError("cone is not top-dimensional")
        return cone_covector(fan.cone_rays(cone))
    return fan.covector(cone)


def discrepancy(fan: Fan, v: Sequence[int]) -> Fraction:
    if not any(v):
        raise FanError("zero vector has no discrepancy")
    return fan.psi(v) - 1


def low_point(fan: Fan, canonical: bool = False):
    """A witness against terminality (or canonicity): ``(cone, point, t)``."""
    for c in fan.cones:
        hit = _cone_low_point(fan.cone_rays(c), canonical)
        if hit is not None:
            return c, hit[0], hit[1]
    return None


def is_terminal(fan: Fan) -> bool:
    return low_point(fan) is None


def is_canonical(fan: Fan) -> bool:
    return low_point(fan, canonical=True) is None


def is_terminal_cone(rays: Sequence[Sequence[int]]) -> bool:
    return _cone_low_point(as_matrix(rays), False) is None


def is_fano(fan: Fan) -> bool:
    """Strict convexity of psi: every ray off a cone lies strictly under its roof."""
    for c in fan.cones:
        cov = fan.covector(c)
        cs = set(c)
        for i, u in enumerate(fan.rays):
            if i not in cs and cov.scaled(u) >= cov.r:
                return False
    return True


def is_weak_fano(fan: Fan) -> bool:
    for c in fan.cones:
        cov = fan.covector(c)
        if any(cov.scaled(u) > cov.r for u in fan.rays):
            return False
    return True


def weights_and_discriminant(X: SimplexVariety) -> tuple[IntVector, IntVector]:
    return X.sorted_weights, X.discriminant


def star_subdivide(fan: Fan, v: Sequence[int]) -> Fan:
    v = tuple(int(x) for x in v)
    if not any(v):
        raise FanError("cannot subdivide at the origin")
    if v in fan.rays:
        raise FanError(f"{v} is already a ray")
    if vgcd(v) != 1:
        raise FanError(f"{v} is not primitive")
    _, face, _ = fan.locate(v)
    k = fan.n_rays
    fs = set(face)
    cones = []
    for c in fan.cones:
        if fs.issubset(c):
            for s in face:
                cones.append(tuple(sorted([j for j in c if j != s] + [k])))
        else:
            cones.append(c)
    return Fan(fan.rays + (v,), cones)


def shed_volume(fan: Fan) -> Fraction:
    return Fraction(sum(fan.cone_det(c) for c in fan.cones), factorial(fan.dim))


def point_relation(fan: Fan, v: Sequence[int]) -> tuple[tuple[int, ...], int, IntVector, int]:
    """Minimal integral relation ``r v = sum b_i s_i`` over the smallest cone.

    Returns ``(face, r, b, index)`` with ``face`` the ray indices of the
    smallest cone containing ``v``, ``b`` aligned with ``face`` and
    ``index`` the lattice index of that cone in its saturated span.
    """
    c, face, t = fan.locate(v)
    coeff = [s for s in t if s]
    r = lcm(*(s.denominator for s in coeff)) if coeff else 1
    b = tuple(int(s * r) for s in coeff)
    return face, r, b, face_index(fan.rays, face)


def face_index(rays: Sequence[Sequence[int]], face: Sequence[int]) -> int:
    if not face:
        return 1
    snf = smith_form(transpose([rays[i] for i in face]))
    out = 1
    for d in snf.invariant_factors:
        out *= d
    return out


# ---------------------------------------------------------------------------
# normal form and automorphisms


def _vertex_invariants(V: IntMatrix) -> list[tuple]:
    n = len(V[0])
    k = len(V)
    inv = [[] for _ in range(k)]
    for sub in combinations(range(k), n):
        d = abs(det(transpose([V[i] for i in sub])))
        for i in sub:
            inv[i].append(d)
    return [tuple(sorted(x)) for x in inv]


def _hnf_key(V: IntMatrix, order: Sequence[int]) -> tuple:
    H = hermite_form(transpose([V[i] for i in order]))
    return tuple(x for row in H for x in row)


def normal_form(vertices: Sequence[Sequence[int]]) -> str:
    """Canonical key of a vertex set up to GL(n, Z) and reordering.

    The row Hermite form of the column matrix is a GL(n, Z) invariant for a
    fixed vertex order; the key is the minimum over all orders compatible
    with the sorted per-vertex determinant profile.
    """
    V = as_matrix(vertices)
    if not V or rank(V) < len(V[0]):
        raise FanError("degenerate configuration")
    n, k = len(V[0]), len(V)
    inv = _vertex_invariants(V)
    groups: dict[tuple, list[int]] = {}
    for i, x in enumerate(inv):
        groups.setdefault(x, []).append(i)
    keys = sorted(groups)
    best = None
    for parts in product(*(permutations(groups[x]) for x in keys)):
        order = [i for part in parts for i in part]
        h = _hnf_key(V, order)
        if best is None or h < best:
            best = h
    prof = ";".join(f"{len(groups[x])}x" + ".".join(map(str, x)) for x in keys)
    return f"{n}/{k}/{prof}/" + ",".join(map(str, best))


def automorphisms(X: SimplexVariety) -> list[IntMatrix]:
    """Lattice automorphisms permuting the rays of ``X`` (identity first)."""
    n = X.dim
    k = X.n_rays
    base = list(range(n))
    B = transpose([X.rays[i] for i in base])
    D = det(B)
    adj = adjugate(B)
    out = []
    groups: dict[int, list[int]] = {}
    for i, w in enumerate(X.weights):
        groups.setdefault(w, []).append(i)
    for perm in permutations(range(k)):
        if any(X.weights[perm[i]] != X.weights[i] for i in range(k)):
            continue
        img = transpose([X.rays[perm[i]] for i in base])
        num = [[sum(img[r][m] * adj[m][c] for m in range(n)) for c in range(n)] for r in range(n)]
        if any(x % D for row in num for x in row):
            continue
        A = tuple(tuple(x // D for x in row) for row in num)
        if all(matvec(A, X.rays[i]) == X.rays[perm[i]] for i in range(k)):
            out.append(A)
    out.sort(key=lambda A: (A != tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), A))
    return out


# ---------------------------------------------------------------------------
# anticanonical polytope of a weak Fano fan


def _affine_dim(points: list[tuple[Fraction, ...]]) -> int:
    if len(points) <= 1:
        return 0
    den = lcm(*(x.denominator for p in points for x in p))
    base = points[0]
    diffs = [tuple(int((a - b) * den) for a, b in zip(p, base)) for p in points[1:]]
    return rank(diffs)


def _pulling_triangulation(verts: list[tuple[Fraction, ...]], facets: list[frozenset]) -> list[tuple[int, ...]]:
    memo: dict[frozenset, list[tuple[int, ...]]] = {}

    def faces_below(F: frozenset, d: int) -> list[frozenset]:
        found = set()
        for H in facets:
            G = F & H
            if G != F and len(G) >= d and _affine_dim([verts[i] for i in sorted(G)]) == d - 1:
                found.add(frozenset(G))
        return [G for G in found if not any(G < G2 for G2 in found)]

    def tri(F: frozenset, d: int) -> list[tuple[int, ...]]:
        if F in memo:
            return memo[F]
        if len(F) == d + 1:
            out = [tuple(sorted(F))]
        else:
            p = min(F)
            out = []
            for G in sorted(faces_below(F, d), key=sorted):
                if p in G:
                    continue
                out.extend((p, *s) for s in tri(G, d - 1))
        memo[F] = out
        return out

    n = len(verts[0])
    return tri(frozenset(range(len(verts))), n)


@dataclass(frozen=True)
class GorensteinData:
    degree: Fraction
    h0: int | None
    vertices: tuple[tuple[Fraction, ...], ...]

    @property
    def is_lattice(self) -> bool:
        return all(x.denominator == 1 for v in self.vertices for x in v)


def anticanonical_polytope(fan: Fan) -> tuple[list[tuple[Fraction, ...]], list[frozenset]]:
    """Vertices of ``{u : <u, ray> >= -1}`` and, per ray, the incident vertices."""
    if not is_weak_fano(fan):
        raise FanError("dual polytope undefined: -K is not nef")
    verts: list[tuple[Fraction, ...]] = []
    seen = {}
    for c in fan.cones:
        cov = fan.covector(c)
        u = tuple(Fraction(-x, cov.r) for x in cov.g)
        if u not in seen:
            seen[u] = len(verts)
            verts.append(u)
    facets = []
    for ray in fan.rays:
        facets.append(frozenset(i for i, u in enumerate(verts) if sum(a * b for a, b in zip(u, ray)) == -1))
    return verts, facets


def gorenstein_data(fan: Fan, count_points: bool = True) -> GorensteinData:
    """Anticanonical degree ``n! vol`` and ``h^0(-K)`` of a weak Fano fan.

    For a weak Fano fan the anticanonical polytope is the dual of
    ``conv(rays)``, so this also computes the invariants of the anticanonical
    model (the flop base when the fan is one side of a flop).
    """
    verts, facets = anticanonical_polytope(fan)
    n = fan.dim
    simplices = _pulling_triangulation(verts, facets)
    total = Fraction(0)
    for s in simplices:
        p0 = verts[s[0]]
        rows = [[a - b for a, b in zip(verts[i], p0)] for i in s[1:]]
        den = lcm(*(x.denominator for r in rows for x in r))
        M = [[int(x * den) for x in r] for r in rows]
        total += Fraction(abs(det(M)), den**n)
    h0 = lattice_point_count(fan.rays, verts) if count_points else None
    return GorensteinData(total, h0, tuple(verts))


def lattice_point_count(rays: Sequence[Sequence[int]], verts: list[tuple[Fraction, ...]]) -> int:
    n = len(rays[0])
    lo = [floor(min(v[i] for v in verts)) for i in range(n)]
    hi = [ceil(max(v[i] for v in verts)) for i in range(n)]
    R = np.array(rays, dtype=np.int64)
    grids = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo[1:], hi[1:])]
    if grids:
        mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, n - 1)
    else:
        mesh = np.zeros((1, 0), dtype=np.int64)
    count = 0
    for x0 in range(lo[0], hi[0] + 1):
        pts = np.concatenate([np.full((mesh.shape[0], 1), x0, dtype=np.int64), mesh], axis=1)
        vals = pts @ R.T
        count += int(np.count_nonzero(np.all(vals >= -1, axis=1)))
    return count


# ---------------------------------------------------------------------------
# text format


def parse_fan_text(text: str) -> list[tuple[IntMatrix, list[tuple[int, ...]] | None, str]]:
    """Parse one or more fan blocks.

    A block is a header ``n k``, then ``k`` lines of ``n`` integers (rays),
    then optional cone lines ``C i_1 ... i_n`` (0-based ray indices). A
    comment line ``# id: NAME`` right before a header names the block.
    """
    entries = []
    lines = text.splitlines()
    i = 0
    pending_name = None

    def ints(s: str, lineno: int) -> list[int]:
        try:
            return [int(x) for x in s.split()]
        except ValueError:
            raise FanFormatError(f"expected integers, got {s!r}", lineno) from None

    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw.startswith("#"):
            body = raw[1:].strip()
            if body.lower().startswith("id:"):
                pending_name = body[3:].strip()
            continue
        head = ints(raw, i)
        if len(head) != 2 or head[0] < 1 or head[1] < 1:
            raise FanFormatError("expected header 'n k'", i)
        n, k = head
        rays = []
        while len(rays) < k:
            if i >= len(lines):
                raise FanFormatError(f"expected {k} rays, found {len(rays)}", i)
            s = lines[i].split("#")[0].strip()
            i += 1
            if not s:
                continue
            row = ints(s, i)
            if len(row) != n:
                raise FanFormatError(f"ray has {len(row)} coordinates, expected {n}", i)
            rays.append(tuple(row))
        cones = []
        while i < len(lines):
            s = lines[i].split("#")[0].strip()
            if not s:
                if i + 1 < len(lines) and lines[i + 1].strip().startswith("C"):
                    i += 1
                    continue
                break
            if not s.startswith("C"):
                break
            i += 1
            cone = ints(s[1:], i)
            if len(cone) != n or any(not 0 <= c < k for c in cone):
                raise FanFormatError(f"bad cone line {s!r}", i)
            cones.append(tuple(cone))
        if not cones and k != n + 1:
            raise FanFormatError("cone lines are required unless k = n + 1", i)
        name = pending_name if pending_name is not None else str(len(entries) + 1)
        pending_name = None
        entries.append((tuple(rays), cones or None, name))
    if not entries:
        raise FanFormatError("no fan found", 1 if not lines else len(lines))
    return entries


def format_fan_text(fan: Fan, name: str | None = None, with_cones: bool | None = None) -> str:
    out = []
    if name is not None:
        out.append(f"# id: {name}")
    out.append(f"{fan.dim} {fan.n_rays}")
    out += [" ".join(map(str, r)) for r in fan.rays]
    if with_cones is None:
        with_cones = not isinstance(fan, SimplexVariety)
    if with_cones:
        out += ["C " + " ".join(map(str, c)) for c in fan.cones]
    return "\n".join(out) + "\n"


def fan_from_entry(rays: IntMatrix, cones) -> Fan:
    if cones is None:
        return SimplexVariety(rays)
    return Fan(rays, cones)


def load_fan(path) -> Fan:
    with open(path, encoding="utf-8") as fh:
        entries = parse_fan_text(fh.read())
    if len(entries) != 1:
        raise FanFormatError(f"expected one fan, found {len(entries)}")
    rays, cones, _ = entries[0]
    return fan_from_entry(rays, cones)
