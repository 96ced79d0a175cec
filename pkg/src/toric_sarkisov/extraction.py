"""Terminal extremal extractions from a simplex variety, and their notation.

Within a top cone ``sigma`` of determinant ``D`` every lattice point is
``(1/D) sum t_i s_i`` with integral ``t`` (the scaled barycentric vector),
and ``psi_sigma`` is ``sum(t) / D``. Subdividing at ``v`` keeps the fan
terminal exactly when, in every top cone containing ``v``, no lattice point
``w`` other than the origin, the rays and ``v`` falls under the new roof.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Sequence

import numpy as np

from . import _kernels
from .fan import (
    FanError,
    SimplexVariety,
    automorphisms,
    discrepancy,
    is_terminal,
    point_relation,
    star_subdivide,
)
from .lattice import IntVector, box_group, matvec, vgcd


@dataclass(frozen=True)
class ExtractionCandidate:
    """A primitive point ``v`` with ``r v = sum b_i s_i`` over the face ``face``.

    ``face`` holds ray indices of the source variety, ``index`` is the
    lattice index of that face and ``centre`` the weights along the blown-up
    stratum (the cone index for a point).
    """

    v: IntVector
    face: tuple[int, ...]
    r: int
    b: IntVector
    index: int
    discrepancy: Fraction
    centre: IntVector

    @property
    def centre_dim(self) -> int:
        return len(self.v) - len(self.face)

    @property
    def relation(self) -> IntVector:
        return (-self.r, *sorted(self.b))

    def notation(self) -> str:
        return notation_string(self.centre, self.r, self.b, len(self.v))

    def short(self) -> str:
        return short_notation(self.r, self.b, len(self.v))


def centre_weights(X: SimplexVariety, face: Sequence[int], index: int) -> IntVector:
    if len(face) == X.dim:
        return (index,)
    return tuple(sorted(X.weights[i] for i in range(X.n_rays) if i not in face))


def make_candidate(X: SimplexVariety, v: Sequence[int]) -> ExtractionCandidate:
    v = tuple(int(x) for x in v)
    face, r, b, index = point_relation(X, v)
    return ExtractionCandidate(v, face, r, b, index, discrepancy(X, v), centre_weights(X, face, index))


def notation_string(centre: Sequence[int], r: int, b: Sequence[int], n: int) -> str:
    """``[a_0,...,a_d](-r,b_1,...)``; three-folds use the short form."""
    if n == 3:
        return short_notation(r, b, n)
    return "[" + ",".join(map(str, centre)) + "](" + ",".join(map(str, (-r, *sorted(b)))) + ")"


def short_notation(r: int, b: Sequence[int], n: int) -> str:
    """``(a,b,c)`` padded with zeros, prefixed ``1/r`` when ``r > 1``."""
    body = "(" + ",".join(map(str, [*sorted(b), *[0] * (n - len(b))])) + ")"
    return body if r == 1 else f"1/{r}{body}"


_LONG = re.compile(r"^\s*\[([\d,\s]+)\]\s*\(\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)\s*$")
_SHORT = re.compile(r"^\s*(?:1/(\d+))?\s*\(\s*(\d+(?:\s*,\s*\d+)*)\s*\)\s*$")


def parse_notation(text: str) -> tuple[IntVector | None, int, IntVector]:
    """Inverse of :func:`notation_string`: ``(centre or None, r, sorted b)``."""
    m = _LONG.match(text)
    if m:
        centre = tuple(int(x) for x in m.group(1).split(","))
        rel = [int(x) for x in m.group(2).split(",")]
        if rel[0] >= 0 or any(x <= 0 for x in rel[1:]):
            raise ValueError(f"bad extraction relation in {text!r}")
        return centre, -rel[0], tuple(sorted(rel[1:]))
    m = _SHORT.match(text)
    if m:
        r = int(m.group(1)) if m.group(1) else 1
        b = tuple(sorted(int(x) for x in m.group(2).split(",") if int(x)))
        return None, r, b
    raise ValueError(f"cannot parse extraction notation {text!r}")


def select(candidates: Sequence[ExtractionCandidate], text: str) -> list[ExtractionCandidate]:
    centre, r, b = parse_notation(text)
    return [
        c
        for c in candidates
        if c.r == r and tuple(sorted(c.b)) == b and (centre is None or c.centre == centre)
    ]


# ---------------------------------------------------------------------------
# enumeration


class _ConeData:
    """Lattice points of one top cone, scaled barycentric, up to a psi bound."""

    __slots__ = ("cone", "S", "D", "adj_sign", "adj", "points")

    def __init__(self, X: SimplexVariety, cone: tuple[int, ...], bound_psi: Fraction):
        self.cone = cone
        self.S = np.array([X.rays[i] for i in cone], dtype=np.int64)
        D, gens, orders = box_group([X.rays[i] for i in cone])
        self.D = abs(D)
        self.adj = X._linear[cone][1]
        self.adj_sign = 1 if X._linear[cone][0] > 0 else -1
        box = _kernels.group_elements(gens, orders, self.D)
        bound = floor(self.D * bound_psi)
        self.points = _kernels.cone_points(box, self.D, bound)

    def scaled(self, v: Sequence[int]) -> np.ndarray:
        """Barycentric coordinates of ``v`` times ``D``."""
        return np.array([self.adj_sign * x for x in matvec(self.adj, v)], dtype=np.int64)


def _cones_data(X: SimplexVariety, bound_psi: Fraction) -> dict[tuple[int, ...], _ConeData]:
    return {c: _ConeData(X, c, bound_psi) for c in X.cones}


def _violates(X: SimplexVariety, data: dict, v: Sequence[int], face: Sequence[int]) -> bool:
    fs = set(face)
    for c, cd in data.items():
        if not fs.issubset(c):
            continue
        V = cd.scaled(v)
        tau = np.array([i in fs for i in c], dtype=np.bool_)
        if _kernels.extraction_violation(cd.points, cd.D, V, tau) >= 0:
            return True
    return False


def is_terminal_extraction(X: SimplexVariety, v: Sequence[int]) -> bool:
    """Whether subdividing ``X`` at the primitive non-ray ``v`` stays terminal."""
    v = tuple(int(x) for x in v)
    if not any(v) or vgcd(v) != 1 or v in X.rays:
        raise FanError(f"{v} is not a primitive non-ray point")
    if not is_terminal(X):
        return False
    psi = discrepancy(X, v) + 1
    if psi <= 1:
        return False
    _, face, _ = X.locate(v)
    data = {c: _ConeData(X, c, psi) for c in X.cones if set(face).issubset(c)}
    return not _violates(X, data, v, face)


def is_terminal_extraction_slow(X: SimplexVariety, v: Sequence[int]) -> bool:
    return is_terminal(star_subdivide(X, v))


def candidate_points(
    X: SimplexVariety,
    dmax: Fraction | int | str = Fraction(5),
    dedup_symmetry: bool = False,
) -> list[ExtractionCandidate]:
    """All terminal extremal extractions of discrepancy at most ``dmax``.

    Sorted by the point coordinates. With ``dedup_symmetry`` only the
    lexicographically least point of each orbit under the lattice
    automorphisms of ``X`` is kept.
    """
    dmax = Fraction(dmax)
    if dmax <= 0:
        raise ValueError("dmax must be positive")
    data = _cones_data(X, 1 + dmax)
    seen: dict[IntVector, tuple] = {}
    for c, cd in data.items():
        T = cd.points
        if T.shape[0] == 0:
            continue
        s = T.sum(axis=1)
        T = T[s > cd.D]
        P = (T @ cd.S) // cd.D
        for row_t, row_p in zip(T, P):
            p = tuple(int(x) for x in row_p)
            if p in seen:
                continue
            face = tuple(i for i, x in zip(c, row_t) if x)
            seen[p] = face
    out = []
    autos = automorphisms(X) if dedup_symmetry else None
    for p in sorted(seen):
        if vgcd(p) != 1 or len(seen[p]) < 2:
            continue
        if autos is not None and len(autos) > 1:
            orbit = [matvec(A, p) for A in autos]
            if min(orbit) != p:
                continue
        if _violates(X, data, p, seen[p]):
            continue
        out.append(make_candidate(X, p))
    return out


def point_orbit(X: SimplexVariety, v: Sequence[int]) -> list[IntVector]:
    return sorted({tuple(matvec(A, v)) for A in automorphisms(X)})
