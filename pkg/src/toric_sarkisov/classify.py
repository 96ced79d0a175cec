"""Terminal simplices: the 3-fold classification, dataset checks, P^4 searches."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations, combinations_with_replacement, product
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .fan import FanError, FanFormatError, SimplexVariety, low_point, parse_fan_text
from .tworay import FLIP, FLOP, SMALL_KINDS
from .lattice import IntMatrix, hermite_form, kernel_basis, matvec, transpose, vgcd

WEIGHT_SUM_BOUND = 25


def wps_rays(weights: Sequence[int]) -> IntMatrix:
    """Rays of the weighted projective space with the given weights.

    The rays are the columns of a saturated basis of the relation lattice
    ``{x : sum a_i x_i = 0}``; they satisfy ``sum a_i v_i = 0`` and generate
    the whole lattice.
    """
    K = kernel_basis([list(weights)])
    return transpose(K)


def wps(weights: Sequence[int]) -> SimplexVariety:
    return SimplexVariety(wps_rays(weights))


def fake_wps(weights: Sequence[int], quotient: Sequence[int], order: int) -> SimplexVariety:
    """Quotient of ``P(weights)`` by ``Z/order`` acting with the given weights.

    The lattice is enlarged by ``(1/order) sum q_i v_i``; the rays are
    rewritten in a basis of the enlarged lattice and must stay primitive.
    """
    rays = wps_rays(weights)
    n = len(rays[0])
    if len(quotient) != len(rays):
        raise ValueError("one quotient weight per coordinate")
    g = [sum(q * r[j] for q, r in zip(quotient, rays)) for j in range(n)]
    m = order
    # columns m*e_j and g generate m * N'; Hermite form gives a basis B of it
    cols = [[m if i == j else 0 for i in range(n)] for j in range(n)] + [g]
    H = [row for row in hermite_form(cols) if any(row)]
    B = transpose(H)  # basis of m N' as columns
    # coordinates of m * r in the basis B of m N'
    from .lattice import solve

    new = []
    for r in rays:
        x = solve(B, [m * c for c in r])
        if any(t.denominator != 1 for t in x):
            raise FanError("ray not in the enlarged lattice")
        new.append(tuple(int(t) for t in x))
    if any(vgcd(r) != 1 for r in new):
        raise FanError("rays are not primitive in the enlarged lattice")
    return SimplexVariety(new)


def well_formed(weights: Sequence[int]) -> bool:
    return all(vgcd(s) == 1 for s in combinations(weights, len(weights) - 1))


def _hnf_matrices(n: int, m: int) -> Iterable[tuple[tuple[int, ...], ...]]:
    """Upper triangular Hermite forms of determinant ``m``."""

    def diags(k, left):
        if k == 1:
            yield (left,)
            return
        for d in range(1, left + 1):
            if left % d == 0:
                for rest in diags(k - 1, left // d):
                    yield (d, *rest)

    for diag in diags(n, m):
        slots = [(i, j) for j in range(n) for i in range(j)]
        ranges = [range(diag[i]) for (i, j) in slots]
        for vals in product(*ranges):
            H = [[0] * n for _ in range(n)]
            for i in range(n):
                H[i][i] = diag[i]
            for (i, j), x in zip(slots, vals):
                H[i][j] = x
            yield tuple(map(tuple, H))


def weight_systems(k: int, bound: int) -> Iterable[tuple[int, ...]]:
    """Nondecreasing ``k``-tuples of positive integers with sum at most ``bound``."""

    def rec(prefix, lo, left, k):
        if k == 0:
            yield prefix
            return
        for a in range(lo, left // k + 1):
            yield from rec(prefix + (a,), a, left - a, k - 1)

    yield from rec((), 1, bound, k)


def terminal_weight_systems(n: int, bound: int = WEIGHT_SUM_BOUND) -> list[tuple[int, ...]]:
    return [w for w in weight_systems(n + 1, bound) if well_formed(w) and low_point(wps(w)) is None]


@dataclass
class Dataset:
    entries: list[tuple[str, SimplexVariety]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def varieties(self) -> list[SimplexVariety]:
        return [X for _, X in self.entries]

    def as_rays(self) -> list[tuple[str, IntMatrix]]:
        return [(name, X.rays) for name, X in self.entries]


def classify_dim3(bound: int = WEIGHT_SUM_BOUND) -> Dataset:
    """Terminal Fano simplices in dimension 3 with normalised volume <= ``bound``.

    Weighted projective spaces come from well-formed weights; their fake
    quotients from index-``m`` enlargements of the lattice, enumerated as
    index-``m`` sublattices ``H Z^3`` of the dual lattice (the rays become
    ``H^T v``). The normalised volume of a fake quotient is ``m`` times the
    weight sum.
    """
    seen = {}
    out: list[tuple[str, SimplexVariety]] = []
    for w in terminal_weight_systems(3, bound):
        X = wps(w)
        seen[X.key] = True
        out.append((X.label(), X))
        s = sum(w)
        for m in range(2, bound // s + 1):
            for H in _hnf_matrices(3, m):
                Ht = transpose(H)
                rays = [matvec(Ht, r) for r in X.rays]
                if any(vgcd(r) != 1 for r in rays):
                    continue
                Y = SimplexVariety(rays)
                if Y.key in seen or low_point(Y) is not None:
                    continue
                seen[Y.key] = True
                out.append((Y.label(), Y))
    out.sort(key=lambda e: (e[1].index, sum(e[1].weights), e[1].sorted_weights))
    return Dataset(out)


# ---------------------------------------------------------------------------
# datasets


@dataclass
class VerificationReport:
    entries: int = 0
    simplices: int = 0
    terminal: int = 0
    wps: int = 0
    fake: int = 0
    rejected: list[dict] = field(default_factory=list)
    duplicates: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.rejected and not self.duplicates

    def to_dict(self) -> dict:
        return {
            "entries": self.entries,
            "simplices": self.simplices,
            "terminal": self.terminal,
            "wps": self.wps,
            "fake": self.fake,
            "rejected": self.rejected,
            "duplicates": [list(d) for d in self.duplicates],
            "ok": self.ok,
        }


def verify_entries(entries: Sequence[tuple[IntMatrix, object, str]]) -> tuple[VerificationReport, list[tuple[str, SimplexVariety]]]:
    rep = VerificationReport()
    keys: dict[str, str] = {}
    good = []
    for rays, cones, name in entries:
        rep.entries += 1
        try:
            X = SimplexVariety(rays)
        except (FanError, ValueError) as exc:
            rep.rejected.append({"name": name, "reason": f"not a simplex fan: {exc}"})
            continue
        rep.simplices += 1
        w = low_point(X)
        if w is not None:
            rep.rejected.append({"name": name, "reason": "not terminal", "witness": list(w[1])})
            continue
        rep.terminal += 1
        if X.discriminant:
            rep.fake += 1
        else:
            rep.wps += 1
        if X.key in keys:
            rep.duplicates.append((keys[X.key], name))
            continue
        keys[X.key] = name
        good.append((name, X))
    return rep, good


def verify_dataset(path) -> VerificationReport:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return verify_entries(parse_fan_text(text))[0]


def load_dataset(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        entries = parse_fan_text(fh.read())
    rep, good = verify_entries(entries)
    if rep.rejected:
        raise FanError(f"dataset entry rejected: {rep.rejected[0]}")
    return Dataset(good)


_INT_LIST = re.compile(r"\[\s*-?\d+(?:\s*,\s*-?\d+)*\s*\]")


def convert_vertex_matrices(text: str) -> str:
    """Convert one-per-line vertex lists ``[[..],[..],..]`` to the fan text format.

    Lines may carry a leading identifier before the matrix; blank lines and
    ``#`` comments are skipped.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        rows = _INT_LIST.findall(s)
        if not rows:
            raise FanFormatError("no vertex list found", lineno)
        verts = [[int(x) for x in r.strip("[]").split(",")] for r in rows]
        if len({len(v) for v in verts}) != 1:
            raise FanFormatError("ragged vertex list", lineno)
        prefix = s[: s.index("[")].strip(" :,=")
        name = prefix or str(len(out) + 1)
        n = len(verts[0])
        block = [f"# id: {name}", f"{n} {len(verts)}"] + [" ".join(map(str, v)) for v in verts]
        out.append("\n".join(block))
    return "\n".join(out) + ("\n" if out else "")


def write_dataset(entries: Iterable[tuple[str, SimplexVariety]]) -> str:
    from .fan import format_fan_text

    return "".join(format_fan_text(X, name) for name, X in entries)


# ---------------------------------------------------------------------------
# weighted blowups of a smooth point of P^4


def smooth_point_blowup_terminal(weights: Sequence[int]) -> bool:
    return bool(_kernels.weighted_blowup_terminal(np.array(weights, dtype=np.int64)))


P4_WEIGHT_BOUND = 5


def p4_point_blowups(max_weight: int = P4_WEIGHT_BOUND) -> list[tuple[int, ...]]:
    """Sorted weights ``<= max_weight`` giving a terminal blowup of a smooth point."""
    out = []
    for w in combinations_with_replacement(range(1, max_weight + 1), 4):
        if reduce(gcd, w) == 1 and smooth_point_blowup_terminal(w):
            out.append(w)
    return out


def _small_kinds(rec) -> list[str]:
    return [s["kind"] for s in rec.steps if s["kind"] in SMALL_KINDS]


def _flop_then_flip(rec) -> bool:
    kinds = _small_kinds(rec)
    return rec.is_complete and rec.link_type == "I" and len(kinds) >= 2 and kinds[0] == FLOP and FLIP in kinds[1:]


def _flips_only(rec) -> bool:
    kinds = _small_kinds(rec)
    return rec.is_complete and rec.link_type == "I" and bool(kinds) and all(k == FLIP for k in kinds)


def p4_weight_search(
    bound_abc: int = 100,
    bound_d: int = 100,
    shape_filter: bool = True,
    skip_weights_upto: int = P4_WEIGHT_BOUND,
) -> tuple[list[tuple], list[tuple]]:
    """Tuples ``(d, a, b, c)``, ``d <= a <= b <= c``, with any three coprime and
    a terminal ``(a, b, c, d)`` blowup of a smooth point.

    The first list solves ``a + b + c = 4d + 1``, the second
    ``a + b + c < 4d + 1``; ``a, b, c <= bound_abc`` and ``d <= bound_d``.

    With ``shape_filter`` the link of each blowup is run and kept only when
    it ends in a divisorial contraction after a flop followed by a flip
    (first list) or after flips only (second list). Tuples whose weights are
    all at most ``skip_weights_upto`` are the ones already met among the
    small point blowups and are left out; pass 0 and ``shape_filter=False``
    for the bare arithmetic search.
    """
    from .links import run_link

    flop, flip = [], []
    for d in range(1, bound_d + 1):
        top = min(bound_abc, 4 * d + 1 - 2 * d)
        for a in range(d, top + 1):
            for b in range(a, top + 1):
                c_hi = min(bound_abc, 4 * d + 1 - a - b)
                for c in range(b, c_hi + 1):
                    w = (d, a, b, c)
                    if not well_formed(w) or not smooth_point_blowup_terminal(w):
                        continue
                    if max(w) <= skip_weights_upto:
                        continue
                    (flop if a + b + c == 4 * d + 1 else flip).append(w)
    if not shape_filter:
        return flop, flip
    P4 = wps((1, 1, 1, 1, 1))

    def keep(ws, test):
        return [w for w in ws if test(run_link(P4, p4_blowup_point(w), midpoints=False))]

    return keep(flop, _flop_then_flip), keep(flip, _flips_only)


def p4_blowup_point(weights: Sequence[int]) -> tuple[int, ...]:
    """Point of the standard P^4 fan giving the weighted blowup of a torus-fixed point."""
    rays = wps_rays((1, 1, 1, 1, 1))
    return tuple(sum(w * r[j] for w, r in zip(weights, rays[:4])) for j in range(4))
