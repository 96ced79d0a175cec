"""Running Sarkisov links by the two-ray game, and webs of them.

A link starts from a simplex variety ``X`` and a terminal extraction
``Y_1 -> X``. Every later model lives in the same Gale configuration, so
the game walks chamber by chamber away from the wall that contracts back to
``X`` until it meets a divisorial wall (Type I, ending at a simplex
variety) or the boundary of the configuration (Type II, a Mori fibre space).
"""

from __future__ import annotations

import hashlib
import json
import logging
import multiprocessing
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .extraction import ExtractionCandidate, candidate_points, make_candidate, notation_string, short_notation
from .fan import SimplexVariety, is_fano, low_point, star_subdivide
from .tworay import (
    ANTIFLIP,
    DIVISORIAL,
    FLIP,
    FLOP,
    RankTwoModel,
    contract_divisor,
    display_relation,
    fibration_data,
    flop_base,
)

log = logging.getLogger(__name__)

COMPLETE, BAD_ANTIFLIP, BAD_ENDPOINT = "complete", "bad-antiflip", "bad-endpoint"
_REVERSE_KIND = {FLIP: ANTIFLIP, ANTIFLIP: FLIP, FLOP: FLOP}


def _frac(x: Fraction) -> str:
    return str(Fraction(x))


def variety_data(X: SimplexVariety) -> dict:
    return {
        "key": X.key,
        "weights": list(X.sorted_weights),
        "discriminant": list(X.discriminant),
        "label": X.label(),
    }


def model_key(model) -> str:
    text = repr((model.rays, model.cones)).encode()
    return hashlib.sha1(text).hexdigest()[:16]


@dataclass
class LinkRecord:
    """One run of the two-ray game; plain data, JSON round-trippable.

    ``steps`` holds dicts with ``kind`` in ``flip``, ``flop``, ``antiflip``,
    ``blowdown`` or ``mfs``. ``end`` is ``None`` for bad links.
    """

    start: dict
    extraction: dict
    steps: list[dict]
    end: dict | None
    status: str
    bad: dict | None = None
    midpoints: dict = field(default_factory=dict)
    inverse_of: int | None = None
    start_name: str | None = None
    models: list = field(default_factory=list, repr=False, compare=False)

    @property
    def link_type(self) -> str | None:
        return None if self.end is None else self.end["type"]

    @property
    def is_complete(self) -> bool:
        return self.status == COMPLETE

    @property
    def small_steps(self) -> list[dict]:
        return [s for s in self.steps if s["kind"] in (FLIP, FLOP, ANTIFLIP)]

    def to_dict(self) -> dict:
        d = {
            "start": self.start,
            "extraction": self.extraction,
            "steps": self.steps,
            "end": self.end,
            "status": self.status,
            "bad": self.bad,
            "midpoints": self.midpoints,
        }
        if self.inverse_of is not None:
            d["inverse_of"] = self.inverse_of
        if self.start_name is not None:
            d["start_name"] = self.start_name
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "LinkRecord":
        return cls(
            start=d["start"],
            extraction=d["extraction"],
            steps=d["steps"],
            end=d["end"],
            status=d["status"],
            bad=d.get("bad"),
            midpoints=d.get("midpoints", {}),
            inverse_of=d.get("inverse_of"),
            start_name=d.get("start_name"),
        )

    @classmethod
    def from_json(cls, text: str) -> "LinkRecord":
        return cls.from_dict(json.loads(text))

    # -- display -------------------------------------------------------

    def summary(self) -> str:
        parts = [f"{self.start['label']}", self.extraction["notation"]]
        for s in self.steps:
            if s["kind"] in (FLIP, FLOP, ANTIFLIP):
                parts.append(f"{s['kind']} {_rel(s['relation'])}")
            elif s["kind"] == "blowdown":
                parts.append(f"blowdown {s['notation']}")
            else:
                parts.append("Mfs")
        if self.end is None:
            parts.append(f"[{self.status}]")
        elif self.end["type"] == "I":
            parts.append(self.end["target"]["label"])
        else:
            parts.append(self.end["label"])
        return "  ".join(parts)


def _rel(b: Sequence[int]) -> str:
    return "(" + ",".join(map(str, b)) + ")"


def extraction_data(c: ExtractionCandidate) -> dict:
    return {
        "point": list(c.v),
        "centre_weights": list(c.centre),
        "index": c.index,
        "relation": list(c.relation),
        "discrepancy": _frac(c.discrepancy),
        "notation": c.notation(),
        "short": c.short(),
    }


def run_link(
    X: SimplexVariety,
    candidate: ExtractionCandidate | Sequence[int],
    midpoints: bool = True,
    count_points: bool = True,
) -> LinkRecord:
    """Play the two-ray game from the extraction of ``X`` at ``candidate``."""
    if not isinstance(candidate, ExtractionCandidate):
        candidate = make_candidate(X, candidate)
    n = X.dim
    Y = RankTwoModel.from_fan(star_subdivide(X, candidate.v))
    gale = Y.gale
    v_index = Y.n_rays - 1
    a = Y.chamber
    left, right = gale.crossing(a, a), gale.crossing(a, a + 1)
    if left.kind == DIVISORIAL and left.negative == (v_index,):
        step = 1
    elif right.kind == DIVISORIAL and right.negative == (v_index,):
        step = -1
    else:  # pragma: no cover - a star subdivision is always contracted back
        raise AssertionError("extraction wall not found")

    start = variety_data(X)
    ext = extraction_data(candidate)
    steps: list[dict] = []
    fano_flags = [is_fano(Y)]
    flop_reports = []
    models = [Y]
    for _ in range(gale.n_chambers + 1):
        wall = a + 1 if step == 1 else a
        cr = gale.crossing(a, wall)
        if cr.kind in (FLIP, FLOP, ANTIFLIP):
            nxt = RankTwoModel.in_chamber(gale, cr.target)
            entry = {"kind": cr.kind, "relation": list(display_relation(cr.relation)), "raw": list(cr.relation)}
            if cr.kind == FLOP and midpoints:
                fb = flop_base(Y, cr, count_points=count_points)
                rep = {"step": len(steps)}
                if fb.data is not None:
                    rep.update(
                        degree=_frac(fb.data.degree),
                        h0=fb.data.h0,
                        lattice=fb.data.is_lattice,
                    )
                flop_reports.append(rep)
            steps.append(entry)
            if cr.kind == ANTIFLIP:
                w = low_point(nxt)
                if w is not None:
                    cone, pt, t = w
                    return LinkRecord(
                        start, ext, steps, None, BAD_ANTIFLIP,
                        bad={"step": len(steps) - 1, "witness": list(pt), "cone": [list(nxt.rays[i]) for i in cone]},
                        midpoints={"fano": fano_flags, "flop_bases": flop_reports},
                        models=[X, *models, nxt],
                    )
            Y = nxt
            a = cr.target
            models.append(Y)
            fano_flags.append(is_fano(Y))
            continue
        if cr.kind == DIVISORIAL:
            bd = contract_divisor(Y, cr)
            Xp = bd.target
            nota = notation_string(
                _centre(Xp, bd.face, bd.index), bd.r, bd.b, n
            )
            steps.append(
                {
                    "kind": "blowdown",
                    "relation": list(display_relation(cr.relation)),
                    "raw": list(cr.relation),
                    "point": list(bd.ray),
                    "notation": nota,
                    "short": short_notation(bd.r, bd.b, n),
                    "index": bd.index,
                    "r": bd.r,
                }
            )
            w = low_point(Xp)
            mid = {"fano": fano_flags, "flop_bases": flop_reports}
            if w is not None:
                return LinkRecord(
                    start, ext, steps, None, BAD_ENDPOINT,
                    bad={"step": len(steps) - 1, "witness": list(w[1])}, midpoints=mid,
                    models=[X, *models, Xp],
                )
            end = {"type": "I", "target": variety_data(Xp), "rays": [list(r) for r in Xp.rays]}
            return LinkRecord(start, ext, steps, end, COMPLETE, midpoints=mid, models=[X, *models, Xp])
        fib = fibration_data(Y, cr)
        steps.append({"kind": "mfs", "relation": list(display_relation(cr.relation)), "raw": list(cr.relation)})
        end = {
            "type": "II",
            "fibre": variety_data(fib.fibre),
            "base": variety_data(fib.base),
            "label": fib.label(),
        }
        return LinkRecord(
            start, ext, steps, end, COMPLETE,
            midpoints={"fano": fano_flags, "flop_bases": flop_reports}, models=[X, *models],
        )
    raise AssertionError("two-ray game did not terminate")  # pragma: no cover


def _centre(X: SimplexVariety, face, index) -> tuple[int, ...]:
    from .extraction import centre_weights

    return centre_weights(X, face, index)


def enumerate_links(
    X: SimplexVariety,
    dmax: Fraction | int | str = Fraction(5),
    dedup_symmetry: bool = False,
    midpoints: bool = True,
    count_points: bool = True,
) -> list[LinkRecord]:
    """One record per terminal extraction of discrepancy at most ``dmax``."""
    return [
        run_link(X, c, midpoints=midpoints, count_points=count_points)
        for c in candidate_points(X, dmax, dedup_symmetry=dedup_symmetry)
    ]


# ---------------------------------------------------------------------------
# signatures and inverses


def step_signature(steps: Sequence[dict]) -> tuple:
    return tuple((s["kind"], tuple(s["relation"])) for s in steps if s["kind"] in (FLIP, FLOP, ANTIFLIP))


def signature(rec: LinkRecord) -> tuple:
    if rec.end is None:
        return (rec.start["key"], rec.extraction["notation"], step_signature(rec.steps), None, None)
    if rec.end["type"] == "I":
        return (
            rec.start["key"],
            rec.extraction["notation"],
            step_signature(rec.steps),
            rec.end["target"]["key"],
            rec.steps[-1]["notation"],
        )
    return (rec.start["key"], rec.extraction["notation"], step_signature(rec.steps), rec.end["label"], None)


def reverse_signature(rec: LinkRecord) -> tuple:
    """Signature the inverse of a complete Type I link must have."""
    if rec.end is None or rec.end["type"] != "I":
        raise ValueError("only complete Type I links have inverses")
    rev = []
    for s in reversed(rec.steps):
        if s["kind"] in (FLIP, FLOP, ANTIFLIP):
            rev.append((_REVERSE_KIND[s["kind"]], display_relation([-x for x in s["raw"]])))
    return (
        rec.end["target"]["key"],
        rec.steps[-1]["notation"],
        tuple(rev),
        rec.start["key"],
        rec.extraction["notation"],
    )


def pair_inverses(records: Sequence[LinkRecord]) -> list[int | None]:
    """Index of each complete Type I record's inverse, or ``None``.

    Records are annotated in place through ``inverse_of``.
    """
    by_sig: dict[tuple, list[int]] = {}
    for i, r in enumerate(records):
        if r.is_complete:
            by_sig.setdefault(signature(r), []).append(i)
    out: list[int | None] = []
    for i, r in enumerate(records):
        j = None
        if r.is_complete and r.end["type"] == "I":
            hits = by_sig.get(reverse_signature(r), [])
            j = hits[0] if hits else None
        r.inverse_of = j
        out.append(j)
    return out


def replay_inverse(rec: LinkRecord) -> LinkRecord:
    """Run the link backwards from its endpoint, using the blowdown as extraction."""
    if rec.end is None or rec.end["type"] != "I":
        raise ValueError("only complete Type I links can be replayed")
    Xp = SimplexVariety(rec.end["rays"])
    return run_link(Xp, rec.steps[-1]["point"], midpoints=False)


def midpoint_report(rec: LinkRecord) -> dict:
    return {
        "fano_models": [i + 1 for i, f in enumerate(rec.midpoints.get("fano", [])) if f],
        "flop_bases": rec.midpoints.get("flop_bases", []),
    }


# ---------------------------------------------------------------------------
# webs


@dataclass(frozen=True)
class WebRunConfig:
    dmax: Fraction = Fraction(5)
    dedup_symmetry: bool = True
    jobs: int = 1
    offset: int = 0
    limit: int | None = None
    complete_only: bool = False
    count_points: bool = True


def _web_worker(args) -> tuple[int, str, list[str], list[str]]:
    idx, name, rays, cfg = args
    lines: list[str] = []
    diags: list[str] = []
    try:
        X = SimplexVariety(rays)
        for rec in enumerate_links(X, cfg.dmax, cfg.dedup_symmetry, count_points=cfg.count_points):
            if cfg.complete_only and not rec.is_complete:
                continue
            rec.start_name = name
            lines.append(rec.to_json())
    except Exception as exc:  # recorded, never dropped
        diags.append(json.dumps({"index": idx, "name": name, "error": f"{type(exc).__name__}: {exc}"}, sort_keys=True))
    return idx, name, lines, diags


def run_web(
    dataset: Sequence[tuple[str, Sequence[Sequence[int]]]],
    config: WebRunConfig = WebRunConfig(),
) -> Iterator[tuple[int, str, list[str], list[str]]]:
    """Yield ``(index, name, record lines, diagnostics)`` per variety, in order.

    ``dataset`` holds ``(name, rays)`` pairs. Results come back in dataset
    order whatever the worker count, so output is byte-identical across
    ``jobs``. ``offset`` skips entries to resume an interrupted run.
    """
    stop = len(dataset) if config.limit is None else min(len(dataset), config.offset + config.limit)
    tasks = [(i, dataset[i][0], tuple(map(tuple, dataset[i][1])), config) for i in range(config.offset, stop)]
    if config.jobs <= 1:
        for t in tasks:
            yield _web_worker(t)
        return
    ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn")
    with ctx.Pool(config.jobs) as pool:
        yield from pool.imap(_web_worker, tasks, chunksize=1)


def collect_web(
    dataset: Sequence[tuple[str, Sequence[Sequence[int]]]],
    config: WebRunConfig = WebRunConfig(),
) -> tuple[list[LinkRecord], list[str]]:
    records: list[LinkRecord] = []
    diags: list[str] = []
    for _, _, lines, d in run_web(dataset, config):
        records.extend(LinkRecord.from_json(x) for x in lines)
        diags.extend(d)
    return records, diags
