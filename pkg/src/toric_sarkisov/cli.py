"""Command line front end: ``toric-sarkisov <subcommand> ...``.

Fans are read from the plain text format (``n k`` header, ``k`` rays, then
optional ``C i_1 ... i_n`` cone lines). A source may also be written
``wps:a_0,...,a_n`` for a weighted projective space.

Exit status is 0 on success, 2 for unreadable input or bad arguments and 1
for any other failure. Files named by ``--out`` are written to a temporary
name and moved into place only when the command succeeds.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile
from fractions import Fraction
from typing import Iterator, Sequence

from . import __version__
from .classify import (
    classify_dim3,
    convert_vertex_matrices,
    p4_weight_search,
    verify_entries,
    write_dataset,
    wps,
)
from .extraction import candidate_points
from .fan import (
    Fan,
    FanError,
    FanFormatError,
    SimplexVariety,
    fan_from_entry,
    gorenstein_data,
    is_canonical,
    is_fano,
    is_terminal,
    low_point,
    parse_fan_text,
)
from .links import LinkRecord, WebRunConfig, enumerate_links, run_link, run_web
from .svg import shed_off, shed_svg


class UsageError(Exception):
    """Bad input: reported with exit status 2."""


# ---------------------------------------------------------------------------
# input


def _read_source(source: str) -> list[tuple[tuple, list | None, str]]:
    if source.startswith("wps:"):
        try:
            w = [int(x) for x in source[4:].split(",")]
        except ValueError:
            raise UsageError(f"bad weights in {source!r}") from None
        try:
            X = wps(w)
        except (FanError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        return [(X.rays, None, X.label())]
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    try:
        return parse_fan_text(text)
    except FanFormatError as exc:
        raise UsageError(f"{source}: {exc}") from None


def _read_fans(source: str) -> list[tuple[str, Fan]]:
    out = []
    for rays, cones, name in _read_source(source):
        try:
            out.append((name, fan_from_entry(rays, cones)))
        except FanError as exc:
            raise UsageError(f"{source}: entry {name}: {exc}") from None
    return out


def _read_simplex(source: str) -> SimplexVariety:
    fans = _read_fans(source)
    if len(fans) != 1:
        raise UsageError(f"{source}: expected one fan, found {len(fans)}")
    X = fans[0][1]
    if not isinstance(X, SimplexVariety):
        raise UsageError(f"{source}: expected a simplex fan (n + 1 rays, no cone lines)")
    return X


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if q <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return q


def _point(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer point: {text!r}") from None


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


# ---------------------------------------------------------------------------
# output


@contextlib.contextmanager
def _output(path: str | None) -> Iterator:
    """Stdout, or a file that only appears if the block succeeds."""
    if path is None:
        yield sys.stdout
        sys.stdout.flush()
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _emit(fh, fmt: str, obj: dict, pretty: str) -> None:
    if fmt == "jsonl":
        fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        fh.write(pretty + "\n")


def _tuple(xs: Sequence[int]) -> str:
    return "(" + ",".join(map(str, xs)) + ")"


def _group(disc: Sequence[int]) -> str:
    return " x ".join(f"Z/{d}" for d in disc) if disc else "trivial"


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    with _output(args.out) as fh:
        for name, F in _read_fans(args.source):
            terminal = is_terminal(F)
            canonical = terminal or is_canonical(F)
            simplex = isinstance(F, SimplexVariety)
            fano = is_fano(F)
            obj = {"name": name, "terminal": terminal, "canonical": canonical, "fano": fano, "simplex": simplex}
            status = "terminal" if terminal else "canonical, not terminal" if canonical else "not canonical"
            kind = ("Fano " if fano else "non-Fano ") + ("simplex" if simplex else "fan")
            pretty = f"{name}: {status} {kind}" if terminal else f"{name}: {status}; {kind}"
            if not terminal:
                w = low_point(F)
                obj["witness"] = list(w[1])
                pretty += f", witness {_tuple(w[1])}"
            if simplex:
                obj.update(weights=list(F.sorted_weights), discriminant=list(F.discriminant), key=F.key)
                pretty += f", weights {_tuple(F.sorted_weights)}, discriminant {_group(F.discriminant)}"
            _emit(fh, args.format, obj, pretty)
    return 0


def cmd_info(args) -> int:
    with _output(args.out) as fh:
        for name, F in _read_fans(args.source):
            obj: dict = {"name": name}
            lines = [f"{name}:"]
            if isinstance(F, SimplexVariety):
                obj.update(label=F.label(), weights=list(F.sorted_weights), discriminant=list(F.discriminant))
                lines.append(f"  {F.label()}  weights {_tuple(F.sorted_weights)}  discriminant {_group(F.discriminant)}")
            try:
                g = gorenstein_data(F, count_points=not args.no_points)
            except FanError as exc:
                obj["anticanonical"] = None
                lines.append(f"  {exc}")
            else:
                obj["anticanonical"] = {"degree": str(g.degree), "h0": g.h0, "lattice": g.is_lattice}
                h0 = "-" if g.h0 is None else g.h0
                lines.append(f"  (-K)^n = {g.degree}  h0(-K) = {h0}  {'Gorenstein' if g.is_lattice else 'not Gorenstein'}")
            _emit(fh, args.format, obj, "\n".join(lines))
    return 0


def cmd_extract(args) -> int:
    X = _read_simplex(args.source)
    with _output(args.out) as fh:
        for c in candidate_points(X, args.dmax, dedup_symmetry=args.dedup_symmetry):
            obj = {
                "point": list(c.v),
                "notation": c.notation(),
                "relation": list(c.relation),
                "centre_weights": list(c.centre),
                "index": c.index,
                "discrepancy": str(c.discrepancy),
            }
            pretty = f"{_tuple(c.v)}  {c.notation()}  discrepancy {c.discrepancy}"
            _emit(fh, args.format, obj, pretty)
    return 0


def _link_lines(records: Sequence[LinkRecord], fmt: str) -> Iterator[str]:
    for r in records:
        yield r.to_json() if fmt == "jsonl" else r.summary()


def cmd_link(args) -> int:
    X = _read_simplex(args.source)
    if args.point is None and not args.all:
        raise UsageError("link needs --point or --all")
    if args.point is not None:
        if len(args.point) != X.dim:
            raise UsageError(f"--point needs {X.dim} coordinates")
        try:
            records = [run_link(X, args.point, count_points=not args.no_points)]
        except FanError as exc:
            raise UsageError(str(exc)) from None
    else:
        records = enumerate_links(X, args.dmax, args.dedup_symmetry, count_points=not args.no_points)
    if args.complete_only:
        records = [r for r in records if r.is_complete]
    with _output(args.out) as fh:
        for line in _link_lines(records, args.format):
            fh.write(line + "\n")
    return 0


def _dataset(args) -> list[tuple[str, tuple]]:
    if args.source == "dim3":
        return classify_dim3().as_rays()
    out = []
    for name, F in _read_fans(args.source):
        if not isinstance(F, SimplexVariety):
            raise UsageError(f"{args.source}: entry {name} is not a simplex fan")
        out.append((name, F.rays))
    return out


def cmd_web(args) -> int:
    data = _dataset(args)
    cfg = WebRunConfig(
        dmax=args.dmax,
        dedup_symmetry=args.dedup_symmetry,
        jobs=args.jobs,
        offset=args.offset,
        limit=args.limit,
        complete_only=args.complete_only,
        count_points=not args.no_points,
    )
    failures = 0
    with _output(args.out) as fh:
        for _, name, lines, diags in run_web(data, cfg):
            for line in lines:
                fh.write((line if args.format == "jsonl" else LinkRecord.from_json(line).summary()) + "\n")
            for d in diags:
                failures += 1
                print(f"diagnostic: {d}", file=sys.stderr)
    return 1 if failures else 0


def cmd_classify3(args) -> int:
    D = classify_dim3(args.bound)
    with _output(args.out) as fh:
        if args.format == "fan":
            fh.write(write_dataset(D.entries))
            return 0
        for name, X in D.entries:
            obj = {"name": name, "weights": list(X.sorted_weights), "discriminant": list(X.discriminant), "key": X.key}
            _emit(fh, args.format, obj, f"{name}  weights {_tuple(X.sorted_weights)}  discriminant {_group(X.discriminant)}")
    return 0


def cmd_verify4(args) -> int:
    if args.vertex_matrices:
        try:
            with open(args.source, encoding="utf-8") as fh:
                text = convert_vertex_matrices(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.source}: {exc.strerror}") from None
        except FanFormatError as exc:
            raise UsageError(f"{args.source}: {exc}") from None
        try:
            entries = parse_fan_text(text)
        except FanFormatError as exc:
            raise UsageError(f"{args.source}: {exc}") from None
    else:
        entries = _read_source(args.source)
    rep, good = verify_entries(entries)
    with _output(args.out) as fh:
        if args.format == "jsonl":
            fh.write(json.dumps(rep.to_dict(), sort_keys=True, separators=(",", ":")) + "\n")
        else:
            fh.write(
                f"entries {rep.entries}  simplices {rep.simplices}  terminal {rep.terminal}  "
                f"wps {rep.wps}  fake {rep.fake}  duplicates {len(rep.duplicates)}  rejected {len(rep.rejected)}\n"
            )
            for r in rep.rejected:
                fh.write(f"rejected {r['name']}: {r['reason']}" + (f" {_tuple(r['witness'])}" if "witness" in r else "") + "\n")
            for a, b in rep.duplicates:
                fh.write(f"duplicate {b} of {a}\n")
    return 0 if rep.ok else 1


def cmd_p4_search(args) -> int:
    flop, flip = p4_weight_search(
        args.bound_abc,
        args.bound_d,
        shape_filter=not args.literal,
        skip_weights_upto=0 if args.literal else 5,
    )
    with _output(args.out) as fh:
        obj = {"flop": [list(w) for w in flop], "flip": [list(w) for w in flip]}
        pretty = "a+b+c = 4d+1: " + " ".join(map(_tuple, flop)) + "\na+b+c < 4d+1: " + " ".join(map(_tuple, flip))
        _emit(fh, args.format, obj, pretty)
    return 0


def cmd_shed_svg(args) -> int:
    if args.out is None:
        raise UsageError("shed-svg needs --out")
    if args.point is not None:
        X = _read_simplex(args.source)
        try:
            models = run_link(X, args.point, midpoints=False).models
        except FanError as exc:
            raise UsageError(str(exc)) from None
    else:
        models = [F for _, F in _read_fans(args.source)]
    if models[0].dim not in (2, 3):
        print(f"error: no shed picture for dimension {models[0].dim}; only 2 and 3 are drawn", file=sys.stderr)
        return 1
    stem, ext = os.path.splitext(args.out)
    ext = ext or ".svg"
    paths = [args.out] if len(models) == 1 else [f"{stem}-{i}{ext}" for i in range(len(models))]
    for i, (path, F) in enumerate(zip(paths, models)):
        text = shed_off(F) if ext == ".off" else shed_svg(F, title=f"model {i}")
        with _output(path) as fh:
            fh.write(text)
        print(path)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toric-sarkisov", description="Toric Sarkisov links between terminal Fano simplices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("pretty", "jsonl"), default="pretty"):
        sp.add_argument("--out", help="write here instead of standard output")
        sp.add_argument("--format", choices=fmt, default=default)

    def link_opts(sp):
        sp.add_argument("--dmax", type=_rational, default=Fraction(5), help="largest discrepancy of the extraction (default 5)")
        sp.add_argument("--dedup-symmetry", type=_on_off, default=True, metavar="on|off", help="one extraction per symmetry orbit (default on)")
        sp.add_argument("--complete-only", action="store_true", help="drop bad links")
        sp.add_argument("--no-points", action="store_true", help="skip h0(-K) counts at flop midpoints")

    sp = sub.add_parser("check", help="terminal, canonical and Fano checks")
    sp.add_argument("source")
    common(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("info", help="weights, discriminant and anticanonical data")
    sp.add_argument("source")
    sp.add_argument("--no-points", action="store_true", help="skip counting lattice points")
    common(sp)
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("extract", help="terminal extremal extractions")
    sp.add_argument("source")
    sp.add_argument("--dmax", type=_rational, default=Fraction(5))
    sp.add_argument("--dedup-symmetry", type=_on_off, default=False, metavar="on|off")
    common(sp)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("link", help="run one link or all links from a variety")
    sp.add_argument("source")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--point", type=_point, help="extraction point x,y,z[,w]")
    g.add_argument("--all", action="store_true", help="every extraction up to --dmax")
    link_opts(sp)
    common(sp, default="jsonl")
    sp.set_defaults(func=cmd_link)

    sp = sub.add_parser("web", help="links from every variety of a dataset")
    sp.add_argument("source", help="fan file, or dim3 for the terminal Fano simplices of dimension 3")
    link_opts(sp)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--offset", type=int, default=0, help="skip this many varieties (resume)")
    sp.add_argument("--limit", type=int, default=None)
    common(sp, default="jsonl")
    sp.set_defaults(func=cmd_web)

    sp = sub.add_parser("classify3", help="terminal Fano simplices of dimension 3")
    sp.add_argument("--bound", type=int, default=25, help="largest normalised volume")
    common(sp, fmt=("pretty", "jsonl", "fan"))
    sp.set_defaults(func=cmd_classify3)

    sp = sub.add_parser("verify4", help="verify a dataset of terminal Fano simplices")
    sp.add_argument("source")
    sp.add_argument("--vertex-matrices", action="store_true", help="input holds one vertex list [[..],..] per line")
    common(sp)
    sp.set_defaults(func=cmd_verify4)

    sp = sub.add_parser("p4-search", help="weighted blowups of a point of P^4 followed by a flop or a flip")
    sp.add_argument("--bound-abc", type=int, default=100)
    sp.add_argument("--bound-d", type=int, default=100)
    sp.add_argument("--literal", action="store_true", help="arithmetic conditions only, no link runs")
    common(sp)
    sp.set_defaults(func=cmd_p4_search)

    sp = sub.add_parser("shed-svg", help="draw sheds (SVG), or write OFF meshes when --out ends in .off")
    sp.add_argument("source")
    sp.add_argument("--point", type=_point, help="draw every model of the link from this extraction")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_shed_svg)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name in ("jobs", "offset", "limit", "bound_abc", "bound_d", "bound"):
        value = getattr(args, name, None)
        if value is not None and value < (1 if name != "offset" else 0):
            print(f"error: --{name.replace('_', '-')} out of range", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FanError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
