"""Command-line front end; every subcommand prints a deterministic JSON report.

Exit codes: 0 success, 2 for a negative result (NotFound, BudgetExceeded,
rejected witness, depth too small), 1 for malformed input or other faults.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .core import Truncation, build_truncation, parse_vid
from .enddegree import NotFoundAtDepth, relative_degree_estimate
from .extraction import OutcomeKind, extract_dense_or_tkk
from .families import FamilySpec, make_presentation
from .minors import (
    MinorWitness,
    NotFound,
    TopoWitness,
    find_clique_minor,
    find_topological_clique,
    verify_minor_witness,
    verify_topo_witness,
)
from .separators import domination_certificate, min_vertex_separator

OK, ERROR, NEGATIVE = 0, 1, 2


class CliError(Exception):
    pass


def _presentation(args):
    if not args.family_manifest:
        raise CliError("--family-manifest is required")
    text = Path(args.family_manifest).read_text()
    return make_presentation(FamilySpec.from_manifest(text))


def _graph(args) -> Truncation:
    if getattr(args, "truncation", None):
        return Truncation.from_text(Path(args.truncation).read_text())
    p = _presentation(args)
    return build_truncation(p, args.depth, args.degree_cap)


def _end(p, name):
    if name is None:
        return p.ends[0] if p.ends else None
    return p.end(int(name)) if name.isdigit() else p.end(name)


def _vids(text: str) -> list:
    return [parse_vid(x) for x in text.split(",") if x.strip()]


def cmd_generate(args):
    t = _graph(args)
    return OK, t.to_text()


def cmd_degree(args):
    p = _presentation(args)
    end = _end(p, args.end)
    if end is None:
        raise CliError("presentation has no ends")
    try:
        est = relative_degree_estimate(p, end, args.steps, args.depth)
    except NotFoundAtDepth as exc:
        return NEGATIVE, {"outcome": "not-found-at-depth", "reason": str(exc)}
    return OK, est.to_json()


def cmd_separator(args):
    t = _graph(args)
    res = min_vertex_separator(t, _vids(args.sources), _vids(args.targets), protect_targets=args.protect_targets)
    return OK, res.to_json()


def cmd_dominate(args):
    p = _presentation(args)
    end = _end(p, args.end)
    cert = domination_certificate(p, parse_vid(args.vertex), end, args.depth)
    return OK, cert.to_json()


def _search(args, fn):
    t = _graph(args)
    res = fn(t, args.k, args.budget)
    if isinstance(res, NotFound):
        return NEGATIVE, res.to_json()
    return OK, res.to_json()


def cmd_minor(args):
    return _search(args, find_clique_minor)


def cmd_topo(args):
    return _search(args, find_topological_clique)


def cmd_extract(args):
    p = _presentation(args)
    out = extract_dense_or_tkk(p, Fraction(args.m), args.k, args.depth, args.budget)
    code = NEGATIVE if out.kind is OutcomeKind.BUDGET else OK
    return code, out.to_json()


def cmd_verify(args):
    data = json.loads(Path(args.witness).read_text())
    t = _graph(args)
    if data.get("kind") == "minor":
        ok, problems = verify_minor_witness(t, MinorWitness.from_json(data))
    elif data.get("kind") == "topo":
        ok, problems = verify_topo_witness(t, TopoWitness.from_json(data))
    else:
        raise CliError("witness 'kind' must be 'minor' or 'topo'")
    return (OK if ok else NEGATIVE), {"valid": ok, "violations": problems}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="endgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, depth=5, truncation=False):
        sp.add_argument("--family-manifest", help="JSON file with 'family' and 'params'")
        sp.add_argument("--depth", type=int, default=depth)
        sp.add_argument("--out", help="write the report here instead of stdout")
        if truncation:
            sp.add_argument("--truncation", help="truncation file instead of a manifest")
            sp.add_argument("--degree-cap", type=int, default=None)

    sp = sub.add_parser("generate", help="write a truncation file")
    common(sp, truncation=True)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("degree", help="relative degree estimate of an end")
    common(sp)
    sp.add_argument("--end", help="end name or catalog index (default: first)")
    sp.add_argument("--steps", type=int, default=3)
    sp.set_defaults(func=cmd_degree)

    sp = sub.add_parser("separator", help="minimum vertex separator")
    common(sp, truncation=True)
    sp.add_argument("--sources", required=True, help="comma-separated vertex ids")
    sp.add_argument("--targets", required=True, help="comma-separated vertex ids")
    sp.add_argument("--protect-targets", action="store_true")
    sp.set_defaults(func=cmd_separator)

    sp = sub.add_parser("dominate", help="domination certificate of a vertex for an end")
    common(sp)
    sp.add_argument("--vertex", required=True)
    sp.add_argument("--end")
    sp.set_defaults(func=cmd_dominate)

    for name, func, text in (("minor", cmd_minor, "complete minor search"),
                             ("topo", cmd_topo, "topological complete minor search")):
        sp = sub.add_parser(name, help=text)
        common(sp, truncation=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--budget", type=int, default=100_000)
        sp.set_defaults(func=func)

    sp = sub.add_parser("extract", help="dense subgraph or TK^k")
    common(sp)
    sp.add_argument("--m", required=True, help="rational, e.g. 7/2")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--budget", type=int, default=10_000)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("verify", help="check a witness file")
    common(sp, truncation=True)
    sp.add_argument("--witness", required=True)
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, report = args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        print(f"endgraph: error: {exc}", file=sys.stderr)
        return ERROR
    text = report if isinstance(report, str) else json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
