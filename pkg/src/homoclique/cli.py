"""Batch front door: parse graph/spec files, drive build-check-classify
pipelines, and emit machine-readable reports.

Every run prints a report (text summary by default, the full JSON envelope
with --format json) and can mirror the envelope to a file with --report.
Reports embed the tool version, a full config echo including the effective
seed, and a sha256 of every input file, so a run is reproducible from the
report alone.  Exit codes: 0 success, 1 input error, 2 indeterminate
(unclassifiable input, incomplete build, exhausted search budget),
3 internal error.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import sys
import traceback
from pathlib import Path

from . import __version__
from .amalgam import check_amalgamation_property, load_spec_file
from .classify import classify, is_ultrahomogeneous_finite, piecewise_check
from .errors import (
    GraphFormatError,
    InternalInvariantError,
    PreconditionError,
    SearchBudgetExceeded,
    SpecFormatError,
    UnclassifiableAtLevel,
)
from .graphs import ColoredGraph, class_profile, from_json_obj, from_text, to_json_obj
from .limits import (
    APPROXIMANT_FORMAT,
    Approximant,
    approximant_from_json_obj,
    approximant_to_json_obj,
    build_family,
)
from .patterns import (
    catalog,
    check_omitted_structure,
    match_catalog_name,
    minimally_omitted,
)

REPORT_FORMAT = "homoclique-report"
SCHEMA_PATH = Path(__file__).parent / "schemas" / "report.schema.json"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INDETERMINATE = 2
EXIT_INTERNAL = 3


class CliInputError(Exception):
    """Bad flags or unusable input files (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise CliInputError(message)


# ============================================================
# plumbing
# ============================================================


def _sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _envelope(args: argparse.Namespace, inputs: list[str], result: dict,
              figures: list[str] | None = None) -> dict:
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func",) and v is not None}
    env = {
        "format": REPORT_FORMAT,
        "version": __version__,
        "command": args.command,
        "config": config,
        "inputs": {p: _sha256(p) for p in inputs},
        "result": result,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if figures:
        env["figures"] = figures
    return env


def _load_graph_arg(path: str) -> tuple[ColoredGraph, Approximant | None]:
    """A graph from a text file, a graph JSON, or an approximant JSON."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        if obj.get("format") == APPROXIMANT_FORMAT:
            a = approximant_from_json_obj(obj)
            return a.graph, a
        return from_json_obj(obj), None
    return from_text(text), None


def _effective_seed(args: argparse.Namespace) -> int:
    env = os.environ.get("FF_SEED")
    if env is not None:
        try:
            args.seed = int(env)
        except ValueError:
            raise CliInputError(f"FF_SEED must be an integer, got {env!r}") from None
    return args.seed


def _render_figures(g: ColoredGraph, outdir: str, stem: str) -> list[str]:
    """Adjacency heatmap (red block first) and clique-size bars as PNGs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    Path(outdir).mkdir(parents=True, exist_ok=True)
    order = [v for v in range(g.n) if g.colors[v] == "red"]
    nred = len(order)
    order += [v for v in range(g.n) if g.colors[v] == "blue"]
    mat = np.zeros((g.n, g.n), dtype=int)
    for i, u in enumerate(order):
        for j, v in enumerate(order):
            mat[i, j] = g.adjacency[u] >> v & 1
    paths = []
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.imshow(mat, cmap="Greys", interpolation="nearest")
    ax.axhline(nred - 0.5, color="tab:red", linewidth=0.8)
    ax.axvline(nred - 0.5, color="tab:red", linewidth=0.8)
    ax.set_title(f"adjacency ({g.n} vertices, red block first)")
    p = str(Path(outdir) / f"{stem}_adjacency.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    prof = class_profile(g)
    fig, ax = plt.subplots(figsize=(6, 4))
    for color, offset in (("red", -0.2), ("blue", 0.2)):
        sizes = sorted((len(c) for c in prof.cliques(color)), reverse=True)
        ax.bar([i + offset for i in range(len(sizes))], sizes, width=0.4,
               color="tab:red" if color == "red" else "tab:blue", label=color)
    ax.set_xlabel("maximal clique (sorted)")
    ax.set_ylabel("size")
    ax.legend()
    ax.set_title("clique sizes per color class")
    p = str(Path(outdir) / f"{stem}_cliques.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)
    return paths


# ============================================================
# subcommands: each returns (result dict, inputs, text lines, exit code,
# figures)
# ============================================================


def _cmd_build(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    seed = _effective_seed(args)
    spec = load_spec_file(args.spec)
    a = build_family(spec, t=args.level, budget=args.budget, seed=seed)
    if args.out:
        Path(args.out).write_text(
            json.dumps(approximant_to_json_obj(a), indent=2, sort_keys=True) + "\n")
    result = {
        "spec_name": spec.name,
        "n": a.graph.n,
        "level": a.level,
        "target_level": a.target_level,
        "complete": a.complete,
        "out": args.out,
        "log_tail": list(a.log[-4:]),
    }
    lines = [f"spec {spec.name}: n={a.graph.n} level={a.level}/{a.target_level} "
             f"complete={a.complete}"]
    if args.out:
        lines.append(f"wrote {args.out}")
    figures = (_render_figures(a.graph, args.figures, "build")
               if args.figures else [])
    code = EXIT_OK if a.complete else EXIT_INDETERMINATE
    return result, [args.spec], lines, code, figures


def _cmd_classify(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    seed = _effective_seed(args)
    inputs = []
    if args.in_path:
        g, a = _load_graph_arg(args.in_path)
        target = a if a is not None else g
        inputs.append(args.in_path)
    elif args.spec:
        spec = load_spec_file(args.spec)
        target = build_family(spec, t=args.level, budget=args.budget, seed=seed)
        inputs.append(args.spec)
    else:
        raise CliInputError("classify needs --in or --spec")
    figures = []
    try:
        label, ev = classify(target, t=args.level, budget=args.budget, seed=seed)
    except UnclassifiableAtLevel as exc:
        result = {"classified": False, "reason": exc.reason,
                  "evidence": exc.evidence or {}}
        lines = [f"unclassifiable: {exc.reason}"]
        for name in (exc.evidence or {}).get("consistent", []):
            lines.append(f"  still consistent with: {name}")
        return result, inputs, lines, EXIT_INDETERMINATE, figures
    result = {
        "classified": True,
        "label": str(label),
        "label_value": label.value,
        "wrappers": [list(w) for w in label.wrappers],
        "observed_bounds": label.observed_bounds,
        "evidence": ev.to_json_obj(),
    }
    if args.evidence:
        Path(args.evidence).write_text(
            json.dumps(result, indent=2, sort_keys=True) + "\n")
    if args.figures:
        g = target.graph if isinstance(target, Approximant) else None
        if g is None and isinstance(target, ColoredGraph):
            g = target
        if g is not None:
            figures = _render_figures(g, args.figures, "classify")
    lines = [f"label: {label}"]
    for step in ev.reductions:
        lines.append(f"  reduction: {step}")
    lines.append(f"  piecewise={ev.piecewise} d={ev.d_realized} d~={ev.dtilde_realized}")
    return result, inputs, lines, EXIT_OK, figures


def _cmd_omitted(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    g, _ = _load_graph_arg(args.in_path)
    o = minimally_omitted(g, args.bound)
    rep = check_omitted_structure(o)
    named = sorted(o.name_set())
    unnamed = len(o.members) - len(named)
    shown = named + [f"<unnamed {m.n}-vertex pattern>"
                     for m in o.members if match_catalog_name(m) is None]
    result = {
        "bound": o.bound,
        "names": named,
        "unnamed_members": unnamed,
        "count": len(o.members),
        "structure_passed": rep.passed,
        "structure_violations": len(rep.violations),
    }
    lines = [f"minimally omitted at bound {o.bound}: " + ", ".join(shown),
             f"structure check: {'pass' if rep.passed else 'FAIL'}"]
    return result, [args.in_path], lines, EXIT_OK, []


def _cmd_amalgam_check(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    spec = load_spec_file(args.spec)
    cert = check_amalgamation_property(spec, args.max_size)
    counter = None
    if cert.counterexample is not None:
        pr = cert.counterexample
        counter = {
            "j": to_json_obj(pr.j),
            "a1": to_json_obj(pr.a1),
            "a2": to_json_obj(pr.a2),
            "iota1": list(pr.iota1.as_dict().items()),
            "iota2": list(pr.iota2.as_dict().items()),
        }
    result = {
        "spec_name": cert.spec_name,
        "max_size": cert.max_size,
        "holds_up_to": cert.holds_up_to,
        "problems_checked": cert.problems_checked,
        "counterexample": counter,
        "note": (f"verified only for parts with at most {cert.max_size} vertices; "
                 "inconclusive beyond that size" if cert.holds else
                 "counterexample found; the property fails outright"),
    }
    if cert.holds:
        lines = [f"amalgamation holds for all {cert.problems_checked} problems "
                 f"with parts of at most {cert.max_size} vertices",
                 f"inconclusive beyond n={cert.max_size}"]
    else:
        lines = [f"counterexample found after {cert.problems_checked} problems "
                 f"(base {pr.j.n} vertices, extensions {pr.a1.n}/{pr.a2.n})"]
    return result, [args.spec], lines, EXIT_OK, []


def _cmd_uh_check(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    g, _ = _load_graph_arg(args.in_path)
    verdict = is_ultrahomogeneous_finite(g)
    result = {"ultrahomogeneous": verdict, "n": g.n}
    return result, [args.in_path], [f"ultrahomogeneous: {str(verdict).lower()}"], EXIT_OK, []


def _cmd_piecewise(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    g, _ = _load_graph_arg(args.in_path)
    prof = class_profile(g)
    verdict = piecewise_check(g, level=args.level, jobs=args.jobs)
    pieces = len(prof.red_cliques) * len(prof.blue_cliques)
    result = {"piecewise": verdict, "pieces": pieces, "level": args.level}
    lines = [f"piecewise ultrahomogeneous: {str(verdict).lower()} ({pieces} pieces)"]
    return result, [args.in_path], lines, EXIT_OK, []


def _cmd_catalog(args) -> tuple[dict, list[str], list[str], int, list[str]]:
    pats = []
    for p in catalog():
        pats.append({
            "name": p.name,
            "tilde_partner": p.tilde_partner,
            "parametric": p.parametric,
            "vertices": p.graph.n,
            "colors": list(p.graph.colors),
            "edges": [[u, v] for u, v in p.graph.edges()],
            "edge_count": p.graph.edge_count(),
        })
    result = {"patterns": pats}
    lines = [f"{p['name']:10s} n={p['vertices']} edges={p['edge_count']} "
             f"tilde={p['tilde_partner']}" for p in pats]
    return result, [], lines, EXIT_OK, []


# ============================================================
# parser / dispatch
# ============================================================


def _build_parser() -> _Parser:
    parser = _Parser(prog="homoclique",
                     description="finite approximants and classification of "
                                 "2-colored clique-union ultrahomogeneous graphs")
    parser.add_argument("--version", action="version", version=f"homoclique {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text",
                        help="stdout rendering (default text)")
    common.add_argument("--report", metavar="PATH",
                        help="also write the full JSON report envelope here")

    p = sub.add_parser("build", parents=[common],
                       help="build a saturated approximant from a class spec")
    p.add_argument("--spec", required=True, help="class spec JSON file")
    p.add_argument("--out", help="write the approximant JSON here")
    p.add_argument("--level", type=int, default=4)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0, help="FF_SEED overrides")
    p.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("classify", parents=[common],
                       help="name the family an input approximates")
    p.add_argument("--in", dest="in_path", help="graph text/JSON or approximant JSON")
    p.add_argument("--spec", help="build this spec first, then classify")
    p.add_argument("--evidence", metavar="PATH", help="write label + evidence JSON here")
    p.add_argument("--level", type=int, default=4)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0, help="FF_SEED overrides")
    p.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("omitted", parents=[common],
                       help="minimally omitted patterns of a graph")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--bound", type=int, default=4)
    p.set_defaults(func=_cmd_omitted)

    p = sub.add_parser("amalgam-check", parents=[common],
                       help="exhaustive amalgamation certificate for a spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--max-size", type=int, default=4)
    p.set_defaults(func=_cmd_amalgam_check)

    p = sub.add_parser("uh-check", parents=[common],
                       help="exact ultrahomogeneity of a small graph")
    p.add_argument("--in", dest="in_path", required=True)
    p.set_defaults(func=_cmd_uh_check)

    p = sub.add_parser("piecewise-check", parents=[common],
                       help="ultrahomogeneity of every clique-pair piece")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for pieces")
    p.set_defaults(func=_cmd_piecewise)

    p = sub.add_parser("catalog", parents=[common],
                       help="the twelve named pattern families")
    p.set_defaults(func=_cmd_catalog)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        parser = _build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version
            return int(exc.code or 0)
        result, inputs, lines, code, figures = args.func(args)
        env = _envelope(args, inputs, result, figures)
        if args.report:
            Path(args.report).write_text(json.dumps(env, indent=2, sort_keys=True) + "\n")
        if args.format == "json":
            print(json.dumps(env, indent=2, sort_keys=True))
        else:
            for line in lines:
                print(line)
        return code
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GraphFormatError, SpecFormatError, PreconditionError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UnclassifiableAtLevel, SearchBudgetExceeded) as exc:
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
