"""Batch command-line front end.

Subcommands wire the pipeline: extend a nominal model, compute minimal cut
sets, build and evaluate fault trees, generate FMEA tables, and check,
convert, or synthesize timed failure propagation graphs.  Identical inputs
and options produce byte-identical artifacts.

Exit codes: 0 success, 1 negative analysis verdict (an incomplete TFPG),
2 usage or input error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from mbsa import __version__
from mbsa.analysis import compute_cut_sequences, compute_mcs, cutsets_to_tsv, cutsets_to_xml
from mbsa.cca import apply_cca, dependency_groups, parse_cca
from mbsa.diagnostics import Diagnostic, InputError, MbsaError, ResourceCapError
from mbsa.fault_tree import (
    ProbabilityAssignment,
    build_fault_tree,
    evaluate_probability,
    export_ft,
    rare_event_approximation,
    symbolic_probability,
)
from mbsa.faults import extend_model, load_fault_library, parse_fei
from mbsa.fmea import export_fmea, generate_dynamic_fmea, generate_fmea
from mbsa.probability import pexpr_to_text, prob_str, render_prob_script
from mbsa.sts.check import type_check
from mbsa.sts.parse import parse_expr_text, parse_model
from mbsa.sts.pretty import print_expr, print_model
from mbsa.tfpg import (
    parse_binding,
    parse_tfpg,
    synthesize_structure,
    tfpg_from_xml,
    tfpg_to_dot,
    tfpg_to_xml,
    validate_behavioral,
    write_tfpg,
)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


def _read_named(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError([Diagnostic(f"{what} file not found: {path}", filename=path)])
    return p.read_text(encoding="utf-8")


def _load_config(path: str) -> dict[str, str]:
    """Key-value configuration: one ``key = value`` per line, # comments."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(_read_named(path, "config").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError([Diagnostic("expected 'key = value'", lineno, filename=path)])
        key, _, value = line.partition("=")
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Config supplies defaults; explicit flags win."""
    if not getattr(args, "config", None):
        return
    config = _load_config(args.config)
    for key, value in config.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise InputError([Diagnostic(f"unknown config key {key!r}", filename=args.config)])
        if parser.get_default(dest) == getattr(args, dest):
            default = parser.get_default(dest)
            if isinstance(default, bool):
                setattr(args, dest, value.lower() in ("1", "true", "yes"))
            elif isinstance(default, int) and default is not None:
                setattr(args, dest, int(value))
            else:
                setattr(args, dest, value)


def _load_extended(args):
    model = parse_model(_read_named(args.model, "model"), args.model)
    typed = type_check(model, args.model)
    library = load_fault_library(_read_named(args.flib, "fault library") if args.flib else "",
                                 args.flib or "<flib>")
    instructions = parse_fei(_read_named(args.fei, "fault extension") if args.fei else "",
                             args.fei or "<fei>")
    xm = extend_model(typed, library, instructions)
    specs = []
    if getattr(args, "cca", None):
        specs = parse_cca(_read_named(args.cca, "common causes"), args.cca)
        xm = apply_cca(xm, specs)
    return xm, specs


def _parse_tle(args, xm):
    if not args.tle:
        raise InputError([Diagnostic("a top-level event is required (--tle)")])
    expr = parse_expr_text(args.tle, "<tle>")
    xm.typed.check_expr(expr, filename="<tle>")
    return expr


def _step_bound(args) -> int | None:
    return None if args.step_bound == 0 else args.step_bound


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8")
    print(str(path))


def _registry_json(xm) -> str:
    payload = {
        "model": xm.model.name,
        "events": [
            {
                "name": info.name,
                "mode_variable": info.mode_var,
                "occurrence": print_expr(info.occurrence),
                "probability": prob_str(info.probability),
                "suppression": print_expr(info.suppression),
            }
            for info in xm.events.values()
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _formats(args, allowed: tuple[str, ...]) -> list[str]:
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    for f in formats:
        if f not in allowed:
            raise InputError([Diagnostic(f"unknown format {f!r} (expected one of {', '.join(allowed)})")])
    return formats


# ---------------------------------------------------------------------------
# Subcommands

def cmd_extend(args) -> int:
    xm, _ = _load_extended(args)
    out = _out_dir(args)
    stem = Path(args.model).stem
    _write(out / f"{stem}_extended.smx", print_model(xm.model))
    _write(out / f"{stem}_events.json", _registry_json(xm))
    return EXIT_OK


def cmd_mcs(args) -> int:
    xm, _ = _load_extended(args)
    tle = _parse_tle(args, xm)
    result = compute_mcs(xm, tle, args.max_card, _step_bound(args), args.cap)
    if result.nominal_warning:
        print("warning: top-level event is reachable with no faults", file=sys.stderr)
    out = _out_dir(args)
    for fmt in _formats(args, ("tsv", "xml")):
        text = cutsets_to_tsv(result) if fmt == "tsv" else cutsets_to_xml(result)
        _write(out / f"mcs.{fmt}", text)
    return EXIT_OK


def _build_tree(args, xm, specs):
    tle = _parse_tle(args, xm)
    result = compute_mcs(xm, tle, args.max_card, _step_bound(args), args.cap)
    sequences = None
    if args.dynamic:
        sequences = compute_cut_sequences(xm, tle, result, _step_bound(args), args.cap)
    probabilities = {name: info.probability for name, info in xm.events.items()}
    ft = build_fault_tree(result, sequences, tle_label=print_expr(tle), probabilities=probabilities)
    return ft, result


def cmd_ft(args) -> int:
    xm, specs = _load_extended(args)
    ft, _ = _build_tree(args, xm, specs)
    out = _out_dir(args)
    ext = {"xml": "ftx", "tsv": "fttsv", "dot": "dot"}
    for fmt in _formats(args, ("xml", "tsv", "dot")):
        _write(out / f"ft.{ext[fmt]}", export_ft(ft, fmt, with_probabilities=args.with_probabilities))
    return EXIT_OK


def cmd_ftprob(args) -> int:
    xm, specs = _load_extended(args)
    ft, _ = _build_tree(args, xm, specs)
    groups = dependency_groups(specs)
    pa = ProbabilityAssignment({n: i.probability for n, i in xm.events.items()}, groups)
    node_probs = evaluate_probability(ft, pa)
    symbolic = symbolic_probability(ft, groups)
    out = _out_dir(args)
    lines = [f"{nid}\t{prob_str(node_probs[nid])}" for nid in sorted(node_probs)]
    lines.append(f"rare-event-sum\t{prob_str(rare_event_approximation(ft, pa))}")
    _write(out / "ft_probabilities.tsv", "\n".join(lines) + "\n")
    _write(out / "ft.ftx", export_ft(ft, "xml", with_probabilities=True))
    _write(out / "tle_probability.txt",
           "symbols: " + ", ".join(symbolic.symbols) + "\n" + pexpr_to_text(symbolic) + "\n")
    _write(out / "tle_probability.py", render_prob_script(symbolic, "python", version=__version__))
    _write(out / "tle_probability.m", render_prob_script(symbolic, "matlab", version=__version__))
    return EXIT_OK


def cmd_fmea(args) -> int:
    xm, _ = _load_extended(args)
    if not args.props:
        raise InputError([Diagnostic("a property file is required (--props)")])
    properties = []
    for lineno, raw in enumerate(_read_named(args.props, "properties").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("--"):
            continue
        if ":" not in line:
            raise InputError([Diagnostic("expected 'label : expression;'", lineno, filename=args.props)])
        label, _, rest = line.partition(":")
        expr_text = rest.strip().rstrip(";")
        expr = parse_expr_text(expr_text, args.props)
        xm.typed.check_expr(expr, filename=args.props)
        properties.append((label.strip(), expr))
    gen = generate_dynamic_fmea if args.dynamic else generate_fmea
    table = gen(xm, properties, args.max_card, _step_bound(args), args.cap)
    out = _out_dir(args)
    suffix = "fmea_dynamic" if args.dynamic else "fmea"
    for fmt in _formats(args, ("xml", "tsv")):
        _write(out / f"{suffix}.{fmt}", export_fmea(table, fmt))
    return EXIT_OK


def _read_tfpg(path: str):
    text = _read_named(path, "tfpg")
    if path.endswith(".xml"):
        return tfpg_from_xml(text, path)
    return parse_tfpg(text, path)


def cmd_tfpg(args) -> int:
    if args.tfpg_command == "convert":
        g = _read_tfpg(args.infile)
        target = args.to
        if target == "auto":
            target = "xml" if args.outfile.endswith(".xml") else ("dot" if args.outfile.endswith(".dot") else "text")
        text = {"text": write_tfpg, "xml": tfpg_to_xml, "dot": tfpg_to_dot}[target](g)
        _write(Path(args.outfile), text)
        return EXIT_OK

    xm, _ = _load_extended(args)
    binding = parse_binding(_read_named(args.bind, "binding"), xm, args.bind)
    if args.tfpg_command == "check":
        g = _read_tfpg(args.tfpg)
        report = validate_behavioral(g, binding, xm, _step_bound(args), args.cap)
        out = _out_dir(args)
        if report.complete:
            _write(out / "tfpg_check.txt", "complete\n")
            return EXIT_OK
        trace, inc = report.counterexamples[0]
        lines = [f"incomplete\t{inc.node}\t{inc.reason}\tstep {inc.step}"]
        _write(out / "tfpg_check.txt", "\n".join(lines) + "\n")
        var_names = xm.typed.var_names()
        rows = ["step\t" + "\t".join(var_names)]
        for i, state in enumerate(trace.states):
            rows.append(f"{i}\t" + "\t".join(str(state[v]) for v in var_names))
        _write(out / "tfpg_counterexample.trace", "\n".join(rows) + "\n")
        print(f"incomplete: {inc.node} {inc.reason} at step {inc.step}", file=sys.stderr)
        return EXIT_VERDICT
    if args.tfpg_command == "synth":
        g = synthesize_structure(xm, binding, _step_bound(args), args.cap)
        _write(Path(args.outfile), write_tfpg(g))
        return EXIT_OK
    raise AssertionError(args.tfpg_command)


# ---------------------------------------------------------------------------
# Argument wiring

def _common(sub: argparse.ArgumentParser, *, tle: bool = False, bounds: bool = True):
    sub.add_argument("--config", help="key = value configuration file; flags win")
    sub.add_argument("--model", default="", help="nominal model (.smx)")
    sub.add_argument("--flib", default="", help="fault library (.flib), merged over built-ins")
    sub.add_argument("--fei", default="", help="fault extension instructions (.fei)")
    sub.add_argument("--cca", default="", help="common cause definitions (.cca)")
    sub.add_argument("--out-dir", default=".", help="artifact directory")
    sub.add_argument("--cap", type=int, default=None, help="state cap (default 10^7)")
    sub.add_argument("--seed", type=int, default=0, help="seed for sampling-based self checks")
    if tle:
        sub.add_argument("--tle", default="", help="top-level event expression")
    if bounds:
        sub.add_argument("--max-card", type=int, default=4, help="cut set cardinality bound")
        sub.add_argument("--step-bound", type=int, default=0, help="step bound (0 = unbounded)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbsa", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mbsa {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("extend", help="extend a nominal model with faults")
    _common(p, bounds=False)
    p.set_defaults(func=cmd_extend, _subparser=p)

    p = subs.add_parser("mcs", help="compute minimal cut sets")
    _common(p, tle=True)
    p.add_argument("--formats", default="tsv", help="comma-separated: tsv,xml")
    p.set_defaults(func=cmd_mcs, _subparser=p)

    p = subs.add_parser("ft", help="build a (dynamic) fault tree")
    _common(p, tle=True)
    p.add_argument("--dynamic", action="store_true", help="detect required event orders (PAND gates)")
    p.add_argument("--with-probabilities", action="store_true")
    p.add_argument("--formats", default="xml", help="comma-separated: xml,tsv,dot")
    p.set_defaults(func=cmd_ft, _subparser=p)

    p = subs.add_parser("ftprob", help="evaluate fault tree probabilities and emit scripts")
    _common(p, tle=True)
    p.add_argument("--dynamic", action="store_true")
    p.set_defaults(func=cmd_ftprob, _subparser=p)

    p = subs.add_parser("fmea", help="generate an FMEA table")
    _common(p)
    p.add_argument("--props", default="", help="property file: 'label : expression;' per line")
    p.add_argument("--dynamic", action="store_true", help="dynamic FMEA (orders per row)")
    p.add_argument("--formats", default="tsv", help="comma-separated: xml,tsv")
    p.set_defaults(func=cmd_fmea, _subparser=p)

    p = subs.add_parser("tfpg", help="timed failure propagation graphs")
    tsubs = p.add_subparsers(dest="tfpg_command", required=True)

    pc = tsubs.add_parser("check", help="behavioral validation against a model")
    _common(pc, bounds=True)
    pc.add_argument("--tfpg", required=True, help="graph file (.tfpg or .xml)")
    pc.add_argument("--bind", required=True, help="node bindings (.bind)")
    pc.set_defaults(func=cmd_tfpg, _subparser=pc)

    pv = tsubs.add_parser("convert", help="convert between text, XML, and DOT")
    pv.add_argument("infile")
    pv.add_argument("outfile")
    pv.add_argument("--to", default="auto", choices=("auto", "text", "xml", "dot"))
    pv.set_defaults(func=cmd_tfpg, _subparser=pv)

    ps = tsubs.add_parser("synth", help="synthesize graph structure from a model")
    _common(ps, bounds=True)
    ps.add_argument("--bind", required=True, help="node bindings (.bind)")
    ps.add_argument("--outfile", required=True, help="output .tfpg path")
    ps.set_defaults(func=cmd_tfpg, _subparser=ps)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config(args, getattr(args, "_subparser", parser))
        return args.func(args)
    except ResourceCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InputError as exc:
        for diag in exc.diagnostics:
            print(str(diag), file=sys.stderr)
        return EXIT_INPUT
    except MbsaError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
