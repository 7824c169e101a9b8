"""Command-line front end.

Exit codes: 10 satisfiable, 20 unsatisfiable, 30 unknown, 1 error.
``check`` exits 0 when the formula holds and 2 when it does not.
Defaults can be set with HXTAB_ENGINE, HXTAB_FRAME, HXTAB_FORMAT,
HXTAB_MAX_STEPS and HXTAB_NODE_RULE_BUDGET; flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .frames import (DEFAULT_NODE_RULE_BUDGET, AxiomError, decide_with_frame,
                     load_extensions)
from .oracle import NoModelUpTo, TimedOut, Witness, bounded_sat, default_bound
from .semantics import EvaluationError, check_node, load_model
from .syntax import ParseError, conj, parse_file, parse_node
from .tableau import FrameClass, Sat, Tracer, Unsat, root_label

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN, EXIT_ERROR = 10, 20, 30, 1


def read_formula(arg):
    """Inline formula, or the conjunction of the formulas in a file."""
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            items = parse_file(fh.read())
        if not items:
            raise ValueError(f"{arg}: no formula found")
        return conj(*items)
    return parse_node(arg)


def to_dot(m):
    names = {}
    for i, n in sorted(m.naming.items()):
        names.setdefault(n, []).append(str(i))
    lines = ["digraph model {", "  node [shape=box];"]
    for n in m.nodes:
        props = sorted(p for p, ns in m.valuation.items() if n in ns)
        label = [str(n)]
        if names.get(n):
            label.append("{" + ",".join(names[n]) + "}")
        if props:
            label.append(" ".join(props))
        lines.append(f'  "{n}" [label="{" | ".join(label)}"];')
    for rel, pairs in sorted(m.edges.items()):
        for x, y in sorted(pairs, key=str):
            lines.append(f'  "{x}" -> "{y}" [label="{rel}"];')
    for cmp, classes in sorted(m.data.items()):
        for cls in classes:
            members = sorted(cls, key=str)
            for a in range(len(members)):
                for b in range(a + 1, len(members)):
                    lines.append(f'  "{members[a]}" -> "{members[b]}" '
                                 f'[dir=none, style=dashed, label="{cmp}"];')
    lines.append("}")
    return "\n".join(lines)


def to_text(m):
    out = [f"nodes: {' '.join(str(n) for n in m.nodes)}"]
    for rel, pairs in sorted(m.edges.items()):
        out.append(f"{rel}: " + " ".join(f"{x}->{y}" for x, y in sorted(pairs, key=str)))
    for cmp, classes in sorted(m.data.items()):
        groups = [sorted(c, key=str) for c in classes if len(c) > 1]
        if groups:
            out.append(f"~{cmp}: " + " ".join("{" + ",".join(map(str, g)) + "}" for g in groups))
    for p, ns in sorted(m.valuation.items()):
        out.append(f"{p}: " + " ".join(str(n) for n in sorted(ns, key=str)))
    out.append("naming: " + " ".join(f"{i}={n}" for i, n in sorted(m.naming.items())))
    return "\n".join(out)


def render_model(m, fmt):
    if fmt == "dot":
        return to_dot(m)
    if fmt == "json":
        return json.dumps(m.to_json(), indent=2, sort_keys=True)
    return to_text(m)


def _env(name, default):
    return os.environ.get(f"HXTAB_{name}", default)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--engine", "-e", choices=["naive", "pspace"],
                        default=_env("ENGINE", "naive"))
    common.add_argument("--frame", choices=[f.value for f in FrameClass],
                        default=_env("FRAME", "all"))
    common.add_argument("--axioms", action="append", default=[], metavar="FILE")
    common.add_argument("--node-rules", action="append", default=[], metavar="FILE")
    common.add_argument("--format", choices=["text", "json", "dot"],
                        default=_env("FORMAT", "text"))
    common.add_argument("--max-steps", type=int, default=int(_env("MAX_STEPS", 200_000)))
    common.add_argument("--node-rule-budget", type=int,
                        default=int(_env("NODE_RULE_BUDGET", DEFAULT_NODE_RULE_BUDGET)))
    common.add_argument("--metrics", action="store_true")
    common.add_argument("--strict-two-parent", action="store_true",
                        help="read the two-parent clash condition literally")

    ap = argparse.ArgumentParser(prog="hxtab", description="Tableau prover for hybrid XPath "
                                 "with data comparisons.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    s = sub.add_parser("sat", parents=[common], help="decide satisfiability")
    s.add_argument("formula", help="formula text or a file of formulas (conjoined)")
    s = sub.add_parser("model", parents=[common], help="write the extracted model")
    s.add_argument("formula")
    s.add_argument("-o", "--output", help="write the model here instead of stdout")
    s = sub.add_parser("trace", parents=[common], help="stream rule applications as JSON lines")
    s.add_argument("formula")
    s = sub.add_parser("check", help="evaluate a formula on a model file")
    s.add_argument("model")
    s.add_argument("formula")
    s.add_argument("--node", help="evaluation node (default: the node of the root nominal, "
                   "else every node)")
    s = sub.add_parser("oracle", help="bounded brute-force model search")
    s.add_argument("formula")
    s.add_argument("--bound", type=int, help="maximum number of nodes")
    s.add_argument("--timeout", type=float, help="seconds before giving up")
    s.add_argument("--frame", choices=[f.value for f in FrameClass],
                   default=_env("FRAME", "all"))
    s.add_argument("--format", choices=["text", "json", "dot"], default=_env("FORMAT", "text"))
    return ap


def _extensions(args):
    if not args.axioms and not args.node_rules:
        return None
    return load_extensions(args.axioms, args.node_rules, args.node_rule_budget)


def _decide(args, phi, tracer=None):
    """Returns (verdict name, verdict object or None, metrics dict)."""
    frame = FrameClass(args.frame)
    ext = _extensions(args)
    if args.engine == "pspace":
        ok, metrics = decide_with_frame(phi, frame, "pspace", ext, tracer=tracer,
                                        strict_two_parent=args.strict_two_parent)
        return ("SAT" if ok else "UNSAT"), None, metrics.to_json()
    from .tableau import NaiveEngine, Options
    eng = NaiveEngine(Options(frame=frame, extensions=ext, max_steps=args.max_steps,
                              strict_two_parent=args.strict_two_parent), tracer)
    verdict = eng.saturate(phi)
    metrics = {"steps": eng.steps, "branches": eng.branches_explored}
    return verdict.name, verdict, metrics


def _code(name):
    return {"SAT": EXIT_SAT, "UNSAT": EXIT_UNSAT}.get(name, EXIT_UNKNOWN)


def cmd_sat(args, out):
    phi = read_formula(args.formula)
    name, verdict, metrics = _decide(args, phi)
    if args.format == "json":
        doc = {"verdict": name, "formula": str(phi)}
        if isinstance(verdict, Sat):
            doc["model"] = verdict.model.to_json()
        elif isinstance(verdict, Unsat) and verdict.clashes:
            doc["clash"] = verdict.clashes[-1].describe()
        elif verdict is not None and name == "UNKNOWN":
            doc["reason"] = verdict.reason
        if args.metrics:
            doc["metrics"] = metrics
        print(json.dumps(doc, ensure_ascii=False), file=out)
    else:
        line = name if name != "UNKNOWN" else f"UNKNOWN: {verdict.reason}"
        print(line, file=out)
        if isinstance(verdict, Sat):
            print(render_model(verdict.model, args.format), file=out)
        if args.metrics:
            print(json.dumps(metrics), file=out)
    return _code(name)


def cmd_model(args, out):
    phi = read_formula(args.formula)
    args.engine = "naive"  # only the naive engine builds models
    name, verdict, _ = _decide(args, phi)
    if not isinstance(verdict, Sat):
        print(name, file=sys.stderr)
        return _code(name)
    text = render_model(verdict.model, "json" if args.format == "text" else args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=out)
    return EXIT_SAT


def cmd_trace(args, out):
    phi = read_formula(args.formula)
    tracer = Tracer()
    name, _, metrics = _decide(args, phi, tracer)
    for line in tracer.lines():
        print(line, file=out)
    print(json.dumps({"verdict": name, **({"metrics": metrics} if args.metrics else {})}),
          file=out)
    return _code(name)


def cmd_check(args, out):
    m = load_model(args.model)
    phi = read_formula(args.formula)
    if args.node is not None:
        points = [args.node]
    else:
        root = root_label(phi).nom
        points = [m.naming[root]] if root in m.naming else list(m.nodes)
    holds = any(check_node(m, n, phi) for n in points)
    print("true" if holds else "false", file=out)
    return 0 if holds else 2


def cmd_oracle(args, out):
    phi = read_formula(args.formula)
    bound = args.bound or default_bound(phi)
    ans = bounded_sat(phi, bound, args.timeout, FrameClass(args.frame))
    if isinstance(ans, Witness):
        print(f"WITNESS at node {ans.node}", file=out)
        print(render_model(ans.model, args.format), file=out)
        return EXIT_SAT
    if isinstance(ans, NoModelUpTo):
        print(f"NO MODEL up to {ans.max_nodes} nodes", file=out)
        return EXIT_UNSAT
    assert isinstance(ans, TimedOut)
    print(f"TIMED OUT (complete up to {ans.nodes_done} nodes)", file=out)
    return EXIT_UNKNOWN


COMMANDS = {"sat": cmd_sat, "model": cmd_model, "trace": cmd_trace, "check": cmd_check,
            "oracle": cmd_oracle}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args, out)
    except ParseError as exc:
        print(f"parse error at {exc}", file=sys.stderr)
    except (AxiomError, EvaluationError, OSError, ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
