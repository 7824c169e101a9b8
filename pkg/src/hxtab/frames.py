"""Frame classes (forests, trees) and calculus extensions.

Forests and trees are handled by the reachability rules inside the
matcher (``frames=True``) plus the clash test run on saturated branches.
Extensions come in two kinds: pure axioms, instantiated with every tuple of
branch nominals, and node-creating rules of the shape
``forall $i,... exists $k,... . matrix``, which add the matrix with fresh
nominals for the existentials.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .rules import Instance
from .syntax import (TOP_PROP, And, At, DataCmp, Jump, Neg, ParseError, Parser,
                     Prop, formula_lines, rename, signature_of, steps)
from .tableau import FrameClass, NaiveEngine, Options, Unknown

DEFAULT_NODE_RULE_BUDGET = 100


class AxiomError(ValueError):
    pass


def _props(e):
    return {p for p in signature_of(e).props if p != TOP_PROP}


def _anchored(e):
    """True when the truth of e does not depend on the evaluation point."""
    if isinstance(e, At):
        return True
    if isinstance(e, DataCmp):
        return isinstance(steps(e.left)[0], Jump) and isinstance(steps(e.right)[0], Jump)
    if isinstance(e, Neg):
        return _anchored(e.body)
    if isinstance(e, And):
        return _anchored(e.left) and _anchored(e.right)
    return False


def _prefix(body, placeholders):
    """Prefix a template, adding a universal for the evaluation point if needed.

    Returns (label template, universal placeholders).
    """
    if isinstance(body, At):
        return body, placeholders
    if placeholders and _anchored(body):
        return At(placeholders[0], body), placeholders
    point = min(placeholders, default=0) - 1
    return At(point, body), [point] + list(placeholders)


@dataclass(frozen=True)
class PureAxiom:
    """A pure node expression over placeholder nominals (negative ints)."""

    source: str
    template: object
    placeholders: tuple

    @classmethod
    def parse(cls, text, line=1):
        names = {}
        p = Parser(text, line=line, placeholders=names)
        body = p.parse_top()
        found = _props(body)
        if found:
            raise AxiomError(f"line {line}: axiom is not pure, it mentions "
                             f"propositional symbol(s) {', '.join(sorted(found))}")
        if any(n >= 0 for n in signature_of(body).noms):
            raise AxiomError(f"line {line}: axioms may only use placeholder nominals ($i)")
        ordered = sorted(names.values(), reverse=True)
        template, universals = _prefix(body, ordered)
        return cls(text, template, tuple(universals))

    @property
    def name(self):
        return self.source

    def instantiate(self, nominals):
        if len(nominals) != len(self.placeholders):
            raise ValueError(f"axiom needs {len(self.placeholders)} nominal(s), "
                             f"got {len(nominals)}")
        return rename(self.template, dict(zip(self.placeholders, nominals)))


@dataclass(frozen=True)
class NodeCreatingRule:
    """``forall universals exists existentials . matrix``."""

    source: str
    template: object
    universals: tuple
    existentials: tuple
    budget: int = DEFAULT_NODE_RULE_BUDGET

    @classmethod
    def parse(cls, text, line=1, budget=DEFAULT_NODE_RULE_BUDGET):
        names = {}
        p = Parser(text, line=line, placeholders=names)

        def names_after(word):
            tok = p.peek()
            if tok.kind != "ident" or tok.text != word:
                raise p.error(f"expected {word!r}")
            p.next()
            out = []
            while True:
                tok = p.next()
                if tok.kind != "ph":
                    raise ParseError("expected a placeholder like $i", tok.line, tok.col)
                out.append(p.nominal(tok))
                if p.peek().kind != ",":
                    return out
                p.next()

        universals = names_after("forall") if p.peek().text == "forall" else []
        existentials = names_after("exists")
        p.expect(".")
        matrix = p.parse_top()
        extra = set(signature_of(matrix).noms) - set(universals) - set(existentials)
        if any(n >= 0 for n in extra):
            raise AxiomError(f"line {line}: node-creating rules may only use placeholders")
        if extra:
            raise AxiomError(f"line {line}: unbound placeholder(s) in the matrix")
        template, universals = _prefix(matrix, universals)
        return cls(text, template, tuple(universals), tuple(existentials), budget)

    @property
    def name(self):
        return self.source

    def instantiate(self, universals, fresh):
        if len(universals) != len(self.universals):
            raise ValueError(f"rule needs {len(self.universals)} nominal(s), "
                             f"got {len(universals)}")
        mapping = dict(zip(self.universals, universals))
        for y in self.existentials:
            mapping[y] = fresh()
        return [rename(self.template, mapping)]


class Extensions:
    """Registry handed to the matcher: it reports instances for new nominals."""

    def __init__(self, axioms=(), node_rules=()):
        self.axioms = list(axioms)
        self.node_rules = list(node_rules)
        cmps = set()
        for a in self.axioms + self.node_rules:
            cmps |= set(signature_of(a.template).cmps)
        self.cmps = tuple(sorted(cmps))

    def __bool__(self):
        return bool(self.axioms or self.node_rules)

    @staticmethod
    def _tuples(noms, n, k):
        # tuples over the branch nominals that mention n at least once
        pool = sorted(noms)
        for tup in itertools.product(pool, repeat=k):
            if n in tup:
                yield tup

    def instances_for(self, matcher, n):
        out = []
        for ax in self.axioms:
            for tup in self._tuples(matcher.noms, n, len(ax.placeholders)):
                inst = ax.instantiate(tup)
                out.append(Instance("pure", (ax.template,) + tup, ((inst, False),)))
        for rule in self.node_rules:
            for tup in self._tuples(matcher.noms, n, len(rule.universals)):
                out.append(Instance("noderule", (rule.template,) + tup, (rule, tup)))
        return out


def register_pure_axioms(axioms, ext=None):
    ext = ext or Extensions()
    return Extensions(ext.axioms + list(axioms), ext.node_rules)


def register_node_creating_rules(rules, ext=None):
    ext = ext or Extensions()
    return Extensions(ext.axioms, ext.node_rules + list(rules))


def pure_instances(matcher, ext):
    """All pure-axiom instances over the nominals currently in the matcher."""
    out = []
    for n in sorted(matcher.noms):
        out.extend(i for i in ext.instances_for(matcher, n) if i.rule == "pure")
    return out


def parse_axioms(text):
    """Parse an axiom file: pure axioms and ``forall ... exists ...`` rules."""
    axioms, rules = [], []
    for line, src in formula_lines(text):
        if src.startswith(("forall", "exists")):
            rules.append(NodeCreatingRule.parse(src, line))
        else:
            axioms.append(PureAxiom.parse(src, line))
    return axioms, rules


def load_extensions(axiom_files=(), node_rule_files=(), budget=DEFAULT_NODE_RULE_BUDGET):
    axioms, rules = [], []
    for path in axiom_files:
        with open(path, encoding="utf-8") as fh:
            a, r = parse_axioms(fh.read())
        axioms += a
        rules += r
    for path in node_rule_files:
        with open(path, encoding="utf-8") as fh:
            a, r = parse_axioms(fh.read())
        axioms += a
        rules += r
    rules = [NodeCreatingRule(r.source, r.template, r.universals, r.existentials, budget)
             for r in rules]
    return Extensions(axioms, rules)


def builtin_axiom_sets(rels=("a",), cmp="c"):
    """Inverse, Sibling and SibIrreflexivity over the relations ``rels``.

    The inverse of ``a`` is written ``a_inv``; the sibling relation is ``sib``.
    """
    inverse, sibling = [], []
    for a in rels:
        inverse += [f"$i:($j -> [{a}]<{a}_inv>$j)", f"$i:($j -> [{a}_inv]<{a}>$j)"]
        sibling += [f"$i:(<sib>$j -> <{a}_inv><{a}>$j)",
                    f"$i:((!$j & <{a}_inv><{a}>$j) -> <sib>$j)",
                    "$i:($j:!<sib>$j)"]
    sibling = list(dict.fromkeys(sibling))
    sib_irr = [f"$i:(<sib>$j -> <@$i !={cmp} @$j>)"]
    inv = [PureAxiom.parse(s) for s in inverse]
    sib = inv + [PureAxiom.parse(s) for s in sibling]
    return {"Inverse": inv, "Sibling": sib,
            "SibIrreflexivity": sib + [PureAxiom.parse(s) for s in sib_irr]}


# -- frame-class reasoning -----------------------------------------------------

def reachability_rules(branch):
    """Pending instances of +intro / trans / +copy in a branch."""
    return [i for i in branch.applicable() if i.rule in ("plusintro", "plustrans", "pluscopy")]


def frame_clash(branch, frame=FrameClass.FOREST, strict=False):
    root = branch.root_nominal if frame is FrameClass.TREE else None
    return branch.matcher.frame_clash(root, strict=strict)


def is_connected(branch, root=None):
    """Every nominal j has root:j or root:<+>j in the branch."""
    return branch.matcher.is_connected(branch.root_nominal if root is None else root)


def decide_with_frame(phi, frame=FrameClass.ALL, engine="naive", extensions=None,
                      max_steps=200_000, strict_two_parent=False, tracer=None):
    """Decide phi over a frame class with either engine.

    The naive engine returns a verdict object; the polynomial-space engine
    returns (satisfiable, metrics).
    """
    if engine == "pspace":
        from .pspace import PspaceEngine
        eng = PspaceEngine(frame=frame, extensions=extensions, tracer=tracer,
                           strict_two_parent=strict_two_parent)
        return eng.sat(phi), eng.metrics
    opts = Options(frame=frame, extensions=extensions or None, max_steps=max_steps,
                   strict_two_parent=strict_two_parent)
    return NaiveEngine(opts, tracer).saturate(phi)


__all__ = ["AxiomError", "DEFAULT_NODE_RULE_BUDGET", "Extensions", "NodeCreatingRule",
           "PureAxiom", "Unknown", "builtin_axiom_sets", "decide_with_frame",
           "frame_clash", "is_connected", "load_extensions", "parse_axioms",
           "pure_instances", "reachability_rules", "register_node_creating_rules",
           "register_pure_axioms"]
