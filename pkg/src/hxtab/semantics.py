"""Data models and the satisfaction relation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import networkx as nx
from networkx.utils import UnionFind

from .syntax import (And, At, Axis, Concat, DataCmp, Diamond, Jump, Neg, Nom,
                     Prop, Test, Union)


class EvaluationError(ValueError):
    pass


@dataclass
class DataModel:
    """A finite data graph.

    ``data`` maps each comparison symbol to a list of classes; nodes missing
    from every class of a symbol are singleton classes.
    """

    nodes: list
    edges: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    valuation: dict = field(default_factory=dict)
    naming: dict = field(default_factory=dict)

    def __post_init__(self):
        self._class = {}

    def class_of(self, cmp, n):
        table = self._class.get(cmp)
        if table is None:
            table = {}
            for k, cls in enumerate(self.data.get(cmp, ())):
                for x in cls:
                    table.setdefault(x, k)
            self._class[cmp] = table
        return table.get(n, ("single", n))

    def successors(self, rel, n):
        return [y for (x, y) in self.edges.get(rel, ()) if x == n]

    def named(self, i):
        try:
            return self.naming[i]
        except KeyError:
            raise EvaluationError(f"nominal {i} is not named in the model") from None

    def to_json(self):
        return {
            "nodes": [str(n) for n in self.nodes],
            "edges": {r: sorted([str(x), str(y)] for x, y in es)
                      for r, es in sorted(self.edges.items())},
            "data": {c: [sorted(str(x) for x in cls) for cls in classes if len(cls) > 1]
                     for c, classes in sorted(self.data.items())},
            "valuation": {p: sorted(str(x) for x in ns)
                          for p, ns in sorted(self.valuation.items())},
            "naming": {str(i): str(n) for i, n in sorted(self.naming.items())},
        }

    @classmethod
    def from_json(cls, doc):
        nodes = [str(n) for n in doc.get("nodes", [])]
        edges = {r: {(str(x), str(y)) for x, y in pairs}
                 for r, pairs in doc.get("edges", {}).items()}
        data = {}
        for c, groups in doc.get("data", {}).items():
            # overlapping groups (or raw pairs) are merged into classes
            uf = UnionFind(nodes)
            for g in groups:
                g = [str(x) for x in g]
                if g:
                    uf.union(*g)
            data[c] = [set(s) for s in uf.to_sets()]
        valuation = {p: {str(x) for x in ns} for p, ns in doc.get("valuation", {}).items()}
        naming = {int(i): str(n) for i, n in doc.get("naming", {}).items()}
        return cls(nodes, edges, data, valuation, naming)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return DataModel.from_json(json.load(fh))


def dump_model(m):
    return json.dumps(m.to_json(), indent=2, sort_keys=True)


# -- satisfaction ------------------------------------------------------------

class _Evaluator:
    def __init__(self, m):
        self.m = m
        self.reach_memo = {}
        self.node_memo = {}

    def reach(self, n, path):
        """Set of nodes reachable from n along path."""
        key = (n, path)
        hit = self.reach_memo.get(key)
        if hit is not None:
            return hit
        m = self.m
        if isinstance(path, Axis):
            out = frozenset(m.successors(path.rel, n))
        elif isinstance(path, Jump):
            out = frozenset([m.named(path.nom)])
        elif isinstance(path, Test):
            out = frozenset([n]) if self.holds(n, path.body) else frozenset()
        elif isinstance(path, Union):
            out = self.reach(n, path.left) | self.reach(n, path.right)
        elif isinstance(path, Concat):
            cur = {n}
            for s in path.steps:
                nxt = set()
                for z in cur:
                    nxt |= self.reach(z, s)
                cur = nxt
            out = frozenset(cur)
        else:
            raise TypeError(f"not a path expression: {path!r}")
        self.reach_memo[key] = out
        return out

    def holds(self, n, e):
        key = (n, e)
        hit = self.node_memo.get(key)
        if hit is not None:
            return hit
        m = self.m
        if isinstance(e, Prop):
            out = n in m.valuation.get(e.name, ())
        elif isinstance(e, Nom):
            out = m.named(e.value) == n
        elif isinstance(e, Neg):
            out = not self.holds(n, e.body)
        elif isinstance(e, And):
            out = self.holds(n, e.left) and self.holds(n, e.right)
        elif isinstance(e, At):
            out = self.holds(m.named(e.nom), e.body)
        elif isinstance(e, Diamond):
            out = any(self.holds(z, e.body) for z in m.successors(e.rel, n))
        elif isinstance(e, DataCmp):
            left = {m.class_of(e.cmp, z) for z in self.reach(n, e.left)}
            right = {m.class_of(e.cmp, z) for z in self.reach(n, e.right)}
            if e.eq:
                out = bool(left & right)
            else:
                out = any(a != b for a in left for b in right)
        else:
            raise TypeError(f"not a node expression: {e!r}")
        self.node_memo[key] = out
        return out


def check_node(m, n, e):
    if n not in m.nodes:
        raise EvaluationError(f"unknown node {n!r}")
    return _Evaluator(m).holds(n, e)


def check_path(m, n, n2, a):
    return n2 in _Evaluator(m).reach(n, a)


def validate_model(m):
    """List of invariant violations (empty when the model is well formed)."""
    problems = []
    nodes = set(m.nodes)
    if len(nodes) != len(m.nodes):
        problems.append("nodes: duplicate node ids")
    for rel, pairs in sorted(m.edges.items()):
        for x, y in sorted(pairs, key=str):
            if x not in nodes or y not in nodes:
                problems.append(f"edges[{rel}]: edge ({x}, {y}) leaves the node set")
    for cmp, classes in sorted(m.data.items()):
        seen = set()
        for cls in classes:
            for x in sorted(cls, key=str):
                if x not in nodes:
                    problems.append(f"data[{cmp}]: unknown node {x}")
                elif x in seen:
                    problems.append(f"data[{cmp}]: partition violation: {x} is in two classes")
                seen.add(x)
    for p, ns in sorted(m.valuation.items()):
        for x in sorted(ns, key=str):
            if x not in nodes:
                problems.append(f"valuation[{p}]: unknown node {x}")
    for i, x in sorted(m.naming.items()):
        if x not in nodes:
            problems.append(f"naming[{i}]: unknown node {x}")
    return problems


@dataclass(frozen=True)
class FrameInfo:
    is_forest: bool
    tree_root: object = None

    @property
    def is_tree(self):
        return self.tree_root is not None


def frame_of(m):
    g = nx.DiGraph()
    g.add_nodes_from(m.nodes)
    for pairs in m.edges.values():
        g.add_edges_from(pairs)
    closure = nx.transitive_closure(g, reflexive=False)
    irreflexive = not any(closure.has_edge(n, n) for n in g)
    single_parent = all(g.in_degree(n) - (1 if g.has_edge(n, n) else 0) <= 1
                        and not g.has_edge(n, n) for n in g)
    forest = irreflexive and single_parent
    if not forest:
        return FrameInfo(False)
    everyone = len(g) - 1
    for n in m.nodes:
        if closure.out_degree(n) == everyone:
            return FrameInfo(True, n)
    return FrameInfo(True)
