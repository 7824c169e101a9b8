"""Bounded brute-force satisfiability.

Every data model with up to ``max_nodes`` nodes over the signature of the
formula is enumerated and the formula is evaluated at node 0 (any model can
be relabelled so that the evaluation point is node 0).  Edges and
propositions are packed into one bit vector per model and evaluated in
batches with numpy; namings and data partitions are looped over.
Witnesses are re-checked with the reference evaluator.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .semantics import DataModel, check_node, frame_of
from .syntax import (And, At, Axis, Concat, DataCmp, Diamond, Jump, Neg, Nom,
                     Prop, Test, Union, signature_of)
from .tableau import FrameClass, Sat, Unsat

CHUNK = 1 << 14


@dataclass(frozen=True)
class Bound:
    max_nodes: int = 3
    max_seconds: float = None

    def __post_init__(self):
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be at least 1")


@dataclass(frozen=True)
class Witness:
    model: DataModel
    node: int

    name = "WITNESS"


@dataclass(frozen=True)
class NoModelUpTo:
    max_nodes: int

    name = "NO_MODEL"


@dataclass(frozen=True)
class TimedOut:
    nodes_done: int

    name = "TIMED_OUT"


def restricted_growth(n):
    """All set partitions of range(n) as restricted growth strings."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(top + 2):
            yield from rec(prefix + [v], max(top, v))

    yield from rec([0], 0)


def diamond_depth(e):
    """Nesting depth of diamonds and axis steps (a cheap bound heuristic)."""
    if isinstance(e, (Prop, Nom)):
        return 0
    if isinstance(e, Neg):
        return diamond_depth(e.body)
    if isinstance(e, And):
        return max(diamond_depth(e.left), diamond_depth(e.right))
    if isinstance(e, At):
        return diamond_depth(e.body)
    if isinstance(e, Diamond):
        return 1 + diamond_depth(e.body)
    if isinstance(e, DataCmp):
        return max(diamond_depth(e.left), diamond_depth(e.right))
    if isinstance(e, Axis):
        return 1
    if isinstance(e, Jump):
        return 0
    if isinstance(e, Test):
        return diamond_depth(e.body)
    if isinstance(e, Union):
        return max(diamond_depth(e.left), diamond_depth(e.right))
    if isinstance(e, Concat):
        return sum(diamond_depth(s) for s in e.steps)
    raise TypeError(f"unexpected {e!r}")


def default_bound(phi):
    sig = signature_of(phi)
    return max(3, len(sig.noms) + diamond_depth(phi))


class _Batch:
    """A batch of models sharing node count, naming and data partitions."""

    def __init__(self, n, edges, props, naming, same):
        self.n = n
        self.edges = edges      # rel -> (B, n, n) bool
        self.props = props      # prop -> (B, n) bool
        self.naming = naming    # nominal -> node
        self.same = same        # cmp -> (n, n) bool
        self.size = next(iter(edges.values())).shape[0] if edges else \
            (next(iter(props.values())).shape[0] if props else 1)
        self.memo = {}

    def node(self, e):
        hit = self.memo.get(e)
        if hit is not None:
            return hit
        B, n = self.size, self.n
        if isinstance(e, Prop):
            out = self.props.get(e.name)
            if out is None:
                out = np.zeros((B, n), bool)
        elif isinstance(e, Nom):
            out = np.zeros((B, n), bool)
            out[:, self.naming[e.value]] = True
        elif isinstance(e, Neg):
            out = ~self.node(e.body)
        elif isinstance(e, And):
            out = self.node(e.left) & self.node(e.right)
        elif isinstance(e, At):
            col = self.node(e.body)[:, self.naming[e.nom]]
            out = np.repeat(col[:, None], n, axis=1)
        elif isinstance(e, Diamond):
            rel = self.edges.get(e.rel)
            if rel is None:
                out = np.zeros((B, n), bool)
            else:
                out = (rel & self.node(e.body)[:, None, :]).any(axis=2)
        elif isinstance(e, DataCmp):
            left = self.path(e.left)
            right = self.path(e.right)
            same = self.same.get(e.cmp)
            if same is None:
                same = np.eye(n, dtype=bool)
            rel = same if e.eq else ~same
            # exists y, z: left(x, y), right(x, z), rel(y, z)
            via = _compose(left, np.broadcast_to(rel, (B, n, n)))
            out = (via & right).any(axis=2)
        else:
            raise TypeError(f"not a node expression: {e!r}")
        self.memo[e] = out
        return out

    def path(self, p):
        hit = self.memo.get(p)
        if hit is not None:
            return hit
        B, n = self.size, self.n
        if isinstance(p, Axis):
            out = self.edges.get(p.rel)
            if out is None:
                out = np.zeros((B, n, n), bool)
        elif isinstance(p, Jump):
            out = np.zeros((B, n, n), bool)
            out[:, :, self.naming[p.nom]] = True
        elif isinstance(p, Test):
            h = self.node(p.body)
            out = np.zeros((B, n, n), bool)
            idx = np.arange(n)
            out[:, idx, idx] = h
        elif isinstance(p, Union):
            out = self.path(p.left) | self.path(p.right)
        elif isinstance(p, Concat):
            out = self.path(p.steps[0])
            for s in p.steps[1:]:
                out = _compose(out, self.path(s))
        else:
            raise TypeError(f"not a path expression: {p!r}")
        self.memo[p] = out
        return out


def _compose(r, s):
    return np.matmul(r.astype(np.uint8), s.astype(np.uint8)) > 0


def _forest_rows(edge_arrays, n, frame):
    """Boolean mask of rows whose edge structure belongs to ``frame``."""
    B = next(iter(edge_arrays.values())).shape[0] if edge_arrays else 1
    union = np.zeros((B, n, n), bool)
    for arr in edge_arrays.values():
        union |= arr
    ok = np.ones(B, bool)
    idx = np.arange(n)
    ok &= ~union[:, idx, idx].any(axis=1)
    ok &= (union.sum(axis=1) <= 1).all(axis=1)
    reach = union.copy()
    for _ in range(max(0, n - 1)):
        reach = reach | _compose(reach, union)
    ok &= ~reach[:, idx, idx].any(axis=1)
    if frame is FrameClass.TREE:
        covers = (reach | np.eye(n, dtype=bool)).all(axis=2).any(axis=1)
        ok &= covers
    return ok


def _to_model(n, bits_row, rels, props, naming, parts, cmps):
    nodes = list(range(n))
    k = 0
    edges = {}
    for rel in rels:
        pairs = set()
        for x in range(n):
            for y in range(n):
                if bits_row[k]:
                    pairs.add((x, y))
                k += 1
        if pairs:
            edges[rel] = pairs
    valuation = {}
    for p in props:
        ns = {x for x in range(n) if bits_row[k + x]}
        k += n
        if ns:
            valuation[p] = ns
    data = {}
    for c, rgs in zip(cmps, parts):
        classes = {}
        for x, cls in enumerate(rgs):
            classes.setdefault(cls, set()).add(x)
        data[c] = list(classes.values())
    return DataModel(nodes, edges, data, valuation, dict(naming))


def bounded_sat(phi, max_nodes=None, max_seconds=None, frame=FrameClass.ALL):
    """Search every model with at most ``max_nodes`` nodes for one satisfying phi at node 0."""
    if isinstance(max_nodes, Bound):
        max_seconds = max_nodes.max_seconds if max_seconds is None else max_seconds
        max_nodes = max_nodes.max_nodes
    if max_nodes is None:
        max_nodes = default_bound(phi)
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    sig = signature_of(phi)
    rels, props, noms, cmps = list(sig.rels), list(sig.props), list(sig.noms), list(sig.cmps)
    start = time.monotonic()
    for n in range(1, max_nodes + 1):
        nbits = len(rels) * n * n + len(props) * n
        total = 1 << nbits
        partitions = list(restricted_growth(n))
        for chunk_start in range(0, total, CHUNK):
            idx = np.arange(chunk_start, min(total, chunk_start + CHUNK), dtype=np.int64)
            bits = ((idx[:, None] >> np.arange(nbits, dtype=np.int64)) & 1).astype(bool)
            B = len(idx)
            edges, k = {}, 0
            for rel in rels:
                edges[rel] = bits[:, k:k + n * n].reshape(B, n, n)
                k += n * n
            pv = {}
            for p in props:
                pv[p] = bits[:, k:k + n]
                k += n
            rows = np.ones(B, bool)
            if frame is not FrameClass.ALL:
                rows = _forest_rows(edges, n, frame) if edges else rows
                if frame is FrameClass.TREE and not edges and n > 1:
                    rows = np.zeros(B, bool)
                if not rows.any():
                    continue
            for named in itertools.product(range(n), repeat=len(noms)):
                naming = dict(zip(noms, named))
                for parts in itertools.product(partitions, repeat=len(cmps)):
                    if max_seconds is not None and time.monotonic() - start > max_seconds:
                        return TimedOut(n - 1)
                    same = {c: np.equal.outer(np.array(rgs), np.array(rgs))
                            for c, rgs in zip(cmps, parts)}
                    batch = _Batch(n, edges, pv, naming, same)
                    hit = batch.node(phi)[:, 0] & rows
                    if hit.any():
                        r = int(np.argmax(hit))
                        m = _to_model(n, bits[r], rels, props, naming, parts, cmps)
                        if not check_node(m, 0, phi):
                            raise AssertionError(f"oracle witness fails re-check for {phi}")
                        return Witness(m, 0)
    return NoModelUpTo(max_nodes)


def count_structures(n, nrels, ncmps):
    """Number of (edges, partitions) structures on n nodes, by enumeration."""
    edges = 1 << (nrels * n * n)
    parts = sum(1 for _ in restricted_growth(n))
    return edges * parts ** ncmps


def cross_check(phi, verdict, bound=None, frame=FrameClass.ALL):
    """Check a verdict against the semantics (SAT) or the bounded search (UNSAT).

    Returns a dict with ``consistent`` and a short ``detail``.
    """
    if isinstance(verdict, Sat):
        m = verdict.model
        root = verdict.branch.root_nominal
        ok = check_node(m, m.named(root), phi)
        if ok and frame is not FrameClass.ALL:
            info = frame_of(m)
            ok = info.is_tree if frame is FrameClass.TREE else info.is_forest
        return {"consistent": bool(ok),
                "detail": "model satisfies the formula" if ok else "extracted model fails"}
    if isinstance(verdict, Unsat):
        if bound is None:
            bound = Bound(default_bound(phi))
        ans = bounded_sat(phi, bound, frame=frame)
        if isinstance(ans, Witness):
            return {"consistent": False, "detail": "oracle found a model", "witness": ans}
        if isinstance(ans, TimedOut):
            return {"consistent": True, "detail": f"oracle timed out after {ans.nodes_done} nodes"}
        return {"consistent": True, "detail": f"no model up to {ans.max_nodes} nodes"}
    return {"consistent": True, "detail": "no verdict to check"}
