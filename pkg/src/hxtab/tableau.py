"""The reference saturation engine.

Branches are explored depth first.  Within a branch, rule instances are
applied in a fixed priority: linear rules to a fixpoint, then one branching
rule, then one generating rule (diamond / child / node-creating rules).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from networkx.utils import UnionFind

from .rules import (BRANCHING, GENERATING, LINEAR, RULE_NAMES, Clash,
                    Instance, Matcher, generated)
from .semantics import DataModel
from .syntax import (PLUS, At, DataCmp, Diamond, Jump, Nom, Prop, QsubIndex,
                     concat, signature_of, size_node, size_path, steps)


class FrameClass(Enum):
    ALL = "all"
    FOREST = "forest"
    TREE = "tree"


@dataclass(frozen=True)
class Sat:
    branch: "Branch"
    model: DataModel

    @property
    def name(self):
        return "SAT"


@dataclass(frozen=True)
class Unsat:
    clashes: tuple = ()

    @property
    def name(self):
        return "UNSAT"


@dataclass(frozen=True)
class Unknown:
    reason: str

    @property
    def name(self):
        return "UNKNOWN"


class BudgetExceeded(Exception):
    pass


def root_label(phi):
    """The root label i:phi with i one more than the largest nominal of phi."""
    noms = signature_of(phi).noms
    i = max(noms, default=-1) + 1
    return At(i, phi)


class Branch:
    """A tableau branch: labels, their origins, the fired ledger and the agenda."""

    def __init__(self, root, frames=False, extensions=None, copies=False):
        self.root = root
        sig = signature_of(root)
        self.root_nominal = root.nom
        self.root_nominals = frozenset(sig.noms)
        self.root_cmps = sig.cmps
        self.matcher = Matcher(self.root_nominals, self.root_cmps, frames=frames,
                               copies=copies, extensions=extensions)
        self.fired = set()
        self.origin = {}
        self.agenda = {LINEAR: deque(), BRANCHING: deque(), GENERATING: deque()}
        self.next_nominal = self.root_nominal + 1
        self.clash = None
        self.node_rule_fires = {}
        self.id = 0
        self._add(root, False, "root")

    def copy(self):
        new = object.__new__(Branch)
        new.__dict__.update(self.__dict__)
        new.matcher = self.matcher.copy()
        new.fired = set(self.fired)
        new.origin = dict(self.origin)
        new.agenda = {k: deque(v) for k, v in self.agenda.items()}
        new.node_rule_fires = dict(self.node_rule_fires)
        return new

    @property
    def labels(self):
        return self.matcher.labels

    @property
    def acc(self):
        return self.matcher.acc

    def __contains__(self, expr):
        return expr in self.matcher

    def fresh(self):
        k = self.next_nominal
        self.next_nominal += 1
        return k

    def _add(self, expr, acc, origin):
        insts, clash = self.matcher.add(expr, acc)
        self.origin.setdefault(expr, origin)
        for inst in insts:
            self.agenda[inst.kind].append(inst)
        if clash is not None and self.clash is None:
            self.clash = clash
        return expr

    def pending(self, inst):
        """Whether an instance is still applicable and would change the branch."""
        if inst.key in self.fired:
            return False
        if inst.kind == LINEAR:
            return not all(c in self.matcher for c, _ in inst.conclusions)
        if inst.kind == BRANCHING:
            return not any(c in self.matcher for c in inst.conclusions)
        if inst.rule == "dia" and inst.premises[0] in self.acc:
            return False
        if inst.rule in ("dia", "child") and self.matcher.frames:
            # with frame rules on, diamonds are only expanded at the nominal
            # their premise gets copied to (one child per equality class)
            p = inst.premises[0]
            i = p.nom if isinstance(p, At) else steps(p.left)[0].nom
            if self.matcher._copy_targets(i):
                return False
        return True

    def applicable(self):
        """Pending instances in priority order."""
        out = []
        for kind in (LINEAR, BRANCHING, GENERATING):
            out.extend(i for i in self.agenda[kind] if self.pending(i))
        return out

    def next_instance(self):
        for kind in (LINEAR, BRANCHING, GENERATING):
            q = self.agenda[kind]
            while q:
                inst = q.popleft()
                if self.pending(inst):
                    return inst
        return None

    def apply_inplace(self, inst):
        """Apply an instance; returns the list of conclusion sets (one per branch)."""
        self.fired.add(inst.key)
        if inst.kind == LINEAR:
            added = [self._add(c, acc, inst.rule) for c, acc in inst.conclusions
                     if c not in self.matcher]
            return [added]
        if inst.kind == GENERATING:
            if inst.rule == "noderule":
                rule = inst.conclusions[0]
                n = self.node_rule_fires.get(rule.name, 0) + 1
                self.node_rule_fires[rule.name] = n
                if n > rule.budget:
                    raise BudgetExceeded(f"node-creating rule {rule.name!r} exceeded "
                                         f"its budget of {rule.budget} firings")
            concl = generated(inst, self.fresh)
            return [[self._add(c, acc, inst.rule) for c, acc in concl]]
        raise ValueError("branching instances are applied through apply()")

    def urfather(self, i):
        return self.matcher.classes()[i]

    def describe_clash(self):
        return self.clash.describe() if self.clash else None


def init(phi, frames=False, extensions=None):
    # the admissible copy rules keep one representative per equality class
    # for generating rules, which the frame clash conditions rely on
    return Branch(root_label(phi), frames=frames, extensions=extensions, copies=frames)


def applicable_instances(b):
    return b.applicable()


def apply(b, inst):
    """Apply an instance to a copy of the branch; returns one or two branches."""
    if inst.kind == BRANCHING:
        out = []
        for alt in inst.conclusions:
            nb = b.copy()
            nb.fired.add(inst.key)
            nb._add(alt, False, inst.rule)
            out.append(nb)
        return out
    nb = b.copy()
    nb.apply_inplace(inst)
    return [nb]


def has_clash(b):
    return b.clash


# -- saturation ----------------------------------------------------------------

@dataclass
class Tracer:
    """Collects trace events as dictionaries (one JSON object per line)."""

    events: list = field(default_factory=list)

    def emit(self, **ev):
        ev = {"step": len(self.events), **ev}
        self.events.append(ev)

    def lines(self):
        return [json.dumps(e, ensure_ascii=False) for e in self.events]


@dataclass
class Options:
    frame: FrameClass = FrameClass.ALL
    extensions: object = None
    max_steps: int = 200_000
    strict_two_parent: bool = False


class NaiveEngine:
    def __init__(self, options=None, tracer=None):
        self.options = options or Options()
        self.tracer = tracer
        self.steps = 0
        self.branches_explored = 0
        self.saturated_branches = []
        self._ids = 0

    def _new_id(self):
        self._ids += 1
        return self._ids

    def _trace(self, b, rule, premises, conclusions):
        if self.tracer is not None:
            self.tracer.emit(rule=RULE_NAMES.get(rule, rule),
                             premises=[str(p) for p in premises if not isinstance(p, tuple)],
                             conclusions=[str(c) for c in conclusions], branch=b.id,
                             clash=b.describe_clash())

    def saturate(self, phi):
        opts = self.options
        frames = opts.frame is not FrameClass.ALL
        root = init(phi, frames=frames, extensions=opts.extensions)
        if self.tracer is not None:
            self.tracer.emit(rule="root", premises=[], conclusions=[str(root.root)],
                             branch=root.id, clash=None)
        stack = [root]
        clashes = []
        unknown = None
        while stack:
            b = stack.pop()
            self.branches_explored += 1
            try:
                outcome = self._run(b, stack)
            except BudgetExceeded as exc:
                unknown = unknown or str(exc)
                continue
            if outcome is None:
                clashes.append(b.clash)
                continue
            return Sat(b, extract_model(b))
        if unknown:
            return Unknown(unknown)
        return Unsat(tuple(clashes))

    def _run(self, b, stack):
        """Saturate one branch; push right alternatives on ``stack``.

        Returns the branch when it is open and saturated, None when it closes.
        """
        opts = self.options
        while True:
            if b.clash is not None:
                return None
            inst = b.next_instance()
            if inst is None:
                if opts.frame is not FrameClass.ALL:
                    root = b.root_nominal if opts.frame is FrameClass.TREE else None
                    clash = b.matcher.frame_clash(root, strict=opts.strict_two_parent)
                    if clash is not None:
                        b.clash = clash
                        self._trace(b, "saturation", [], [])
                        return None
                self.saturated_branches.append(b)
                return b
            self.steps += 1
            if self.steps > opts.max_steps:
                raise BudgetExceeded(f"step budget of {opts.max_steps} exhausted")
            if inst.kind == BRANCHING:
                right = b.copy()
                right.id = self._new_id()
                right.fired.add(inst.key)
                right._add(inst.conclusions[1], False, inst.rule)
                b.fired.add(inst.key)
                b._add(inst.conclusions[0], False, inst.rule)
                self._trace(b, inst.rule, inst.premises, [inst.conclusions[0]])
                stack.append(right)
                self._trace(right, inst.rule, inst.premises, [inst.conclusions[1]])
            else:
                (added,) = b.apply_inplace(inst)
                self._trace(b, inst.rule, inst.premises, added)


def saturate(phi, max_steps=200_000, frame=FrameClass.ALL, extensions=None,
             tracer=None):
    opts = Options(frame=frame, extensions=extensions, max_steps=max_steps)
    return NaiveEngine(opts, tracer).saturate(phi)


# -- urfathers and extracted models ------------------------------------------

def urfather(b, i):
    classes = b.matcher.classes()
    if i not in classes:
        raise KeyError(f"nominal {i} does not occur in the branch")
    return classes[i]


def extract_model(b):
    m = b.matcher
    urf = m.classes()
    nodes = sorted(set(urf.values()))
    edges = {}
    data_pairs = {c: [] for c in b.root_cmps}
    valuation = {}
    for e in m.labels:
        if isinstance(e, At):
            body = e.body
            if isinstance(body, Diamond) and isinstance(body.body, Nom) and body.rel != PLUS:
                edges.setdefault(body.rel, set()).add((urf[e.nom], urf[body.body.value]))
            elif isinstance(body, Prop):
                valuation.setdefault(body.name, set()).add(urf[e.nom])
        elif isinstance(e, DataCmp) and e.eq:
            ls, rs = steps(e.left), steps(e.right)
            if len(ls) == 1 and len(rs) == 1 and isinstance(ls[0], Jump) and isinstance(rs[0], Jump):
                data_pairs.setdefault(e.cmp, []).append((urf[ls[0].nom], urf[rs[0].nom]))
    data = {}
    for c, pairs in data_pairs.items():
        uf = UnionFind(nodes)
        for x, y in pairs:
            uf.union(x, y)
        data[c] = [set(s) for s in uf.to_sets()]
    naming = dict(urf)
    default = nodes[0]
    for i in b.root_nominals:
        naming.setdefault(i, default)
    return DataModel(nodes, edges, data, valuation, naming)


# -- termination instrumentation --------------------------------------------

def at_sets(b, qsub=None):
    """(at_node, at_path) restricted to quasi-subcomponents of the root."""
    qsub = qsub or QsubIndex(b.root)
    at_node, at_path = {}, {}
    for e in b.labels:
        if e not in qsub:
            continue
        if isinstance(e, At):
            at_node.setdefault(e.nom, set()).add(e.body)
        else:
            c = e.body if not isinstance(e, DataCmp) else e
            s = steps(c.left)
            at_path.setdefault(s[0].nom, set()).add(concat(*s[1:]))
    return at_node, at_path


def maxsize(b, i, sets=None):
    at_node, at_path = sets or at_sets(b)
    node = max((size_node(x) for x in at_node.get(i, ())), default=0)
    path = max((size_path(x) for x in at_path.get(i, ())), default=0)
    return max(node, path)


def generated_edges(b):
    """Pairs (i, j) such that j was generated by i.

    Only constraints created by the generating rules count; the admissible
    copy rule copy0 also marks edges as constraints but creates no nominal.
    """
    out = []
    for e in b.labels:
        if e in b.acc and isinstance(e, At) and b.origin.get(e) in ("dia", "child"):
            out.append((e.nom, e.body.body.value))
    return out


def termination_violations(b):
    sets = at_sets(b)
    bad = []
    for i, j in generated_edges(b):
        if not maxsize(b, i, sets) > maxsize(b, j, sets):
            bad.append((i, j))
    return bad


def _bookkeeping(e):
    """i:j, i:<a>j (also <+>) and <@i =c @j>."""
    if isinstance(e, At):
        b = e.body
        return isinstance(b, Nom) or (isinstance(b, Diamond) and isinstance(b.body, Nom))
    if isinstance(e, DataCmp) and e.eq:
        ls, rs = steps(e.left), steps(e.right)
        return (len(ls) == len(rs) == 1 and isinstance(ls[0], Jump)
                and isinstance(rs[0], Jump))
    return False


def analyticity_violations(b):
    """Labels that are neither quasi-subcomponents of the root nor bookkeeping."""
    qsub = QsubIndex(b.root)
    return [e for e in b.labels if e not in qsub and not _bookkeeping(e)]
