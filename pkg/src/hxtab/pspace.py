"""Polynomial-space decision procedure.

A call works on a list of labels: it expands the branch with linear rules,
unfolds branching rules one alternative at a time (remembering the other
alternative together with the branch length at which it was chosen), and
then explores the diamonds of an open branch one after another in
recursive calls.  A recursive call receives the branch with its diamonds
removed, an accessibility constraint to a fresh nominal and the obligation
for that nominal.

What flows back from a call is the set of *facts* it derived about the
nominals it shares with its caller (literals and boxes).  A call may have
several such outcomes (one per open choice of branching rules), and the
caller enumerates them: facts learnt from one subtree are fed into the next
sibling, and when the facts change the caller's own branch the caller is
re-run with them.  Only one path of calls is live at any time, so space
stays proportional to the depth of diamond nesting times the branch size.

Calls are driven by an explicit stack of generators rather than host
recursion, which also makes the recursion depth directly measurable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rules import (BRANCHING, GENERATING, LINEAR, RULE_KIND, RULE_NAMES,
                    Matcher, is_diamond)
from .syntax import (PLUS, At, DataCmp, Diamond, Jump, Neg, Nom, Prop, concat,
                     nominals, rename, signature_of, steps)
from .tableau import FrameClass, root_label

TYPE1, TYPE2, TYPE3 = "type1", "type2", "type3"
_TYPE_OF_KIND = {LINEAR: TYPE1, BRANCHING: TYPE2, GENERATING: TYPE3}


def classify(rule):
    """Rule type (1 linear, 2 branching, 3 generating) of a rule id or display name."""
    by_name = {v: k for k, v in RULE_NAMES.items()}
    rule = by_name.get(rule, rule)
    if rule not in RULE_NAMES:
        raise KeyError(f"unknown rule {rule!r}")
    return _TYPE_OF_KIND[RULE_KIND[rule]]


@dataclass
class SpaceMetrics:
    max_branch_len: int = 0
    max_phi_len: int = 0
    max_recursion_depth: int = 0
    rule_fires_by_type: dict = field(default_factory=lambda: {TYPE1: 0, TYPE2: 0, TYPE3: 0})
    calls: int = 0

    def to_json(self):
        return {"max_branch_len": self.max_branch_len, "max_phi_len": self.max_phi_len,
                "max_recursion_depth": self.max_recursion_depth,
                "rule_fires_by_type": dict(self.rule_fires_by_type), "calls": self.calls}


# -- label shapes ------------------------------------------------------------

def _is_literal(e):
    if isinstance(e, At):
        b = e.body
        if isinstance(b, Neg):
            b = b.body
            return isinstance(b, (Nom, Prop))
        return (isinstance(b, (Nom, Prop))
                or (isinstance(b, Diamond) and isinstance(b.body, Nom)))
    if isinstance(e, DataCmp):
        return (isinstance(e.left, Jump) and isinstance(e.right, Jump))
    return False


def _is_box(e):
    if isinstance(e, At):
        return isinstance(e.body, Neg) and isinstance(e.body.body, Diamond)
    if isinstance(e, Neg) and isinstance(e.body, DataCmp):
        c = e.body
        return isinstance(steps(c.left)[0], Jump) and isinstance(steps(c.right)[0], Jump)
    return False


def _within(e, share):
    return nominals(e) <= share


def root_literals(labels, roots):
    """Literals among ``labels`` that mention root nominals only."""
    roots = frozenset(roots)
    return [e for e in labels if _is_literal(e) and _within(e, roots)]


def rooted_boxes(labels, roots):
    """Boxes among ``labels`` anchored at root nominals only."""
    roots = frozenset(roots)
    return [e for e in labels if _is_box(e) and _within(e, roots)]


def strip_diamonds(labels, acc=()):
    """Drop untreated diamonds: i:<a>phi that are not constraints and <@i a alpha ~ beta>."""
    acc = set(acc)
    return [e for e in labels if not is_diamond(e, e in acc)]


# -- engine ------------------------------------------------------------------

class _State:
    """One branch under construction inside a call."""

    def __init__(self, engine, items, dormant):
        self.engine = engine
        self.m = Matcher(engine.roots, engine.root_cmps, frames=engine.frames,
                         copies=engine.copies, extensions=engine.extensions)
        # diamonds handled by an ancestor count as present but are not expanded
        self.m.present |= dormant
        self.dormant = dormant
        self.linear = []
        self.branching = []
        self.clash = None
        for e, acc in items:
            self.add(e, acc)

    def add(self, e, acc):
        insts, clash = self.m.add(e, acc)
        for inst in insts:
            if inst.kind == LINEAR:
                self.linear.append(inst)
            elif inst.kind == BRANCHING:
                self.branching.append(inst)
            elif inst.rule == "noderule":
                raise NotImplementedError(
                    "node-creating rules are only supported by the naive engine")
        if clash is not None and self.clash is None:
            self.clash = clash

    def items(self, upto=None):
        labels = self.m.labels if upto is None else self.m.labels[:upto]
        return [(e, e in self.m.acc) for e in labels]


class PspaceEngine:
    def __init__(self, frame=FrameClass.ALL, copies=True, extensions=None,
                 tracer=None, max_calls=200_000, strict_two_parent=False):
        self.frame = frame
        self.strict_two_parent = strict_two_parent
        self.frames = frame is not FrameClass.ALL
        self.copies = copies
        self.extensions = extensions
        self.tracer = tracer
        self.max_calls = max_calls
        self.metrics = SpaceMetrics()
        self.clashes = []
        self.nominal_sequence = []

    # public entry point
    def sat(self, phi):
        root = root_label(phi)
        sig = signature_of(root)
        self.root = root
        self.roots = frozenset(sig.noms)
        self.root_cmps = sig.cmps
        self.next_nominal = root.nom + 1
        self.nominal_sequence = [root.nom]
        self._emit(event="call", depth=0, nominal=root.nom, premise=None,
                   phi=[str(root)])
        top = self._call([(root, False)], frozenset(), 0, self.roots)
        return self._drive(top)

    def _emit(self, **ev):
        if self.tracer is not None:
            self.tracer.emit(**ev)

    def _fresh(self):
        k = self.next_nominal
        self.next_nominal += 1
        self.nominal_sequence.append(k)
        return k

    def _drive(self, top):
        stack = [top]
        send = None
        while True:
            gen = stack[-1]
            try:
                req = gen.send(send)
            except StopIteration:
                stack.pop()
                if not stack:
                    return False
                send = ("done", None, None)
                continue
            if req[0] == "call":
                self.metrics.calls += 1
                if self.metrics.calls > self.max_calls:
                    raise RuntimeError(f"call budget of {self.max_calls} exhausted")
                stack.append(self._call(*req[1]))
                self.metrics.max_recursion_depth = max(self.metrics.max_recursion_depth,
                                                       len(stack) - 1)
                send = None
            elif req[0] == "resume":
                stack.append(req[1])
                send = None
            else:  # an outcome
                stack.pop()
                if not stack:
                    return True
                send = ("out", req[1], gen)

    # -- one call ---------------------------------------------------------

    def _call(self, items, dormant, depth, share_up):
        assert all(n < self.next_nominal for e, _ in items for n in nominals(e)), \
            "nominals of a call must be smaller than the next fresh nominal"
        self.metrics.max_phi_len = max(self.metrics.max_phi_len, len(items))
        if not items:
            yield ("out", frozenset())
            return
        yield from self._solve(items, dormant, depth, share_up, frozenset())

    def _solve(self, items, dormant, depth, share_up, known):
        base = list(items) + sorted(known, key=lambda f: (str(f[0]), f[1]))
        alts = []
        state = _State(self, base, dormant)
        while True:
            clash = self._expand(state, alts, depth)
            if clash is None:
                yield from self._explore(state, items, dormant, depth, share_up, known)
            else:
                self.clashes.append(clash)
                self._emit(event="clash", depth=depth, clash=clash.describe())
            if not alts:
                return
            b, chi, prefix = alts.pop()
            state = _State(self, prefix + [(chi, False)], dormant)

    def _expand(self, state, alts, depth):
        fires = self.metrics.rule_fires_by_type
        m = state.m
        while True:
            self.metrics.max_branch_len = max(self.metrics.max_branch_len, len(m.labels))
            if state.clash is not None:
                return state.clash
            if state.linear:
                inst = state.linear.pop(0)
                if all(c in m for c, _ in inst.conclusions) and all(
                        not acc or c in m.acc for c, acc in inst.conclusions):
                    continue
                fires[TYPE1] += 1
                for c, acc in inst.conclusions:
                    state.add(c, acc)
                self._emit(event="rule", depth=depth, rule=RULE_NAMES[inst.rule],
                           premises=[str(p) for p in inst.premises],
                           conclusions=[str(c) for c, _ in inst.conclusions])
                continue
            if state.branching:
                inst = state.branching.pop(0)
                if any(c in m for c in inst.conclusions):
                    continue
                fires[TYPE2] += 1
                alts.append((len(m.labels), inst.conclusions[1], state.items()))
                state.add(inst.conclusions[0], False)
                self._emit(event="rule", depth=depth, rule=RULE_NAMES[inst.rule],
                           premises=[str(p) for p in inst.premises],
                           conclusions=[str(inst.conclusions[0])])
                continue
            break
        return None

    def _diamonds(self, state):
        m = state.m
        canon = m.classes()
        seen = {rename(x, canon) for x in state.dormant}
        out = []
        for e in m.labels:
            if not is_diamond(e, e in m.acc):
                continue
            key = rename(e, canon)
            if key in seen:
                continue
            seen.add(key)
            out.append(e)
        return out

    def _explore(self, state, items, dormant, depth, share_up, known):
        m = state.m
        diamonds = self._diamonds(state)
        share = frozenset(m.noms)
        facts = frozenset(f for f in state.items()
                          if (_is_literal(f[0]) or _is_box(f[0])) and _within(f[0], share))
        base = strip_diamonds(m.labels, m.acc)
        base_items = [(e, e in m.acc) for e in base]
        child_dormant = frozenset(dormant | set(diamonds))
        yield from self._siblings(state, diamonds, 0, facts, base_items, child_dormant,
                                  items, dormant, depth, share, share_up, known)

    def _siblings(self, state, diamonds, k, facts, base_items, child_dormant,
                  items, dormant, depth, share, share_up, known):
        m = state.m
        if k == len(diamonds):
            new = frozenset(f for f in facts
                            if f[0] not in m or (f[1] and f[0] not in m.acc))
            if new:
                yield from self._solve(items, dormant, depth, share_up, known | new)
                return
            if self.frames:
                root = self.root.nom if depth == 0 and self.frame is FrameClass.TREE else None
                clash = m.frame_clash(root, strict=self.strict_two_parent)
                if clash is not None:
                    self.clashes.append(clash)
                    self._emit(event="clash", depth=depth, clash=clash.describe())
                    return
            yield ("out", frozenset(f for f in facts if _within(f[0], share_up)))
            return
        d = diamonds[k]
        n = self._fresh()
        self.metrics.rule_fires_by_type[TYPE3] += 1
        if isinstance(d, At):
            edge = At(d.nom, Diamond(d.body.rel, Nom(n)))
            duty = At(n, d.body.body)
        else:
            s = steps(d.left)
            edge = At(s[0].nom, Diamond(s[1].rel, Nom(n)))
            duty = DataCmp(concat(Jump(n), *s[2:]), d.eq, d.cmp, d.right)
        extra = sorted((f for f in facts if f[0] not in m), key=lambda f: (str(f[0]), f[1]))
        child = base_items + extra + [(edge, True), (duty, False)]
        self._emit(event="call", depth=depth + 1, nominal=n, premise=str(d),
                   phi=[str(e) for e, _ in child])
        resp = yield ("call", (child, child_dormant, depth + 1, share))
        seen = set()
        while resp[0] == "out":
            out, handle = resp[1], resp[2]
            if out not in seen:
                seen.add(out)
                yield from self._siblings(state, diamonds, k + 1, facts | out, base_items,
                                          child_dormant, items, dormant, depth, share,
                                          share_up, known)
            resp = yield ("resume", handle)


def sat(phi, frame=FrameClass.ALL, copies=True, extensions=None, tracer=None):
    """Decide ``phi``; returns (satisfiable, SpaceMetrics)."""
    eng = PspaceEngine(frame=frame, copies=copies, extensions=extensions, tracer=tracer)
    return eng.sat(phi), eng.metrics


def sat_rec(items, next_nominal, roots=None, frame=FrameClass.ALL, copies=True):
    """Run one call on a list of labels whose nominals are below ``next_nominal``."""
    eng = PspaceEngine(frame=frame, copies=copies)
    labels = list(items)
    sig = signature_of(*labels) if labels else None
    eng.roots = frozenset(roots if roots is not None else (sig.noms if sig else ()))
    eng.root_cmps = sig.cmps if sig else ()
    eng.next_nominal = next_nominal
    eng.root = labels[0] if labels else At(0, Prop("_top"))
    return eng._drive(eng._call([(e, False) for e in labels], frozenset(), 0, eng.roots))


__all__ = ["PspaceEngine", "SpaceMetrics", "classify", "root_literals", "rooted_boxes",
           "sat", "sat_rec", "strip_diamonds", "TYPE1", "TYPE2", "TYPE3", "PLUS"]
