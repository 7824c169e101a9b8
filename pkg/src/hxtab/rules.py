"""Rule matching shared by the naive and the polynomial-space engines.

A :class:`Matcher` holds the labels of one branch together with the indexes
needed to discover rule instances incrementally: every time a label is added
it reports the instances in which that label takes part (with the other
premises looked up in the indexes) and any clash the label completes.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
from networkx.utils import UnionFind

from .syntax import (PLUS, And, At, Axis, DataCmp, Diamond, Jump, Neg, Nom,
                     Test, Union, concat, nominals, steps)

LINEAR, BRANCHING, GENERATING = "linear", "branching", "generating"

# printable rule names
RULE_NAMES = {
    "notnot": "¬¬", "and": "∧", "notand": "¬∧", "dia": "◇", "notdia": "¬◇",
    "nom": "nom", "notnom": "¬nom", "copy": "copy", "ref": "ref", "sym": "sym",
    "trans": "trans", "int1": "int₁", "int2": "int₂", "negcmp": "¬⋟",
    "dref": "dRef", "child": "child", "notchild": "¬child", "test": "test",
    "nottest": "¬test", "at": "@", "notat": "¬@", "union": "∪",
    "notunion": "¬∪", "com1": "com₁", "com2": "com₂", "dtrans": "dTrans",
    "copy0": "copy₀", "copy1": "copy₁", "copy2": "copy₂",
    "plusintro": "+intro", "plustrans": "+trans", "pluscopy": "+copy",
    "pure": "pure", "noderule": "node-rule",
}

RULE_KIND = {r: LINEAR for r in RULE_NAMES}
RULE_KIND.update(notand=BRANCHING, nottest=BRANCHING, union=BRANCHING,
                 dia=GENERATING, child=GENERATING, noderule=GENERATING)


@dataclass(frozen=True)
class Instance:
    """One application of a rule to a tuple of premises.

    ``conclusions`` is a tuple of (expr, is_accessibility_constraint) pairs
    for linear rules, a pair of single expressions for branching rules, and
    a description used by :func:`generated` for generating rules.
    """

    rule: str
    premises: tuple
    conclusions: tuple

    @property
    def kind(self):
        return RULE_KIND[self.rule]

    @property
    def key(self):
        return (self.rule, self.premises)


@dataclass(frozen=True)
class Clash:
    kind: str  # PropClash | DataClash | LoopClash | TwoParentClash
    witnesses: tuple

    def describe(self):
        return f"{self.kind} {{{', '.join(str(w) for w in self.witnesses)}}}"


def generated(inst, fresh):
    """Conclusions of a generating instance for the fresh nominal(s)."""
    spec = inst.conclusions
    if inst.rule == "dia":
        i, rel, body = spec
        k = fresh()
        return [(At(i, Diamond(rel, Nom(k))), True), (At(k, body), False)]
    if inst.rule == "child":
        i, rel, rest, eq, cmp, right = spec
        k = fresh()
        return [(At(i, Diamond(rel, Nom(k))), True),
                (DataCmp(concat(Jump(k), rest), eq, cmp, right), False)]
    if inst.rule == "noderule":
        rule, universals = spec
        return [(e, False) for e in rule.instantiate(universals, fresh)]
    raise ValueError(f"{inst.rule} is not a generating rule")


def jump_split(path):
    """(i, rest) for a path of the form @i rest, else None."""
    s = steps(path)
    if s and isinstance(s[0], Jump):
        return s[0].nom, concat(*s[1:])
    return None


def is_diamond(expr, acc):
    """Premise of a generating rule: a non-constraint <a>phi or <@i a alpha ~ beta>."""
    if isinstance(expr, At) and isinstance(expr.body, Diamond):
        return expr.body.rel != PLUS and not acc
    if isinstance(expr, DataCmp):
        s = steps(expr.left)
        return len(s) > 1 and isinstance(s[0], Jump) and isinstance(s[1], Axis)
    return False


def _lin(rule, premises, *concl):
    return Instance(rule, premises, tuple((c, False) for c in concl))


class Matcher:
    """Labels of a branch plus the indexes used for incremental matching.

    Options:
      frames   -- add the reachability rules for forests and trees
      copies   -- add copy0/copy1/copy2 (used by the space-bounded engine)
      extensions -- pure axioms / node-creating rules (see ``frames``)
    """

    def __init__(self, roots, root_cmps, frames=False, copies=False,
                 extensions=None):
        self.roots = frozenset(roots)
        extra = getattr(extensions, "cmps", ())
        self.root_cmps = tuple(sorted(set(root_cmps) | set(extra)))
        self.frames = frames
        self.copies = copies
        self.extensions = extensions
        self.labels = []
        self.acc = set()
        self.present = set()
        self.noms = set()
        self.by_prefix = {}
        self.eq_out = {}
        self.eq_in = {}
        self.edges_out = {}   # i -> rel -> [j]
        self.edges_in = {}    # j -> [(i, rel)]
        self.boxes = {}       # i -> rel -> [psi]  for i:~<rel>psi
        self.neg_axis = {}    # i -> rel -> [(rest, eq, cmp, right)]
        self.cmps_at = {}     # i -> [label] comparisons whose left side is @i ...
        self.deq_out = {}     # (c, i) -> {k}  for <@i =c @k>
        self.deq_in = {}
        self.plus_out = {}
        self.plus_in = {}

    def copy(self):
        new = object.__new__(Matcher)
        new.__dict__.update(self.__dict__)
        new.labels = list(self.labels)
        new.acc = set(self.acc)
        new.present = set(self.present)
        new.noms = set(self.noms)
        for name in ("by_prefix", "eq_out", "eq_in", "edges_in", "cmps_at",
                     "deq_out", "deq_in", "plus_out", "plus_in"):
            setattr(new, name, {k: type(v)(v) for k, v in getattr(self, name).items()})
        for name in ("edges_out", "boxes", "neg_axis"):
            setattr(new, name, {k: {r: list(v) for r, v in d.items()}
                                for k, d in getattr(self, name).items()})
        return new

    def __contains__(self, expr):
        return expr in self.present

    def __len__(self):
        return len(self.labels)

    # -- adding labels -------------------------------------------------------

    def add(self, expr, acc=False):
        """Append a label; return (new instances, clash or None).

        Adding a label that is already present only updates its
        accessibility flag.
        """
        if expr in self.present:
            if acc and expr not in self.acc:
                self.acc.add(expr)
                if (isinstance(expr, At) and isinstance(expr.body, Diamond)
                        and isinstance(expr.body.body, Nom)):
                    return self._edge_instances(expr, acc_only=True), None
            return [], None
        self.present.add(expr)
        self.labels.append(expr)
        if acc:
            self.acc.add(expr)
        out = []
        for n in sorted(nominals(expr) - self.noms):
            self.noms.add(n)
            out.append(_lin("ref", (Nom(n),), At(n, Nom(n))))
            if self.extensions is not None:
                out.extend(self.extensions.instances_for(self, n))
        out.extend(self._instances(expr, acc))
        return out, self._clash(expr)

    def _clash(self, e):
        if isinstance(e, At):
            b = e.body
            other = At(e.nom, b.body) if isinstance(b, Neg) else At(e.nom, Neg(b))
            if other in self.present:
                pair = (other, e) if isinstance(b, Neg) else (e, other)
                return Clash("PropClash", pair)
            if (self.frames and isinstance(b, Diamond) and b.rel == PLUS
                    and isinstance(b.body, Nom) and b.body.value == e.nom):
                return Clash("LoopClash", (e,))
        elif isinstance(e, DataCmp):
            if len(steps(e.left)) == 1 and len(steps(e.right)) == 1:
                dual = DataCmp(e.left, not e.eq, e.cmp, e.right)
                dual_c = DataCmp(e.right, not e.eq, e.cmp, e.left)
                for o in (dual, dual_c):
                    if o in self.present:
                        return Clash("DataClash", (o, e) if o.eq else (e, o))
        return None

    def _instances(self, e, acc):
        out = []
        if isinstance(e, At):
            self._at_instances(e, acc, out)
            self.by_prefix.setdefault(e.nom, []).append(e.body)
        elif isinstance(e, DataCmp):
            self._cmp_instances(e, out)
        elif isinstance(e, Neg) and isinstance(e.body, DataCmp):
            self._negcmp_instances(e, out)
        return out

    def _copy_targets(self, i):
        return [j for j in self.eq_out.get(i, ()) if j in self.roots and j < i]

    def _at_instances(self, e, acc, out):
        i, b = e.nom, e.body
        if not isinstance(b, Nom):
            for j in self._copy_targets(i):
                out.append(_lin("copy", (e, At(i, Nom(j))), At(j, b)))
        if isinstance(b, Neg):
            c = b.body
            if isinstance(c, Neg):
                out.append(_lin("notnot", (e,), At(i, c.body)))
            elif isinstance(c, And):
                out.append(Instance("notand", (e,), (At(i, Neg(c.left)), At(i, Neg(c.right)))))
            elif isinstance(c, Diamond):
                self.boxes.setdefault(i, {}).setdefault(c.rel, []).append(c.body)
                for j in self.edges_out.get(i, {}).get(c.rel, ()):
                    edge = At(i, Diamond(c.rel, Nom(j)))
                    if edge in self.acc:
                        out.append(_lin("notdia", (e, edge), At(j, Neg(c.body))))
            elif isinstance(c, At):
                out.append(_lin("notnom", (e,), At(c.nom, Neg(c.body))))
            elif isinstance(c, DataCmp):
                out.append(_lin("int2", (e,), Neg(DataCmp(
                    concat(Jump(i), c.left), c.eq, c.cmp, concat(Jump(i), c.right)))))
        elif isinstance(b, And):
            out.append(_lin("and", (e,), At(i, b.left), At(i, b.right)))
        elif isinstance(b, At):
            out.append(_lin("nom", (e,), At(b.nom, b.body)))
        elif isinstance(b, DataCmp):
            out.append(_lin("int1", (e,), DataCmp(
                concat(Jump(i), b.left), b.eq, b.cmp, concat(Jump(i), b.right))))
        elif isinstance(b, Diamond):
            if isinstance(b.body, Nom):
                out.extend(self._edge_instances(e, acc_only=False))
            if b.rel != PLUS and not acc:
                out.append(Instance("dia", (e,), (i, b.rel, b.body)))
        elif isinstance(b, Nom):
            self._eq_instances(i, b.value, e, out)

    def _edge_instances(self, e, acc_only):
        """Instances for a label i:<rel>j.

        With ``acc_only`` only those needing the label to be an accessibility
        constraint are produced (used when an existing label gains the flag).
        """
        out = []
        i, rel, j = e.nom, e.body.rel, e.body.body.value
        is_acc = e in self.acc
        if rel == PLUS:
            if acc_only:
                return out
            self.plus_out.setdefault(i, set()).add(j)
            self.plus_in.setdefault(j, set()).add(i)
            for k in list(self.plus_out.get(j, ())):
                out.append(_lin("plustrans", (e, At(j, Diamond(PLUS, Nom(k)))),
                                At(i, Diamond(PLUS, Nom(k)))))
            for h in list(self.plus_in.get(i, ())):
                out.append(_lin("plustrans", (At(h, Diamond(PLUS, Nom(i))), e),
                                At(h, Diamond(PLUS, Nom(j)))))
            return out
        if not acc_only:
            self.edges_out.setdefault(i, {}).setdefault(rel, []).append(j)
            self.edges_in.setdefault(j, []).append((i, rel))
            for rest, eq, cmp, right in self.neg_axis.get(i, {}).get(rel, ()):
                prem = Neg(DataCmp(concat(Jump(i), Axis(rel), rest), eq, cmp, right))
                out.append(_lin("notchild", (prem, e),
                                Neg(DataCmp(concat(Jump(j), rest), eq, cmp, right))))
            if self.frames:
                out.append(_lin("plusintro", (e,), At(i, Diamond(PLUS, Nom(j)))))
                for k in self.eq_out.get(j, ()):
                    out.append(_lin("pluscopy", (e, At(j, Nom(k))), At(i, Diamond(PLUS, Nom(k)))))
        if is_acc:
            for psi in self.boxes.get(i, {}).get(rel, ()):
                out.append(_lin("notdia", (At(i, Neg(Diamond(rel, psi))), e), At(j, Neg(psi))))
            if self.copies:
                for k in self.eq_out.get(j, ()):
                    if k in self.roots and k < j:
                        out.append(Instance("copy0", (e, At(j, Nom(k))),
                                            ((At(i, Diamond(rel, Nom(k))), True),)))
        return out

    def _eq_instances(self, i, j, e, out):
        """Instances for a nominal equality i:j."""
        self.eq_out.setdefault(i, set()).add(j)
        self.eq_in.setdefault(j, set()).add(i)
        out.append(_lin("sym", (e,), At(j, Nom(i))))
        # trans: i:k, i:l, j:l => j:k, with e in each of the three roles
        for l in list(self.eq_out[i]):
            for jj in list(self.eq_in.get(l, ())):
                out.append(_lin("trans", (e, At(i, Nom(l)), At(jj, Nom(l))), At(jj, Nom(j))))
        for k in list(self.eq_out[i]):
            for jj in list(self.eq_in.get(j, ())):
                out.append(_lin("trans", (At(i, Nom(k)), e, At(jj, Nom(j))), At(jj, Nom(k))))
        for ii in list(self.eq_in.get(j, ())):
            for k in list(self.eq_out.get(ii, ())):
                out.append(_lin("trans", (At(ii, Nom(k)), At(ii, Nom(j)), e), At(i, Nom(k))))
        for c in self.root_cmps:
            out.append(_lin("dref", (e,), DataCmp(Jump(i), True, c, Jump(j))))
        if j in self.roots and j < i:
            for body in self.by_prefix.get(i, ()):
                if not isinstance(body, Nom):
                    out.append(_lin("copy", (At(i, body), e), At(j, body)))
            if self.copies:
                for k, rel in self.edges_in.get(i, ()):
                    edge = At(k, Diamond(rel, Nom(i)))
                    if edge in self.acc:
                        out.append(Instance("copy0", (edge, e),
                                            ((At(k, Diamond(rel, Nom(j))), True),)))
                for lab in self.cmps_at.get(i, ()):
                    out.append(self._copy_cmp(lab, i, j, e))
        if self.frames:
            for k, rel in self.edges_in.get(i, ()):
                out.append(_lin("pluscopy", (At(k, Diamond(rel, Nom(i))), e),
                                At(k, Diamond(PLUS, Nom(j)))))

    def _copy_cmp(self, lab, i, j, eq_label):
        neg = isinstance(lab, Neg)
        c = lab.body if neg else lab
        _, rest = jump_split(c.left)
        moved = DataCmp(concat(Jump(j), rest), c.eq, c.cmp, c.right)
        if neg:
            return _lin("copy2", (lab, eq_label), Neg(moved))
        return _lin("copy1", (lab, eq_label), moved)

    def _register_cmp(self, label, i, out):
        self.cmps_at.setdefault(i, []).append(label)
        if self.copies:
            for j in self._copy_targets(i):
                out.append(self._copy_cmp(label, i, j, At(i, Nom(j))))

    def _cmp_instances(self, e, out):
        split = jump_split(e.left)
        if split is None:
            return
        i, rest = split
        self._register_cmp(e, i, out)
        if rest is None:
            out.append(_lin("com1", (e,), DataCmp(e.right, e.eq, e.cmp, Jump(i))))
            rs = steps(e.right)
            if e.eq and len(rs) == 1 and isinstance(rs[0], Jump):
                self._dtrans(i, rs[0].nom, e.cmp, e, out)
            return
        s = steps(rest)
        first, after = s[0], concat(*s[1:])
        if isinstance(first, Axis):
            out.append(Instance("child", (e,), (i, first.rel, after, e.eq, e.cmp, e.right)))
        elif isinstance(first, Test):
            out.append(_lin("test", (e,), At(i, first.body),
                            DataCmp(concat(Jump(i), after), e.eq, e.cmp, e.right)))
        elif isinstance(first, Jump):
            out.append(_lin("at", (e,), DataCmp(concat(first, after), e.eq, e.cmp, e.right)))
        elif isinstance(first, Union):
            out.append(Instance("union", (e,), tuple(
                DataCmp(concat(Jump(i), alt, after), e.eq, e.cmp, e.right)
                for alt in (first.left, first.right))))

    def _dtrans(self, i, k, c, e, out):
        self.deq_out.setdefault((c, i), set()).add(k)
        self.deq_in.setdefault((c, k), set()).add(i)
        for j in list(self.deq_out.get((c, k), ())):
            out.append(_lin("dtrans", (e, DataCmp(Jump(k), True, c, Jump(j))),
                            DataCmp(Jump(i), True, c, Jump(j))))
        for h in list(self.deq_in.get((c, i), ())):
            out.append(_lin("dtrans", (DataCmp(Jump(h), True, c, Jump(i)), e),
                            DataCmp(Jump(h), True, c, Jump(k))))

    def _negcmp_instances(self, e, out):
        c = e.body
        split = jump_split(c.left)
        if split is None:
            return
        i, rest = split
        self._register_cmp(e, i, out)
        if rest is None:
            out.append(_lin("com2", (e,), Neg(DataCmp(c.right, c.eq, c.cmp, Jump(i)))))
            rs = steps(c.right)
            if len(rs) == 1 and isinstance(rs[0], Jump):
                out.append(_lin("negcmp", (e,), DataCmp(Jump(i), not c.eq, c.cmp, rs[0])))
            return
        s = steps(rest)
        first, after = s[0], concat(*s[1:])
        if isinstance(first, Axis):
            key = (after, c.eq, c.cmp, c.right)
            self.neg_axis.setdefault(i, {}).setdefault(first.rel, []).append(key)
            for j in self.edges_out.get(i, {}).get(first.rel, ()):
                edge = At(i, Diamond(first.rel, Nom(j)))
                out.append(_lin("notchild", (e, edge),
                                Neg(DataCmp(concat(Jump(j), after), c.eq, c.cmp, c.right))))
        elif isinstance(first, Test):
            out.append(Instance("nottest", (e,), (
                At(i, Neg(first.body)),
                Neg(DataCmp(concat(Jump(i), after), c.eq, c.cmp, c.right)))))
        elif isinstance(first, Jump):
            out.append(_lin("notat", (e,), Neg(DataCmp(concat(first, after), c.eq, c.cmp, c.right))))
        elif isinstance(first, Union):
            out.append(_lin("notunion", (e,), *(
                Neg(DataCmp(concat(Jump(i), alt, after), c.eq, c.cmp, c.right))
                for alt in (first.left, first.right))))

    # -- whole-branch queries -------------------------------------------------

    def two_parent_clash(self, strict=False):
        """Two reachability predecessors of a nominal that are unrelated.

        Label-level test; ``strict`` only accepts j:k or j:<+>k (not the
        symmetric pair) as relating j and k.
        """
        for i in sorted(self.plus_in):
            preds = sorted(self.plus_in[i])
            for a in range(len(preds)):
                for b in range(a + 1, len(preds)):
                    j, k = preds[a], preds[b]
                    if self._related(j, k) or (not strict and self._related(k, j)):
                        continue
                    return Clash("TwoParentClash", (At(j, Diamond(PLUS, Nom(i))),
                                                    At(k, Diamond(PLUS, Nom(i)))))
        return None

    def _related(self, j, k):
        return k in self.eq_out.get(j, ()) or k in self.plus_out.get(j, ())

    def is_connected(self, root):
        """Every nominal is root itself (up to equality) or a <+>-successor of it."""
        return all(j in self.eq_out.get(root, ()) or j in self.plus_out.get(root, ())
                   for j in self.noms)

    def _class_reach(self):
        classes = self.classes()
        g = nx.DiGraph()
        g.add_nodes_from(set(classes.values()))
        witness = {}
        for i, js in self.plus_out.items():
            for j in js:
                e = (classes[i], classes[j])
                g.add_edge(*e)
                witness.setdefault(e, At(i, Diamond(PLUS, Nom(j))))
        return classes, nx.transitive_closure(g, reflexive=False), witness

    def frame_clash(self, root=None, strict=False):
        """Loop / two-parent / disconnection test on the quotient by equality.

        Reachability labels are read between equality classes and closed
        transitively, so a branch passes iff its extracted model's
        ``<+>`` structure is a forest (a tree rooted at ``root`` when given).
        With ``strict`` the label-level two-parent test is used instead.
        """
        classes, reach, witness = self._class_reach()
        for c in sorted(reach):
            if reach.has_edge(c, c):
                w = witness.get((c, c), At(c, Diamond(PLUS, Nom(c))))
                return Clash("LoopClash", (w,))
        if strict:
            clash = self.two_parent_clash(strict=True)
            if clash is not None:
                return clash
            if root is not None and not self.is_connected(root):
                return Clash("Disconnected", ())
            return None
        else:
            for c in sorted(reach):
                preds = sorted(reach.predecessors(c))
                for a in range(len(preds)):
                    for b in range(a + 1, len(preds)):
                        j, k = preds[a], preds[b]
                        if reach.has_edge(j, k) or reach.has_edge(k, j):
                            continue
                        return Clash("TwoParentClash", (At(j, Diamond(PLUS, Nom(c))),
                                                        At(k, Diamond(PLUS, Nom(c)))))
        parents = {}
        for i, by_rel in sorted(self.edges_out.items()):
            for rel, js in sorted(by_rel.items()):
                for j in js:
                    seen = parents.setdefault(classes[j], {})
                    seen.setdefault(classes[i], At(i, Diamond(rel, Nom(j))))
                    if len(seen) > 1:
                        return Clash("TwoParentClash", tuple(seen.values())[:2])
        if root is not None:
            r = classes.get(root, root)
            if not all(c == r or reach.has_edge(r, c) for c in reach):
                return Clash("Disconnected", ())
        return None

    def classes(self):
        """Map every nominal to the minimum of its equality class."""
        uf = UnionFind(sorted(self.noms))
        for i, js in self.eq_out.items():
            for j in js:
                uf.union(i, j)
        return {n: min(s) for s in uf.to_sets() for n in s}
