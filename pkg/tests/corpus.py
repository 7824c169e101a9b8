"""Seeded random formulas for the cross-engine sweeps."""

import random

from hxtab.syntax import (And, At, Axis, Concat, DataCmp, Diamond, Jump, Neg,
                          Nom, Prop, Test, Union, concat, size_node)

WIDE = dict(props=("p", "q"), noms=(0, 1), rels=("a", "b"), cmps=("c",))
NARROW = dict(props=("p",), noms=(0, 1), rels=("a",), cmps=("c",))


class FormulaGen:
    def __init__(self, rng, props, noms, rels, cmps):
        self.rng = rng
        self.props, self.noms, self.rels, self.cmps = props, noms, rels, cmps

    def node(self, budget):
        r = self.rng
        if budget <= 1:
            if r.random() < 0.75:
                return Prop(r.choice(self.props))
            return Nom(r.choice(self.noms))
        kind = r.choices(["neg", "and", "at", "dia", "cmp", "atom"],
                         weights=[3, 4, 2, 3, 3, 1])[0]
        if kind == "atom":
            return self.node(1)
        if kind == "neg":
            return Neg(self.node(budget - 1))
        if kind == "and":
            k = r.randint(1, max(1, budget - 2))
            return And(self.node(k), self.node(max(1, budget - 1 - k)))
        if kind == "at":
            return At(r.choice(self.noms), self.node(budget - 1))
        if kind == "dia":
            return Diamond(r.choice(self.rels), self.node(budget - 1))
        k = r.randint(1, max(1, budget - 2))
        return DataCmp(self.path(k), r.random() < 0.5, r.choice(self.cmps),
                       self.path(max(1, budget - 1 - k)))

    def formula(self, budget):
        """A conjunction of a few random parts (more constraints, more clashes)."""
        parts = self.rng.randint(1, 3)
        share = max(2, budget // parts)
        out = self.node(share)
        for _ in range(parts - 1):
            out = And(out, self.node(share))
        return out

    def path(self, budget):
        """A non-empty path of about ``budget`` size."""
        r = self.rng
        kind = r.choices(["axis", "jump", "test", "union", "seq"],
                         weights=[5, 2, 2, 1, 3])[0]
        if budget == 1 or kind == "axis":
            return Axis(r.choice(self.rels)) if kind != "jump" else Jump(r.choice(self.noms))
        if kind == "jump":
            return Jump(r.choice(self.noms))
        if kind == "test":
            return Test(self.node(budget - 1))
        if kind == "union":
            k = r.randint(1, budget - 1)
            return Union(self.path(k), self.path(max(1, budget - 1 - k)))
        k = r.randint(1, budget - 1)
        return concat(self.path(k), self.path(max(1, budget - k)))


def corpus(n=1000, seed=20240611, max_size=25):
    """``n`` distinct formulas; every other one uses the narrow signature."""
    rng = random.Random(seed)
    gens = [FormulaGen(rng, **WIDE), FormulaGen(rng, **NARROW)]
    out, seen = [], set()
    while len(out) < n:
        g = gens[len(out) % 2]
        phi = g.formula(rng.randint(4, 18))
        if size_node(phi) > max_size or phi in seen:
            continue
        seen.add(phi)
        out.append(phi)
    return out
