"""Formula language: AST, parser, printer and structural measures.

Paths are stored as flat step sequences, so the leading step of any path is
available in constant time.  Negation is kept as written.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

TOP_PROP = "_top"
DEFAULT_CMP = "_d"
PLUS = "+"


class Expr:
    """Shared behaviour for immutable AST nodes (cached structural hash)."""

    __slots__ = ()

    def __hash__(self):
        return self._hash

    def __str__(self):
        if isinstance(self, Path):
            return print_path(self)
        return print_node(self)


class Node(Expr):
    __slots__ = ()


class Path(Expr):
    __slots__ = ()


def _hashed(cls):
    # frozen dataclass with a memoised hash; nodes are compared a lot
    cls = dataclass(frozen=True, eq=True)(cls)
    fields = tuple(cls.__dataclass_fields__)

    def _h(self):
        return hash((cls.__name__,) + tuple(getattr(self, f) for f in fields))

    prop = cached_property(_h)
    prop.__set_name__(cls, "_hash")
    cls._hash = prop
    cls.__hash__ = Expr.__hash__
    cls.__str__ = Expr.__str__
    cls.__repr__ = lambda self: f"{cls.__name__}({str(self)!r})"
    return cls


# -- node expressions ------------------------------------------------------

@_hashed
class Prop(Node):
    name: str


@_hashed
class Nom(Node):
    value: int


@_hashed
class Neg(Node):
    body: Node


@_hashed
class And(Node):
    left: Node
    right: Node


@_hashed
class At(Node):
    nom: int
    body: Node


@_hashed
class Diamond(Node):
    rel: str
    body: Node


@_hashed
class DataCmp(Node):
    left: Path
    eq: bool
    cmp: str
    right: Path


# -- path expressions ------------------------------------------------------

@_hashed
class Axis(Path):
    rel: str


@_hashed
class Jump(Path):
    nom: int


@_hashed
class Test(Path):
    body: Node


@_hashed
class Union(Path):
    left: Path
    right: Path


@_hashed
class Concat(Path):
    """A sequence of at least two steps; use :func:`concat` to build one."""

    steps: tuple


def steps(path):
    """The step tuple of a path (empty for ``None``)."""
    if path is None:
        return ()
    if isinstance(path, Concat):
        return path.steps
    return (path,)


def concat(*parts):
    """Concatenate paths, flattening nested sequences; ``None`` parts are empty.

    Returns ``None`` for the empty path.
    """
    out = []
    for p in parts:
        out.extend(steps(p))
    if not out:
        return None
    if len(out) == 1:
        return out[0]
    return Concat(tuple(out))


def head(path):
    return steps(path)[0]


def tail(path):
    """Everything after the leading step, or ``None``."""
    return concat(*steps(path)[1:])


# -- sugar -----------------------------------------------------------------

def Or(a, b):
    return Neg(And(Neg(a), Neg(b)))


def Implies(a, b):
    return Neg(And(a, Neg(b)))


def Iff(a, b):
    return And(Implies(a, b), Implies(b, a))


def top():
    return Or(Prop(TOP_PROP), Neg(Prop(TOP_PROP)))


def path_diamond(path, body, cmp=DEFAULT_CMP):
    """<alpha>phi for an arbitrary path, via <alpha phi? = alpha phi?>."""
    if isinstance(path, Axis):
        return Diamond(path.rel, body)
    p = concat(path, Test(body))
    return DataCmp(p, True, cmp, p)


def box(path, body, cmp=DEFAULT_CMP):
    return Neg(path_diamond(path, Neg(body), cmp))


def conj(*items):
    items = list(items)
    out = items[-1]
    for x in reversed(items[:-1]):
        out = And(x, out)
    return out


# -- printing --------------------------------------------------------------

def print_node(e):
    if isinstance(e, Prop):
        return e.name
    if isinstance(e, Nom):
        return str(e.value)
    if isinstance(e, Neg):
        return "!" + print_node(e.body)
    if isinstance(e, And):
        return f"({print_node(e.left)} & {print_node(e.right)})"
    if isinstance(e, At):
        return f"{e.nom}:{print_node(e.body)}"
    if isinstance(e, Diamond):
        return f"<{e.rel}>{print_node(e.body)}"
    if isinstance(e, DataCmp):
        op = "=" if e.eq else "!="
        return f"<{print_path(e.left)} {op}{e.cmp} {print_path(e.right)}>"
    raise TypeError(f"not a node expression: {e!r}")


def print_path(p):
    if p is None:
        return ""
    if isinstance(p, Axis):
        return p.rel
    if isinstance(p, Jump):
        return f"@{p.nom}"
    if isinstance(p, Test):
        return f"({print_node(p.body)})?"
    if isinstance(p, Union):
        return f"({print_path(p.left)} U {print_path(p.right)})"
    if isinstance(p, Concat):
        return " ".join(print_path(s) for s in p.steps)
    raise TypeError(f"not a path expression: {p!r}")


# -- parsing ---------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, msg, line, col):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<nat>\d+)
      | (?P<ph>\$[A-Za-z_][A-Za-z0-9_]*)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<op><->|->|!=|[!&|<>=:@()?\[\],.])""",
    re.VERBOSE,
)

RESERVED = {"U", "true"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text, line=1):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            word = m.group()
            if kind == "op":
                kind = word
            toks.append(Token(kind, word, line, pos + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, len(text) + 1))
    return toks


class Parser:
    """Recursive-descent parser with backtracking for ``(`` in paths.

    ``placeholders`` maps ``$name`` tokens to (negative) stand-in nominals;
    when it is ``None`` placeholders are rejected.
    """

    def __init__(self, text, line=1, signature=None, default_cmp=None,
                 placeholders=None):
        self.toks = tokenize(text, line)
        self.i = 0
        self.signature = signature
        if default_cmp is None:
            cmps = list(signature.cmps) if signature is not None else []
            default_cmp = cmps[0] if cmps else DEFAULT_CMP
        self.default_cmp = default_cmp
        self.placeholders = placeholders

    # token helpers
    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, tok.line, tok.col)

    def expect(self, kind):
        t = self.peek()
        if t.kind != kind:
            shown = t.text or "end of input"
            raise self.error(f"expected {kind!r}, found {shown!r}")
        return self.next()

    def at_eof(self):
        return self.peek().kind == "eof"

    # symbols
    def nominal(self, tok):
        if tok.kind == "nat":
            return int(tok.text)
        if self.placeholders is None:
            raise self.error("placeholder nominals are only allowed in axiom files", tok)
        return self.placeholders.setdefault(tok.text, -1 - len(self.placeholders))

    def rel(self, tok):
        name = tok.text
        if name in RESERVED:
            raise self.error(f"{name!r} is reserved", tok)
        if self.signature is not None and name not in self.signature.rels:
            raise self.error(f"unknown relation {name!r}", tok)
        return name

    def cmp(self, tok):
        if tok.kind != "ident":
            raise self.error("expected a comparison symbol", tok)
        name = tok.text
        if self.signature is not None and name not in self.signature.cmps:
            raise self.error(f"unknown comparison {name!r}", tok)
        return name

    # grammar
    def parse_top(self):
        e = self.node()
        if not self.at_eof():
            raise self.error(f"unexpected {self.peek().text!r}")
        return e

    def node(self):
        left = self.disj()
        t = self.peek().kind
        if t == "->":
            self.next()
            return Implies(left, self.node())
        if t == "<->":
            self.next()
            return Iff(left, self.node())
        return left

    def disj(self):
        e = self.conj()
        while self.peek().kind == "|":
            self.next()
            e = Or(e, self.conj())
        return e

    def conj(self):
        e = self.unary()
        while self.peek().kind == "&":
            self.next()
            e = And(e, self.unary())
        return e

    def unary(self):
        t = self.peek()
        if t.kind == "!":
            self.next()
            return Neg(self.unary())
        if t.kind in ("nat", "ph") and self.peek(1).kind == ":":
            self.next()
            self.next()
            return At(self.nominal(t), self.unary())
        if t.kind == "<":
            return self.angle()
        if t.kind == "[":
            return self.square()
        return self.atom()

    def atom(self):
        t = self.next()
        if t.kind in ("nat", "ph"):
            return Nom(self.nominal(t))
        if t.kind == "ident":
            if t.text == "true":
                return top()
            if t.text in RESERVED:
                raise self.error(f"{t.text!r} is reserved", t)
            return Prop(t.text)
        if t.kind == "(":
            e = self.node()
            self.expect(")")
            return e
        shown = t.text or "end of input"
        raise self.error(f"unexpected {shown!r}", t)

    def angle(self):
        self.expect("<")
        path = self.path()
        t = self.peek()
        if t.kind in ("=", "!="):
            self.next()
            c = self.cmp(self.next())
            right = self.path()
            self.expect(">")
            return DataCmp(path, t.kind == "=", c, right)
        self.expect(">")
        return path_diamond(path, self.unary(), self.default_cmp)

    def square(self):
        self.expect("[")
        path = self.path()
        t = self.peek()
        if t.kind in ("=", "!="):
            # [a =c b] is the dual of <a !=c b>
            self.next()
            c = self.cmp(self.next())
            right = self.path()
            self.expect("]")
            return Neg(DataCmp(path, t.kind != "=", c, right))
        self.expect("]")
        return box(path, self.unary(), self.default_cmp)

    def path(self):
        p = self.seq()
        while self.peek().kind == "ident" and self.peek().text == "U":
            self.next()
            p = Union(p, self.seq())
        return p

    def seq(self):
        parts = [self.step()]
        while self._starts_step():
            parts.append(self.step())
        return concat(*parts)

    def _starts_step(self):
        t = self.peek()
        if t.kind == "ident":
            return t.text != "U"
        return t.kind in ("@", "(")

    def step(self):
        t = self.peek()
        if t.kind == "ident":
            self.next()
            return Axis(self.rel(t))
        if t.kind == "@":
            self.next()
            n = self.next()
            if n.kind not in ("nat", "ph"):
                raise self.error("expected a nominal after '@'", n)
            return Jump(self.nominal(n))
        if t.kind == "(":
            save = self.i
            try:
                self.next()
                body = self.node()
                self.expect(")")
                self.expect("?")
                return Test(body)
            except ParseError:
                self.i = save
            self.next()
            p = self.path()
            self.expect(")")
            return p
        shown = t.text or "end of input"
        raise self.error(f"expected a path step, found {shown!r}", t)


def parse_node(text, signature=None, default_cmp=None):
    return Parser(text, signature=signature, default_cmp=default_cmp).parse_top()


def parse_path(text, signature=None):
    p = Parser(text, signature=signature)
    out = p.path()
    if not p.at_eof():
        raise p.error(f"unexpected {p.peek().text!r}")
    return out


def formula_lines(text):
    """Yield (line number, text) for non-blank, non-comment lines."""
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def parse_file(text, signature=None):
    out = []
    for n, line in formula_lines(text):
        out.append(Parser(line, line=n, signature=signature).parse_top())
    return out


# -- signature and measures ------------------------------------------------

@dataclass(frozen=True)
class Signature:
    props: frozenset = frozenset()
    rels: tuple = ()
    cmps: tuple = ()
    noms: frozenset = frozenset()


def _walk(e, acc):
    if isinstance(e, Prop):
        acc["props"].add(e.name)
    elif isinstance(e, Nom):
        acc["noms"].add(e.value)
    elif isinstance(e, Neg):
        _walk(e.body, acc)
    elif isinstance(e, And):
        _walk(e.left, acc)
        _walk(e.right, acc)
    elif isinstance(e, At):
        acc["noms"].add(e.nom)
        _walk(e.body, acc)
    elif isinstance(e, Diamond):
        acc["rels"].setdefault(e.rel)
        _walk(e.body, acc)
    elif isinstance(e, DataCmp):
        acc["cmps"].setdefault(e.cmp)
        _walk(e.left, acc)
        _walk(e.right, acc)
    elif isinstance(e, Axis):
        acc["rels"].setdefault(e.rel)
    elif isinstance(e, Jump):
        acc["noms"].add(e.nom)
    elif isinstance(e, Test):
        _walk(e.body, acc)
    elif isinstance(e, Union):
        _walk(e.left, acc)
        _walk(e.right, acc)
    elif isinstance(e, Concat):
        for s in e.steps:
            _walk(s, acc)
    else:
        raise TypeError(f"unexpected {e!r}")


def signature_of(*exprs):
    acc = {"props": set(), "noms": set(), "rels": {}, "cmps": {}}
    for e in exprs:
        _walk(e, acc)
    return Signature(frozenset(acc["props"]), tuple(acc["rels"]),
                     tuple(acc["cmps"]), frozenset(acc["noms"]))


def nominals(e):
    return signature_of(e).noms


def size_node(e):
    if isinstance(e, (Prop, Nom)):
        return 1
    if isinstance(e, Neg):
        return 1 + size_node(e.body)
    if isinstance(e, And):
        return 1 + size_node(e.left) + size_node(e.right)
    if isinstance(e, At):
        return 3 + size_node(e.body)
    if isinstance(e, Diamond):
        return 1 + size_node(e.body)
    if isinstance(e, DataCmp):
        return 5 + size_path(e.left) + size_path(e.right)
    raise TypeError(f"not a node expression: {e!r}")


def size_path(p):
    if p is None:
        return 0
    if isinstance(p, (Axis, Jump)):
        return 1
    if isinstance(p, Test):
        return 1 + size_node(p.body)
    if isinstance(p, Union):
        return 1 + size_path(p.left) + size_path(p.right)
    if isinstance(p, Concat):
        return sum(size_path(s) for s in p.steps)
    raise TypeError(f"not a path expression: {p!r}")


def size(e):
    return size_path(e) if isinstance(e, Path) else size_node(e)


# -- subcomponents ---------------------------------------------------------

def _sub_step(step, out):
    # sub' of an atomic step: {i} for @i, nothing for an axis, sub(phi) for phi?
    if isinstance(step, Jump):
        out.add(Nom(step.nom))
    elif isinstance(step, Test):
        _sub(step.body, out)


def _sub_cmp(e, out):
    if e in out:
        return
    out.add(e)
    ls, rs = steps(e.left), steps(e.right)
    first = ls[0]
    if isinstance(first, Union):
        rest = concat(*ls[1:])
        for branch in (first.left, first.right):
            _sub_cmp(DataCmp(concat(branch, rest), e.eq, e.cmp, e.right), out)
    elif len(ls) > 1:
        _sub_step(first, out)
        _sub_cmp(DataCmp(concat(*ls[1:]), e.eq, e.cmp, e.right), out)
    elif len(rs) > 1 or isinstance(rs[0], Union):
        # single step on the left, longer (or union) path on the right: commute
        _sub_cmp(DataCmp(e.right, e.eq, e.cmp, e.left), out)
    else:
        _sub_step(first, out)
        _sub_step(rs[0], out)


def _sub(e, out):
    if isinstance(e, DataCmp):
        _sub_cmp(e, out)
        return
    if e in out:
        return
    out.add(e)
    if isinstance(e, Neg):
        _sub(e.body, out)
    elif isinstance(e, And):
        _sub(e.left, out)
        _sub(e.right, out)
    elif isinstance(e, At):
        out.add(Nom(e.nom))
        _sub(e.body, out)
    elif isinstance(e, Diamond):
        _sub(e.body, out)


def subcomponents(e):
    out = set()
    _sub(e, out)
    return out


class QsubIndex:
    """Shape matcher for quasi-subcomponents of a root label."""

    def __init__(self, root):
        self.root = root
        self.sub = subcomponents(root)
        self.neg = {x.body for x in self.sub if isinstance(x, Neg)}
        # a subcomponent or its negation may appear with either polarity
        cmps = {x for x in self.sub if isinstance(x, DataCmp)}
        cmps |= {x.body for x in self.sub if isinstance(x, Neg) and isinstance(x.body, DataCmp)}
        self.pos_cmps = self.neg_cmps = list(cmps)

    def _cmp_matches(self, c, pool):
        ls, rs = steps(c.left), steps(c.right)
        if not ls or not rs or not isinstance(ls[0], Jump) or not isinstance(rs[0], Jump):
            return False
        alpha, beta = concat(*ls[1:]), concat(*rs[1:])
        for s in pool:
            if s.eq != c.eq or s.cmp != c.cmp:
                continue
            if alpha is not None and s.left != alpha:
                continue
            if beta is not None and s.right != beta:
                continue
            return True
        return False

    def __contains__(self, label):
        if isinstance(label, At):
            b = label.body
            return b in self.sub or (isinstance(b, Neg) and b.body in self.sub)
        if isinstance(label, DataCmp):
            # comparisons are symmetric and com1/com2 swap the sides
            mirror = DataCmp(label.right, label.eq, label.cmp, label.left)
            if any(self._cmp_matches(c, self.pos_cmps) for c in (label, mirror)):
                return True
            # <@j dual @k> arising from a negated comparison
            if len(steps(label.left)) == 1 and len(steps(label.right)) == 1:
                flipped = DataCmp(label.left, not label.eq, label.cmp, label.right)
                mirror = DataCmp(label.right, not label.eq, label.cmp, label.left)
                return any(self._cmp_matches(c, self.neg_cmps) for c in (flipped, mirror))
            return False
        if isinstance(label, Neg) and isinstance(label.body, DataCmp):
            b = label.body
            mirror = DataCmp(b.right, b.eq, b.cmp, b.left)
            return any(self._cmp_matches(c, self.neg_cmps) for c in (b, mirror))
        return False


def is_quasi_subcomponent(label, root):
    return label in QsubIndex(root)


def rename(e, mapping):
    """Replace nominals according to ``mapping`` (missing keys are kept)."""
    if e is None:
        return None
    if isinstance(e, Prop):
        return e
    if isinstance(e, Nom):
        return Nom(mapping.get(e.value, e.value))
    if isinstance(e, Neg):
        return Neg(rename(e.body, mapping))
    if isinstance(e, And):
        return And(rename(e.left, mapping), rename(e.right, mapping))
    if isinstance(e, At):
        return At(mapping.get(e.nom, e.nom), rename(e.body, mapping))
    if isinstance(e, Diamond):
        return Diamond(e.rel, rename(e.body, mapping))
    if isinstance(e, DataCmp):
        return DataCmp(rename(e.left, mapping), e.eq, e.cmp, rename(e.right, mapping))
    if isinstance(e, Axis):
        return e
    if isinstance(e, Jump):
        return Jump(mapping.get(e.nom, e.nom))
    if isinstance(e, Test):
        return Test(rename(e.body, mapping))
    if isinstance(e, Union):
        return Union(rename(e.left, mapping), rename(e.right, mapping))
    if isinstance(e, Concat):
        return Concat(tuple(rename(s, mapping) for s in e.steps))
    raise TypeError(f"unexpected {e!r}")
