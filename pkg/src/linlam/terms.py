"""Linear and affine lambda terms in de Bruijn form, plus one-hole contexts.

A variable with index ``i`` under ``d`` enclosing binders refers to a binder
when ``i < d`` and to the free variable with label ``i - d`` otherwise.
Canonical terms number their free variables 0, 1, 2, ... in left-to-right
order of first occurrence, so structural equality is equality up to
alpha-conversion and exchange of free variables.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True, slots=True)
class Var:
    index: int


@dataclass(frozen=True, slots=True)
class App:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Abs:
    body: "Term"


@dataclass(frozen=True, slots=True)
class Hole:
    pass


Term = Union[Var, App, Abs, Hole]
HOLE = Hole()
IDENTITY = Abs(Var(0))


class TermError(ValueError):
    pass


class ParseError(TermError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class TermClass:
    is_linear: bool
    is_affine: bool
    is_closed: bool
    arity: int


# ---------------------------------------------------------------- basics

def term_size(t: Term) -> int:
    """Number of subterm occurrences; a hole has size zero."""
    if isinstance(t, Var):
        return 1
    if isinstance(t, App):
        return 1 + term_size(t.left) + term_size(t.right)
    if isinstance(t, Abs):
        return 1 + term_size(t.body)
    return 0


def hole_count(t: Term) -> int:
    if isinstance(t, Hole):
        return 1
    if isinstance(t, App):
        return hole_count(t.left) + hole_count(t.right)
    if isinstance(t, Abs):
        return hole_count(t.body)
    return 0


def is_context(t: Term) -> bool:
    return hole_count(t) == 1


def term_key(t: Term) -> tuple:
    """Preorder encoding used as the deterministic total order."""
    out: list[int] = []
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out += (0, s.index)
        elif isinstance(s, App):
            out.append(1)
            stack.append(s.right)
            stack.append(s.left)
        elif isinstance(s, Abs):
            out.append(2)
            stack.append(s.body)
        else:
            out.append(3)
    return (term_size(t), tuple(out))


def _scan(t: Term):
    """Return (binder use counts, free label use counts, free labels in order)."""
    binder_uses: list[int] = []
    free_uses: dict[int, int] = {}
    order: list[int] = []

    def walk(s: Term, env: list[int]) -> None:
        if isinstance(s, Var):
            d = len(env)
            if s.index < d:
                binder_uses[env[d - 1 - s.index]] += 1
            else:
                lab = s.index - d
                if lab not in free_uses:
                    free_uses[lab] = 0
                    order.append(lab)
                free_uses[lab] += 1
        elif isinstance(s, App):
            walk(s.left, env)
            walk(s.right, env)
        elif isinstance(s, Abs):
            binder_uses.append(0)
            env.append(len(binder_uses) - 1)
            walk(s.body, env)
            env.pop()

    walk(t, [])
    return binder_uses, free_uses, order


def classify_term(t: Term) -> TermClass:
    binder_uses, free_uses, _ = _scan(t)
    affine = all(c <= 1 for c in binder_uses) and all(c == 1 for c in free_uses.values())
    linear = affine and all(c == 1 for c in binder_uses)
    return TermClass(linear, affine, not free_uses, len(free_uses))


def arity(t: Term) -> int:
    return len(_scan(t)[1])


def free_labels(t: Term) -> list[int]:
    """Free labels in left-to-right order of first occurrence."""
    return _scan(t)[2]


def _relabel(t: Term, mapping: dict[int, int], depth: int = 0) -> Term:
    if isinstance(t, Var):
        if t.index < depth:
            return t
        return Var(depth + mapping[t.index - depth])
    if isinstance(t, App):
        return App(_relabel(t.left, mapping, depth), _relabel(t.right, mapping, depth))
    if isinstance(t, Abs):
        return Abs(_relabel(t.body, mapping, depth + 1))
    return t


def canonicalize(t: Term) -> Term:
    """Renumber free labels by first occurrence."""
    order = free_labels(t)
    return _relabel(t, {lab: i for i, lab in enumerate(order)})


def is_canonical(t: Term) -> bool:
    return free_labels(t) == list(range(arity(t)))


# ---------------------------------------------------------------- contexts

def plug(c: Term, u: Term) -> Term:
    """Replace the hole of ``c`` by ``u``.

    Indices of ``u`` are read in the environment of the hole, so a free
    index ``j`` of ``u`` below hole depth ``d`` refers to the ``j``-th binder
    above the hole and ``j - d`` names a free variable of the result.
    """
    if isinstance(c, Hole):
        return u
    if isinstance(c, App):
        if hole_count(c.left):
            return App(plug(c.left, u), c.right)
        if hole_count(c.right):
            return App(c.left, plug(c.right, u))
        raise TermError("context has no hole")
    if isinstance(c, Abs):
        return Abs(plug(c.body, u))
    raise TermError("context has no hole")


def context_compose(c1: Term, c2: Term) -> Term:
    """The context ``c1 o c2``, whose holed plug is ``c1[c2[-]]``."""
    if not (is_context(c1) and is_context(c2)):
        raise TermError("both arguments must be one-hole contexts")
    return plug(c1, c2)


def hole_depth(c: Term) -> int:
    d = 0
    while not isinstance(c, Hole):
        if isinstance(c, Abs):
            d += 1
            c = c.body
        elif isinstance(c, App):
            c = c.left if hole_count(c.left) else c.right
        else:
            raise TermError("context has no hole")
    return d


def subterm_occurrences(t: Term) -> list[tuple[Term, Term]]:
    """All factorizations t = c[u], in preorder of the occurrence of u."""
    out: list[tuple[Term, Term]] = []

    def walk(s: Term, wrap) -> None:
        out.append((wrap(HOLE), s))
        if isinstance(s, App):
            walk(s.left, lambda c, s=s, w=wrap: w(App(c, s.right)))
            walk(s.right, lambda c, s=s, w=wrap: w(App(s.left, c)))
        elif isinstance(s, Abs):
            walk(s.body, lambda c, w=wrap: w(Abs(c)))

    walk(t, lambda c: c)
    return out


def _walk_subterms(t: Term, depth: int = 0) -> Iterator[tuple[Term, int]]:
    stack = [(t, depth)]
    while stack:
        s, d = stack.pop()
        yield s, d
        if isinstance(s, App):
            stack.append((s.right, d))
            stack.append((s.left, d))
        elif isinstance(s, Abs):
            stack.append((s.body, d + 1))


def free_refs(u: Term, depth: int) -> set[tuple[str, int]]:
    """Variables referenced by ``u`` from outside, for ``u`` at binder depth ``depth``.

    ('b', level) is the binder at that level counted from the top of the
    enclosing term, ('f', label) a free variable of the enclosing term.
    """
    refs: set[tuple[str, int]] = set()
    for s, dl in _walk_subterms(u):
        if isinstance(s, Var) and s.index >= dl:
            j = s.index - dl
            refs.add(("b", depth - 1 - j) if j < depth else ("f", j - depth))
    return refs


def local_arity(u: Term) -> int:
    """Number of distinct variables that ``u`` references but does not bind."""
    return len(free_refs(u, 0))


def is_closed(u: Term) -> bool:
    for s, dl in _walk_subterms(u):
        if isinstance(s, Var) and s.index >= dl:
            return False
    return True


# ---------------------------------------------------------------- parameters

PARAMETERS = ("identity_subterms", "closed_proper_subterms", "free_variables", "unused_abstractions")


def count_parameter(t: Term, which: str) -> int:
    cls = classify_term(t)
    if which in ("identity_subterms", "closed_proper_subterms"):
        if not cls.is_linear:
            raise TermError(f"{which} is defined on linear terms")
    elif which == "unused_abstractions":
        if not cls.is_affine:
            raise TermError("unused_abstractions is defined on affine terms")
    elif which != "free_variables":
        raise TermError(f"unknown parameter {which!r}")

    if which == "free_variables":
        return cls.arity
    if which == "identity_subterms":
        return sum(1 for s, _ in _walk_subterms(t) if s == IDENTITY)
    if which == "closed_proper_subterms":
        return sum(1 for s, _ in _walk_subterms(t) if is_closed(s)) - (1 if is_closed(t) else 0)
    return sum(1 for s, _ in _walk_subterms(t) if isinstance(s, Abs) and _binder_unused(s.body))


def _binder_unused(body: Term) -> bool:
    return all(not (isinstance(s, Var) and s.index == dl) for s, dl in _walk_subterms(body))


def maximal_subterm_with_variable(t: Term, y: int) -> tuple[Term, Term]:
    """The largest subterm whose only free variable is ``y``, with its context.

    Follows the constructive argument: descend towards the occurrence of
    ``y`` until the current subterm references nothing else.
    """
    if not classify_term(t).is_linear:
        raise TermError("term must be linear")
    target = {("f", y)}
    if ("f", y) not in free_refs(t, 0):
        raise TermError(f"free label {y} does not occur")
    wraps = []
    s, d = t, 0
    while free_refs(s, d) != target:
        if isinstance(s, Abs):
            wraps.append(("abs", None))
            s, d = s.body, d + 1
        elif isinstance(s, App):
            if ("f", y) in free_refs(s.left, d):
                wraps.append(("left", s.right))
                s = s.left
            else:
                wraps.append(("right", s.left))
                s = s.right
        else:  # pragma: no cover - a variable is always its own maximal element
            raise AssertionError("descended past the variable")
    c: Term = HOLE
    for kind, other in reversed(wraps):
        if kind == "abs":
            c = Abs(c)
        elif kind == "left":
            c = App(c, other)
        else:
            c = App(other, c)
    return c, s


# ---------------------------------------------------------------- named form
# Named trees are used by the bijections, where subterms move between binder
# depths.  Nodes are tuples: ("var", name) ("app", l, r) ("abs", name, body)
# ("hole",).  Binder names are unique ints; free variables are ("f", label).

def to_named(t: Term, env: tuple = (), counter: list | None = None, free: dict | None = None):
    """Named tree of ``t``; ``env`` names the binders above ``t``, ``free`` maps labels to names."""
    counter = counter if counter is not None else [0]
    free = free or {}

    def go(s: Term, env: tuple):
        if isinstance(s, Var):
            d = len(env)
            if s.index < d:
                return ("var", env[d - 1 - s.index])
            lab = s.index - d
            return ("var", free.get(lab, ("f", lab)))
        if isinstance(s, App):
            return ("app", go(s.left, env), go(s.right, env))
        if isinstance(s, Abs):
            name = counter[0]
            counter[0] += 1
            return ("abs", name, go(s.body, env + (name,)))
        return ("hole",)

    return go(t, tuple(env))


def from_named(nt, env: tuple = (), labels: dict | None = None) -> Term:
    """Convert back to de Bruijn form; unknown free names get fresh labels in order."""
    labels = {} if labels is None else labels

    def go(s, env: tuple):
        tag = s[0]
        if tag == "var":
            name = s[1]
            if name in env:
                return Var(len(env) - 1 - max(i for i, n in enumerate(env) if n == name))
            if name not in labels:
                labels[name] = len(labels)
            return Var(len(env) + labels[name])
        if tag == "app":
            return App(go(s[1], env), go(s[2], env))
        if tag == "abs":
            return Abs(go(s[2], env + (s[1],)))
        return HOLE

    return go(nt, tuple(env))


def named_free(nt) -> set:
    """Free names of a named tree."""
    tag = nt[0]
    if tag == "var":
        return {nt[1]}
    if tag == "app":
        return named_free(nt[1]) | named_free(nt[2])
    if tag == "abs":
        return named_free(nt[2]) - {nt[1]}
    return set()


# ---------------------------------------------------------------- text

_TOKEN = re.compile(r"\s*(?:(?P<lam>\\|λ)|(?P<dot>\.)|(?P<lp>\()|(?P<rp>\))|(?P<hole>□|\[\])|(?P<id>[A-Za-z_][A-Za-z0-9_']*))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, allow_hole: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.allow_hole = allow_hole

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str):
        tok = self.toks[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def term(self):
        if self.peek()[0] == "lam":
            self.take("lam")
            names = [self.take("id")[1]]
            while self.peek()[0] == "id":
                names.append(self.take("id")[1])
            self.take("dot")
            body = self.term()
            for name in reversed(names):
                body = ("abs", name, body)
            return body
        node = self.atom()
        while self.peek()[0] in ("id", "lp", "hole", "lam"):
            arg = self.term() if self.peek()[0] == "lam" else self.atom()
            node = ("app", node, arg)
        return node

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "id":
            self.i += 1
            return ("var", val)
        if kind == "lp":
            self.i += 1
            node = self.term()
            self.take("rp")
            return node
        if kind == "hole":
            if not self.allow_hole:
                raise ParseError("hole not allowed in a term", pos)
            self.i += 1
            return ("hole",)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def parse(self):
        node = self.term()
        self.take("end")
        return node


def _named_text_to_term(node) -> Term:
    # binder names may shadow; resolve innermost first, free names by first occurrence
    labels: dict[str, int] = {}

    def go(s, env: tuple):
        tag = s[0]
        if tag == "var":
            name = s[1]
            for i in range(len(env) - 1, -1, -1):
                if env[i] == name:
                    return Var(len(env) - 1 - i)
            if name not in labels:
                labels[name] = len(labels)
            return Var(len(env) + labels[name])
        if tag == "app":
            return App(go(s[1], env), go(s[2], env))
        if tag == "abs":
            return Abs(go(s[2], env + (s[1],)))
        return HOLE

    return go(node, ())


def parse_term(text: str) -> Term:
    """Parse ``\\x.`` / ``λx.`` syntax; free names are numbered by first occurrence."""
    return _named_text_to_term(_Parser(text, False).parse())


def parse_context(text: str) -> Term:
    """Like parse_term, but exactly one hole (written ``□`` or ``[]``) is required."""
    t = _named_text_to_term(_Parser(text, True).parse())
    if hole_count(t) != 1:
        raise TermError("a context needs exactly one hole")
    return t


def binder_name(level: int) -> str:
    letter = chr(ord("a") + level % 26)
    return letter if level < 26 else f"{letter}_{level // 26}"


def format_term(t: Term) -> str:
    """Render with binders a, b, c, ... by depth and free variables x0, x1, ..."""

    def go(s: Term, depth: int) -> str:
        if isinstance(s, Var):
            if s.index < depth:
                return binder_name(depth - 1 - s.index)
            return f"x{s.index - depth}"
        if isinstance(s, Hole):
            return "□"
        if isinstance(s, Abs):
            return f"λ{binder_name(depth)}." + go(s.body, depth + 1)
        left = go(s.left, depth)
        if isinstance(s.left, Abs):
            left = f"({left})"
        right = go(s.right, depth)
        if isinstance(s.right, (App, Abs)):
            right = f"({right})"
        return f"{left} {right}"

    return go(t, 0)


# ---------------------------------------------------------------- JSON

def term_to_json(t: Term) -> dict:
    if isinstance(t, Var):
        return {"kind": "var", "index": t.index}
    if isinstance(t, App):
        return {"kind": "app", "left": term_to_json(t.left), "right": term_to_json(t.right)}
    if isinstance(t, Abs):
        return {"kind": "abs", "body": term_to_json(t.body)}
    return {"kind": "hole"}


def term_from_json(obj) -> Term:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "var":
        idx = obj["index"]
        if not isinstance(idx, int) or idx < 0:
            raise TermError("variable index must be a nonnegative integer")
        return Var(idx)
    if kind == "app":
        return App(term_from_json(obj["left"]), term_from_json(obj["right"]))
    if kind == "abs":
        return Abs(term_from_json(obj["body"]))
    if kind == "hole":
        return HOLE
    raise TermError(f"unknown node kind {kind!r}")
