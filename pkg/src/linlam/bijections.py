"""Bijections between linear terms, rooted trivalent maps and their decompositions.

Everything is defined on terms; the map side is reached through ``term_to_map``
and ``map_to_term``.  Surgery that moves subterms across binders is done on
named trees (see ``terms.to_named``) so no index shifting is needed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .maps import CombinatorialMap, MapError, is_open_rooted_trivalent, map_statistics
from .terms import (HOLE, IDENTITY, Abs, App, Hole, Term, TermError, Var, classify_term,
                    count_parameter, free_labels, from_named, hole_count, hole_depth, is_context,
                    named_free, plug, to_named)


class BijectionError(ValueError):
    pass


# ---------------------------------------------------------------- diagrams

def _diagram(t: Term, affine: bool = False):
    """Build the syntactic diagram of ``t``.

    Returns (v, e, root, externals by label, bound-variable edge pairs).
    App and used Abs nodes are vertices with cycle (parent, left/body,
    right/variable); an unused binder of an affine term is a 2-valent vertex.
    """
    v: list[int] = []
    e: list[int] = []

    def new(k: int) -> list[int]:
        base = len(v)
        ids = list(range(base, base + k))
        for i, h in enumerate(ids):
            v.append(ids[(i + 1) % k])
            e.append(-1)
        return ids

    def pair(a: int, b: int) -> None:
        e[a], e[b] = b, a

    root = new(1)[0]
    free: dict[int, int] = {}
    bound_edges = []

    def build(s: Term, parent: int, env: list) -> None:
        if isinstance(s, Var):
            d = len(env)
            if s.index < d:
                slot = env[d - 1 - s.index]
                if slot is None or e[slot] != -1:
                    raise BijectionError("term is not linear")
                pair(parent, slot)
                bound_edges.append((min(parent, slot), max(parent, slot)))
            else:
                lab = s.index - d
                if lab in free:
                    raise BijectionError("term is not linear")
                x = new(1)[0]
                pair(parent, x)
                free[lab] = x
        elif isinstance(s, App):
            a0, a1, a2 = new(3)
            pair(parent, a0)
            build(s.left, a1, env)
            build(s.right, a2, env)
        elif isinstance(s, Abs):
            if affine and not _uses_top(s.body):
                a0, a1 = new(2)
                pair(parent, a0)
                build(s.body, a1, env + [None])
            else:
                a0, a1, a2 = new(3)
                pair(parent, a0)
                build(s.body, a1, env + [a2])
                if e[a2] == -1:
                    raise BijectionError("term is not linear")
        else:
            raise BijectionError("cannot draw a hole")

    build(t, root, [])
    ext = [free[lab] for lab in sorted(free)]
    return v, e, root, ext, bound_edges


def _uses_top(body: Term, depth: int = 0) -> bool:
    if isinstance(body, Var):
        return body.index == depth
    if isinstance(body, App):
        return _uses_top(body.left, depth) or _uses_top(body.right, depth)
    if isinstance(body, Abs):
        return _uses_top(body.body, depth + 1)
    return False


def term_to_map(t: Term) -> CombinatorialMap:
    """The open rooted trivalent map of a linear term.

    The free variable with the i-th smallest label becomes external vertex i.
    """
    if not classify_term(t).is_linear:
        raise BijectionError("term_to_map needs a linear term")
    v, e, root, ext, _ = _diagram(t)
    return CombinatorialMap(v, e, root, ext)


def bound_variable_edges(t: Term) -> list[tuple[int, int]]:
    """Edges of term_to_map(t) that come from bound variables."""
    if not classify_term(t).is_linear:
        raise BijectionError("needs a linear term")
    return sorted(_diagram(t)[4])


def term_spanning_tree(t: Term) -> frozenset[tuple[int, int]]:
    """Edges of term_to_map(t) other than those of bound variables."""
    m = term_to_map(t)
    drop = set(bound_variable_edges(t))
    return frozenset(p for p in m.edge_pairs() if p not in drop)


def affine_term_to_map(t: Term) -> CombinatorialMap:
    """Diagram of an affine term; unused binders become 2-valent vertices."""
    if not classify_term(t).is_affine:
        raise BijectionError("needs an affine term")
    v, e, root, ext, _ = _diagram(t, affine=True)
    return CombinatorialMap(v, e, root, ext)


# ---------------------------------------------------------------- decoding

DECOMPOSITION_CASES = ("var_case", "app_case", "abs_case")


def _region_reaches(m, start: int, target: int, blocked: set, leaves) -> bool:
    """Does the part of m reachable from half-edge ``start`` reach ``target``?"""
    seen = set()
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x == target:
            return True
        if x in seen or x in blocked or x in leaves:
            continue
        for y in _vertex_of(m, x):
            seen.add(y)
            if m.e[y] not in seen:
                queue.append(m.e[y])
    return False


def _vertex_of(m, h: int) -> list[int]:
    out = [h]
    x = m.v[h]
    while x != h:
        out.append(x)
        x = m.v[x]
    return out


def decomposition_case(m: CombinatorialMap) -> str:
    """Which of the three root-neighbourhood cases an open rooted trivalent map is in."""
    if not is_open_rooted_trivalent(m):
        raise BijectionError("not an open rooted trivalent map")
    h = m.e[m.root]
    if m.v[h] == h:
        return "var_case"
    h1 = m.v[h]
    h2 = m.v[h1]
    blocked = {m.root, h, h1, h2}
    return "abs_case" if _region_reaches(m, m.e[h1], h2, blocked, set()) else "app_case"


def map_to_term(m: CombinatorialMap) -> Term:
    """Decode an open rooted trivalent map by repeated root decomposition.

    External vertex i becomes free label i.  Deleting the root's neighbour
    either disconnects the rest (an application whose left part hangs off
    the v-successor edge) or not (an abstraction whose body hangs off the
    v-successor edge and whose variable is the remaining half-edge).
    """
    if not is_open_rooted_trivalent(m):
        raise BijectionError("not an open rooted trivalent map")
    env: dict[int, tuple[str, int]] = {x: ("f", i) for i, x in enumerate(m.external)}
    dead: set[int] = {m.root}
    used = [0]

    def decode(h: int, depth: int) -> Term:
        if h in env:
            kind, val = env.pop(h)
            used[0] += 1
            return Var(depth - 1 - val) if kind == "b" else Var(depth + val)
        if m.v[h] == h or h in dead:
            raise BijectionError("map does not decode to a linear term")
        h1 = m.v[h]
        h2 = m.v[h1]
        dead.update((h, h1, h2))
        used[0] += 1
        if _region_reaches(m, m.e[h1], h2, dead, env.keys()):
            env[h2] = ("b", depth)
            return Abs(decode(m.e[h1], depth + 1))
        return App(decode(m.e[h1], depth), decode(m.e[h2], depth))

    t = decode(m.e[m.root], 0)
    if used[0] != m.edge_count or env:
        raise BijectionError("map does not decode to a linear term")
    return t


# ---------------------------------------------------------------- named helpers

def _nplug(ctx, sub):
    tag = ctx[0]
    if tag == "hole":
        return sub
    if tag == "abs":
        return ("abs", ctx[1], _nplug(ctx[2], sub))
    if tag == "app":
        if _nhas_hole(ctx[1]):
            return ("app", _nplug(ctx[1], sub), ctx[2])
        return ("app", ctx[1], _nplug(ctx[2], sub))
    raise TermError("context has no hole")


def _nhas_hole(nt) -> bool:
    tag = nt[0]
    if tag == "hole":
        return True
    if tag == "app":
        return _nhas_hole(nt[1]) or _nhas_hole(nt[2])
    if tag == "abs":
        return _nhas_hole(nt[2])
    return False


def _nreplace_var(nt, name):
    """Replace the occurrence of variable ``name`` by a hole."""
    tag = nt[0]
    if tag == "var":
        return ("hole",) if nt[1] == name else nt
    if tag == "app":
        return ("app", _nreplace_var(nt[1], name), _nreplace_var(nt[2], name))
    if tag == "abs":
        return ("abs", nt[1], _nreplace_var(nt[2], name))
    return nt


def _npath(ctx) -> list:
    """Subtrees on the path from the root of ``ctx`` down to its hole, hole last."""
    out = [ctx]
    s = ctx
    while s[0] != "hole":
        if s[0] == "abs":
            s = s[2]
        elif _nhas_hole(s[1]):
            s = s[1]
        else:
            s = s[2]
        out.append(s)
    return out


def _nsplit(ctx, index: int):
    """Split ``ctx`` at the path position ``index``: ctx = upper o lower."""
    if index == 0:
        return ("hole",), ctx
    tag = ctx[0]
    if tag == "abs":
        up, low = _nsplit(ctx[2], index - 1)
        return ("abs", ctx[1], up), low
    if _nhas_hole(ctx[1]):
        up, low = _nsplit(ctx[1], index - 1)
        return ("app", up, ctx[2]), low
    up, low = _nsplit(ctx[2], index - 1)
    return ("app", ctx[1], up), low


def _nhole_env(ctx) -> tuple:
    names = []
    for s in _npath(ctx)[:-1]:
        if s[0] == "abs":
            names.append(s[1])
    return tuple(names)


def _nmax_sub(nt, y):
    """Maximal subtree whose only free name is ``y``, following the constructive proof."""
    path = []
    s = nt
    while named_free(s) != {y}:
        if s[0] == "abs":
            path.append(("abs", s[1]))
            s = s[2]
        elif s[0] == "app":
            if y in named_free(s[1]):
                path.append(("L", s[2]))
                s = s[1]
            else:
                path.append(("R", s[1]))
                s = s[2]
        else:
            raise AssertionError("no subterm has exactly the requested free variable")
    ctx = ("hole",)
    for kind, other in reversed(path):
        if kind == "abs":
            ctx = ("abs", other, ctx)
        elif kind == "L":
            ctx = ("app", ctx, other)
        else:
            ctx = ("app", other, ctx)
    return ctx, s


def _closed_proper_named(nt) -> list:
    out = []

    def walk(s, top):
        if not top and s[0] != "hole" and not named_free(s) and not _nhas_hole(s):
            out.append(s)
        if s[0] == "app":
            walk(s[1], False)
            walk(s[2], False)
        elif s[0] == "abs":
            walk(s[2], False)

    walk(nt, True)
    return out


# ---------------------------------------------------------------- slide

def _is_linear_closed(t: Term) -> bool:
    c = classify_term(t)
    return c.is_linear and c.is_closed and hole_count(t) == 0


def slide(t: Term, direction: str) -> Term:
    """Bijection between bridgeless closed terms other than λx.x and closed terms with one bridge."""
    if direction == "forward":
        if not _is_linear_closed(t) or count_parameter(t, "closed_proper_subterms") != 0:
            raise BijectionError("forward slide needs a closed bridgeless term")
        if t == IDENTITY:
            raise BijectionError("λx.x is outside the domain of the slide")
        counter = [0]
        nt = to_named(t, counter=counter)
        _, x, inner = nt
        if inner[0] != "abs":  # pragma: no cover - excluded by bridgelessness
            raise AssertionError("bridgeless term without a second abstraction")
        _, y, t0 = inner
        ctx, u = _nmax_sub(t0, y)
        return from_named(("abs", x, _nplug(ctx, ("abs", y, u))))
    if direction == "backward":
        if not _is_linear_closed(t) or count_parameter(t, "closed_proper_subterms") != 1:
            raise BijectionError("backward slide needs a closed term with exactly one closed proper subterm")
        nt = to_named(t)
        if nt[0] != "abs":  # pragma: no cover - an application has two closed parts
            raise AssertionError("one-bridge term is not an abstraction")
        _, x, body = nt
        (s,) = _closed_proper_named(nt)
        path_ctx = _replace_subtree(body, s)
        _, y, u = s
        return from_named(("abs", x, ("abs", y, _nplug(path_ctx, u))))
    raise BijectionError(f"unknown direction {direction!r}")


def _replace_subtree(nt, target):
    """Replace the (unique) subtree identical to ``target`` by a hole."""
    if nt is target or nt == target:
        return ("hole",)
    tag = nt[0]
    if tag == "app":
        if _contains(nt[1], target):
            return ("app", _replace_subtree(nt[1], target), nt[2])
        return ("app", nt[1], _replace_subtree(nt[2], target))
    if tag == "abs":
        return ("abs", nt[1], _replace_subtree(nt[2], target))
    raise AssertionError("subtree not found")


def _contains(nt, target) -> bool:
    if nt == target:
        return True
    if nt[0] == "app":
        return _contains(nt[1], target) or _contains(nt[2], target)
    if nt[0] == "abs":
        return _contains(nt[2], target)
    return False


# ---------------------------------------------------------------- contexts

def _context_as_term(c: Term) -> Term:
    """c[y] for a fresh free variable y placed after any free variables of c."""
    if not is_context(c):
        raise BijectionError("not a one-hole context")
    labels = free_labels(plug(c, Abs(Var(0))))
    k = max(labels) + 1 if labels else 0
    return plug(c, Var(hole_depth(c) + k))


def is_simple_closed_context(c: Term) -> bool:
    if not is_context(c):
        return False
    cls = classify_term(_context_as_term(c))
    return cls.is_linear and cls.arity == 1


def _require_simple_closed(c: Term) -> None:
    if not is_simple_closed_context(c):
        raise BijectionError("expected a simple closed one-hole context")


def is_in_Q(c: Term) -> bool:
    """Non-trivial simple closed context whose proper right subcontexts are Hole or open."""
    _require_simple_closed(c)
    if isinstance(c, Hole):
        return False
    path = _npath(to_named(c))
    return all(named_free(s) for s in path[1:-1])


def is_in_Q_by_map(c: Term) -> bool:
    """Map-side criterion: no internal bridge on the tree path from the root to the box."""
    _require_simple_closed(c)
    if isinstance(c, Hole):
        return False
    t = _context_as_term(c)
    m = term_to_map(t)
    box = m.external[0]
    tree = term_spanning_tree(t)
    vid = {}
    for i, cyc in enumerate(m.vertex_cycles()):
        for h in cyc:
            vid[h] = i
    adj: dict[int, list] = {}
    for a, b in tree:
        adj.setdefault(vid[a], []).append((vid[b], (a, b)))
        adj.setdefault(vid[b], []).append((vid[a], (a, b)))
    prev = {vid[m.root]: None}
    queue = deque([vid[m.root]])
    while queue:
        x = queue.popleft()
        for y, edge in adj.get(x, ()):
            if y not in prev:
                prev[y] = (x, edge)
                queue.append(y)
    path_edges = []
    x = vid[box]
    while prev[x] is not None:
        x, edge = prev[x]
        path_edges.append(edge)
    from .maps import bridges
    internal = {p for p in bridges(m) if m.degree(p[0]) == 3 and m.degree(p[1]) == 3}
    return not any(p in internal for p in path_edges)


def closed_right_subcontext_positions(c: Term) -> list[int]:
    """Path positions of closed proper non-Hole right subcontexts, outermost first."""
    path = _npath(to_named(c))
    return [i for i in range(1, len(path) - 1) if not named_free(path[i])]


def factor_context(c, direction: str = "factor"):
    """K = SEQ>=1(Q): factor a context as q1 o ... o qi, or multiply such a list back."""
    if direction == "multiply":
        factors = list(c)
        if not factors:
            raise BijectionError("need at least one factor")
        out = HOLE
        for q in reversed(factors):
            if not is_in_Q(q):
                raise BijectionError("factor is not in Q")
            out = plug(q, out)
        return out
    if direction != "factor":
        raise BijectionError(f"unknown direction {direction!r}")
    _require_simple_closed(c)
    if isinstance(c, Hole):
        raise BijectionError("the trivial context has no factorization")
    nc = to_named(c)
    cuts = closed_right_subcontext_positions(c)
    factors = []
    rest = nc
    offset = 0
    for pos in cuts:
        upper, rest = _nsplit(rest, pos - offset)
        offset = pos
        factors.append(from_named(upper))
    factors.append(from_named(rest))
    for q in factors:
        if not is_in_Q(q):  # pragma: no cover - guaranteed by maximality
            raise AssertionError("factor outside Q")
    return factors


# ---------------------------------------------------------------- psi

Z2 = "Z2"


def psi(l, direction: str = "decompose"):
    """L^λ = Z²·Q + Q·L^λ for closed non-identity abstraction terms."""
    if direction == "decompose":
        if not _is_linear_closed(l) or not isinstance(l, Abs):
            raise BijectionError("psi needs a closed linear abstraction")
        if l == IDENTITY:
            raise BijectionError("λx.x is outside the domain of psi")
        counter = [0]
        _, x, body = to_named(l, counter=counter)
        ctx = _nreplace_var(body, x)
        path = _npath(ctx)
        cuts = [i for i in range(1, len(path) - 1) if not named_free(path[i])]
        if not cuts:
            return (Z2, from_named(ctx))
        upper, lower = _nsplit(ctx, cuts[0])
        x2 = ("psi", counter[0])
        return (from_named(upper), from_named(("abs", x2, _nplug(lower, ("var", x2)))))
    if direction == "rebuild":
        first, second = l
        counter = [0]
        if first == Z2:
            if not is_in_Q(second):
                raise BijectionError("expected a Q-context")
            xn = ("psi", "x")
            return from_named(("abs", xn, _nplug(to_named(second, counter=counter), ("var", xn))))
        if not is_in_Q(first):
            raise BijectionError("expected a Q-context")
        if not _is_linear_closed(second) or not isinstance(second, Abs) or second == IDENTITY:
            raise BijectionError("expected a closed non-identity abstraction")
        c1 = to_named(first, counter=counter)
        _, x, inner = to_named(second, counter=counter)
        return from_named(("abs", x, _nplug(c1, inner)))
    raise BijectionError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------- B[1]

@dataclass(frozen=True)
class PointedTerm:
    """A term with a marked subterm occurrence: term = plug(context, subterm)."""
    context: Term
    subterm: Term

    @property
    def term(self) -> Term:
        return plug(self.context, self.subterm)


def is_B1(t: Term) -> bool:
    c = classify_term(t)
    return (hole_count(t) == 0 and c.is_linear and c.arity == 1
            and count_parameter(t, "closed_proper_subterms") == 0)


def decompose_B1(t, direction: str = "decompose"):
    """Split a B[1] term into (side, t_m, pointed c'_m[u]) or rebuild it.

    ``side`` is "left" when t_m is applied to u and "right" when u is applied
    to t_m.  Sizes satisfy |t| = 2 + |t_m| + |c'_m[u]|.
    """
    if direction == "decompose":
        if not is_B1(t):
            raise BijectionError("input is not a one-variable bridgeless term")
        if isinstance(t, Var):
            return ("var",)
        if not isinstance(t, Abs):  # pragma: no cover - an application would have a closed side
            raise AssertionError("B[1] term that is neither a variable nor an abstraction")
        X = ("b1", "x")
        _, y, body = to_named(t, free={0: X})
        ctx, tm = _nmax_sub(body, y)
        upper, lower = _nsplit(ctx, len(_npath(ctx)) - 2)
        if lower[0] != "app":  # pragma: no cover - forced by maximality
            raise AssertionError("maximal subterm is not an operand")
        side = "left" if lower[1] == ("hole",) else "right"
        u = lower[2] if side == "left" else lower[1]
        labels = {X: 0}
        tm_term = from_named(tm, labels={y: 0})
        pointed = PointedTerm(from_named(upper, labels=dict(labels)),
                              from_named(u, env=_nhole_env(upper), labels=dict(labels)))
        return (side, tm_term, pointed)
    if direction == "rebuild":
        if t == ("var",):
            return Var(0)
        side, tm, pointed = t
        if not (is_B1(tm) and is_B1(pointed.term)):
            raise BijectionError("components must be B[1] terms")
        counter = [0]
        X = ("b1", "x")
        Y = ("b1", "y")
        upper = to_named(pointed.context, counter=counter, free={0: X})
        u = to_named(pointed.subterm, env=_nhole_env(upper), counter=counter, free={0: X})
        tmn = to_named(tm, counter=counter, free={0: Y})
        inner = ("app", tmn, u) if side == "left" else ("app", u, tmn)
        return from_named(("abs", Y, _nplug(upper, inner)), labels={X: 0})
    raise BijectionError(f"unknown direction {direction!r}")


def term_map_statistics(t: Term):
    """Map statistics of term_to_map(t), for parameter-transport checks."""
    return map_statistics(term_to_map(t))
