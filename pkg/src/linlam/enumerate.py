"""Exhaustive generation and counting of the combinatorial classes.

Sizes: number of subterms for terms, context size (the hole counts zero) for
contexts, and number of edges for maps.  Exhaustive streams come out in the
order of ``terms.term_key``, which does not depend on the worker count.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from . import maps as M
from .bijections import (affine_term_to_map, is_B1, is_in_Q, term_to_map)
from .terms import (HOLE, Abs, App, Term, Var, classify_term, count_parameter, term_key,
                    PARAMETERS)

EXHAUSTIVE_BOUND = 12
SERIES_BOUND = 200
# labelled map brute force is far more expensive than term generation
MAP_BRUTE_FORCE_BOUND = 4


class EnumerationError(ValueError):
    pass


class UnknownClass(EnumerationError):
    pass


class BoundExceeded(EnumerationError):
    pass


CLASSES = ("linear_closed", "linear_open", "affine_closed", "bridgeless_closed",
           "bridgeless_open1", "one_bridge", "contexts_K", "contexts_Q", "maps_13_rooted",
           "maps_23_rooted", "maps_13_disconnected", "maps_23_disconnected")


@dataclass(frozen=True)
class ClassId:
    name: str
    arity: int | None = None

    @classmethod
    def parse(cls, text: str, arity: int | None = None) -> "ClassId":
        name = text.replace("-", "_")
        if ":" in name:
            name, k = name.split(":", 1)
            arity = int(k)
        if name not in CLASSES:
            raise UnknownClass(f"unknown class {text!r}")
        return cls(name, arity)


def _class_id(c, k=None) -> ClassId:
    if isinstance(c, ClassId):
        return c if k is None else ClassId(c.name, k)
    return ClassId.parse(c, k)


# ---------------------------------------------------------------- grammar counts

@lru_cache(maxsize=None)
def labelled_linear(n: int, m: int) -> int:
    """Linear terms of size n using each of m distinguishable variables exactly once."""
    if n <= 0 or m < 0 or m > n:
        return 0
    total = 1 if (n == 1 and m == 1) else 0
    for a in range(1, n - 1):
        b = n - 1 - a
        for m1 in range(0, m + 1):
            x = labelled_linear(a, m1)
            if x:
                total += math.comb(m, m1) * x * labelled_linear(b, m - m1)
    total += labelled_linear(n - 1, m + 1)
    return total


def linear_count(n: int, k: int) -> int:
    """Linear terms of size n with k free variables, up to exchange."""
    return labelled_linear(n, k) // math.factorial(k)


@lru_cache(maxsize=None)
def labelled_affine(n: int, m: int) -> int:
    """Affine terms of size n using each of m distinguishable variables exactly once."""
    if n <= 0 or m < 0 or m > n:
        return 0
    total = 1 if (n == 1 and m == 1) else 0
    for a in range(1, n - 1):
        b = n - 1 - a
        for m1 in range(0, m + 1):
            x = labelled_affine(a, m1)
            if x:
                total += math.comb(m, m1) * x * labelled_affine(b, m - m1)
    total += labelled_affine(n - 1, m + 1) + labelled_affine(n - 1, m)
    return total


# ---------------------------------------------------------------- generation

@lru_cache(maxsize=None)
def _gen(n: int, bound: tuple, k: int, depth: int, first: int, affine: bool) -> tuple:
    """Terms of size n using every binder level in ``bound`` once and k free leaves.

    Free leaves get labels first, first+1, ... from left to right.
    """
    feasible = labelled_affine if affine else labelled_linear
    if not feasible(n, len(bound) + k):
        return ()
    out: list[Term] = []
    if n == 1:
        if len(bound) == 1 and k == 0:
            out.append(Var(depth - 1 - bound[0]))
        elif not bound and k == 1:
            out.append(Var(depth + first))
        return tuple(out)
    for a in range(1, n - 1):
        out.extend(_gen_app(n, a, bound, k, depth, first, affine))
    out.extend(_gen_abs(n, bound, k, depth, first, affine))
    return tuple(out)


def _gen_app(n, a, bound, k, depth, first, affine):
    b = n - 1 - a
    feasible = labelled_affine if affine else labelled_linear
    for r in range(len(bound) + 1):
        for left_b in itertools.combinations(bound, r):
            right_b = tuple(x for x in bound if x not in left_b)
            for k1 in range(k + 1):
                if not feasible(a, r + k1) or not feasible(b, len(right_b) + k - k1):
                    continue
                lefts = _gen(a, left_b, k1, depth, first, affine)
                if not lefts:
                    continue
                rights = _gen(b, right_b, k - k1, depth, first + k1, affine)
                for x in lefts:
                    for y in rights:
                        yield App(x, y)


def _gen_abs(n, bound, k, depth, first, affine):
    for body in _gen(n - 1, bound + (depth,), k, depth + 1, first, affine):
        yield Abs(body)
    if affine:
        for body in _gen(n - 1, bound, k, depth + 1, first, affine):
            yield Abs(body)


def _partitions(n: int) -> list:
    return [("abs",)] + [("app", a) for a in range(1, n - 1)]


def _run_partition(args) -> list:
    n, k, affine, part = args
    if n == 1:
        return list(_gen(1, (), k, 0, 0, affine))
    if part[0] == "abs":
        return list(_gen_abs(n, (), k, 0, 0, affine))
    return list(_gen_app(n, part[1], (), k, 0, 0, affine))


def generate_terms(n: int, k: int = 0, affine: bool = False, workers: int = 1) -> list[Term]:
    """All canonical linear (or affine) terms of size n with k free variables, sorted."""
    if n < 1:
        return []
    parts = [(n, k, affine, p) for p in (_partitions(n) if n > 1 else [("var",)])]
    if workers > 1 and len(parts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_partition, parts))
    else:
        chunks = [_run_partition(p) for p in parts]
    out = [t for chunk in chunks for t in chunk]
    out.sort(key=term_key)
    return out


# ---------------------------------------------------------------- classes

def _check_bound(n: int, bound: int) -> None:
    if n > bound:
        raise BoundExceeded(f"size {n} exceeds the exhaustive bound {bound}")


def _linear_open_all(n: int, workers: int) -> list[Term]:
    out = []
    for k in range(0, n + 1):
        if linear_count(n, k):
            out.extend(generate_terms(n, k, workers=workers))
    out.sort(key=term_key)
    return out


def _contexts_K(n: int, workers: int) -> list[Term]:
    out = []
    for t in generate_terms(n + 1, 1, workers=workers):
        if isinstance(t, Var):
            continue
        out.append(_free_to_hole(t))
    out.sort(key=term_key)
    return out


def _free_to_hole(t: Term, depth: int = 0) -> Term:
    if isinstance(t, Var):
        return HOLE if t.index == depth else t
    if isinstance(t, App):
        return App(_free_to_hole(t.left, depth), _free_to_hole(t.right, depth))
    return Abs(_free_to_hole(t.body, depth + 1))


def enumerate_class(c, n: int, k: int | None = None, workers: int = 1,
                    bound: int = EXHAUSTIVE_BOUND) -> Iterator:
    """Stream the objects of class ``c`` and size ``n`` in canonical order."""
    cid = _class_id(c, k)
    _check_bound(n, bound)
    name = cid.name
    if name == "linear_closed":
        yield from generate_terms(n, 0, workers=workers)
    elif name == "linear_open":
        if cid.arity is None:
            yield from _linear_open_all(n, workers)
        else:
            yield from generate_terms(n, cid.arity, workers=workers)
    elif name == "affine_closed":
        yield from generate_terms(n, 0, affine=True, workers=workers)
    elif name == "bridgeless_closed":
        yield from (t for t in generate_terms(n, 0, workers=workers)
                    if count_parameter(t, "closed_proper_subterms") == 0)
    elif name == "one_bridge":
        yield from (t for t in generate_terms(n, 0, workers=workers)
                    if count_parameter(t, "closed_proper_subterms") == 1)
    elif name == "bridgeless_open1":
        yield from (t for t in generate_terms(n, 1, workers=workers) if is_B1(t))
    elif name == "contexts_K":
        yield from _contexts_K(n, workers)
    elif name == "contexts_Q":
        yield from (c for c in _contexts_K(n, workers) if is_in_Q(c))
    elif name == "maps_13_rooted":
        yield from _maps_13_rooted(n, cid.arity, workers)
    elif name == "maps_23_rooted":
        yield from _maps_23_rooted(n, cid.arity, workers)
    elif name in ("maps_13_disconnected", "maps_23_disconnected"):
        _check_bound(n, min(bound, MAP_BRUTE_FORCE_BOUND))
        degrees = {1, 3} if name == "maps_13_disconnected" else {2, 3}
        for v, e in labelled_maps(2 * n, degrees):
            m = M.DisconnectedMap(v, e)
            if cid.arity is None or _marked_vertices(m, name) == cid.arity:
                yield m
    else:  # pragma: no cover
        raise UnknownClass(name)


def _marked_vertices(m, name: str) -> int:
    d = 1 if "13" in name else 2
    return sum(1 for cyc in m.vertex_cycles() if len(cyc) == d)


def _maps_13_rooted(n: int, arity, workers: int):
    """Half-edge-rooted (1,3)-maps with n edges, through the rooting bijection."""
    terms = _linear_open_all(n + 2, workers) if arity is None else generate_terms(n + 2, arity, workers=workers)
    for t in terms:
        yield M.rooting_convert(term_to_map(t), "open_to_half_edge")


def _maps_23_rooted(n: int, arity, workers: int):
    """Half-edge-rooted (2,3)-maps with n edges.

    Closed affine terms of size n+2 whose outermost binder is used, drawn
    with unused binders as 2-valent vertices, lose their root and its
    neighbour exactly as in the (1,3) rooting; λx.x gives the empty map.
    """
    for t in generate_terms(n + 2, 0, affine=True, workers=workers):
        if isinstance(t, Abs) and not _binder_used(t):
            continue
        m = M.strip_root(affine_term_to_map(t))
        if arity is None or _marked_vertices(m, "23") == arity:
            yield m


def _binder_used(t: Abs) -> bool:
    return count_parameter(Abs(t.body), "unused_abstractions") == count_parameter(t.body, "unused_abstractions")


# ---------------------------------------------------------------- labelled brute force

def _perms_with_cycle_lengths(n: int, lengths: set) -> Iterator[list[int]]:
    """All permutations of 0..n-1 whose cycle lengths lie in ``lengths``."""
    p = [-1] * n

    def rec():
        try:
            first = p.index(-1)
        except ValueError:
            yield list(p)
            return
        rest = [i for i in range(first + 1, n) if p[i] == -1]
        for L in sorted(lengths):
            if L - 1 > len(rest):
                continue
            for others in itertools.permutations(rest, L - 1):
                cyc = (first,) + others
                for i, h in enumerate(cyc):
                    p[h] = cyc[(i + 1) % L]
                yield from rec()
                for h in cyc:
                    p[h] = -1

    yield from rec()


def _matchings(n: int) -> Iterator[list[int]]:
    e = [-1] * n

    def rec():
        try:
            first = e.index(-1)
        except ValueError:
            yield list(e)
            return
        for j in range(first + 1, n):
            if e[j] == -1:
                e[first], e[j] = j, first
                yield from rec()
                e[first] = e[j] = -1

    yield from rec()


def labelled_maps(H: int, degrees: set, connected: bool = False) -> Iterator[tuple[list, list]]:
    """All (v, e) pairs on H labelled half-edges with vertex degrees in ``degrees``."""
    matchings = list(_matchings(H))
    for v in _perms_with_cycle_lengths(H, degrees):
        for e in matchings:
            if connected and not _transitive(v, e):
                continue
            yield v, e


def _transitive(v, e) -> bool:
    n = len(v)
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        h = stack.pop()
        for x in (v[h], e[h]):
            if x not in seen:
                seen.add(x)
                stack.append(x)
    return len(seen) == n


def rooted_maps_brute_force(H: int, degrees: set) -> set[bytes]:
    """Canonical forms of all half-edge-rooted connected maps, by labelled brute force."""
    out = set()
    for v, e in labelled_maps(H, degrees, connected=True):
        for r in range(H):
            out.add(M.canonical_form(M.CombinatorialMap(v, e, r)))
    return out


# ---------------------------------------------------------------- counting

def count_class(c, n: int, k: int | None = None, bound: int = SERIES_BOUND) -> int:
    """Exact class size at n, from the grammar counts or the series solvers."""
    from . import series as S
    cid = _class_id(c, k)
    _check_bound(n, bound)
    name = cid.name
    if n < 0:
        return 0
    if name == "linear_closed":
        return linear_count(n, 0) if n <= 40 else S.coefficient("T", n, 0)
    if name == "linear_open":
        if cid.arity is None:
            return sum(S.coefficient("T", n, j) for j in range(n + 1))
        return linear_count(n, cid.arity) if n <= 40 else S.coefficient("T", n, cid.arity)
    if name == "affine_closed":
        return sum(S.affine_coefficient(n, j) for j in range(n))
    if name == "bridgeless_closed":
        return S.coefficient("B", n)
    if name == "bridgeless_open1":
        return S.coefficient("b", n)
    if name == "one_bridge":
        return S.coefficient("Tsub", n, 1)
    if name == "contexts_K":
        return 0 if n < 1 else S.coefficient("T", n + 1, 1)
    if name == "contexts_Q":
        return S.coefficient("Q1", n)
    if name == "maps_13_rooted":
        if cid.arity is None:
            return sum(S.coefficient("T", n + 2, j) for j in range(n + 3))
        return S.coefficient("T", n + 2, cid.arity)
    if name == "maps_23_rooted":
        if cid.arity is None:
            return S.rooted_23_count(n)
        return S.rooted_23_count(n, cid.arity)
    if name == "maps_13_disconnected":
        return S.disconnected_count(2 * n, 3, cid.arity)
    if name == "maps_23_disconnected":
        return S.disconnected_count(2 * n, 2, cid.arity)
    raise UnknownClass(name)  # pragma: no cover


# ---------------------------------------------------------------- distributions

CLASS_PARAMETERS = {
    "linear_closed": ("identity_subterms", "closed_proper_subterms"),
    "linear_open": ("free_variables", "identity_subterms", "closed_proper_subterms"),
    "affine_closed": ("unused_abstractions",),
    "bridgeless_closed": ("identity_subterms",),
    "one_bridge": ("identity_subterms",),
    "maps_13_rooted": ("one_valent_vertices", "loops", "internal_bridges"),
    "maps_23_rooted": ("two_valent_vertices",),
}


def empirical_distribution(c, param: str, n: int, k: int | None = None, workers: int = 1):
    """Exact distribution of a parameter over class ``c`` at size n, by enumeration."""
    from .stats import DistributionTable
    cid = _class_id(c, k)
    if param not in CLASS_PARAMETERS.get(cid.name, ()):
        raise EnumerationError(f"parameter {param!r} is not defined on {cid.name}")
    counts: Counter = Counter()
    for obj in enumerate_class(cid, n, workers=workers):
        if param in PARAMETERS:
            counts[count_parameter(obj, param)] += 1
        elif param == "one_valent_vertices":
            counts[_marked_vertices(obj, "13")] += 1
        elif param == "two_valent_vertices":
            counts[_marked_vertices(obj, "23")] += 1
        else:
            st = M.map_statistics(obj)
            counts[getattr(st, param)] += 1
    return DistributionTable(n, dict(counts))
