"""Combinatorial maps as a vertex permutation ``v`` and an edge involution ``e``.

Half-edges are the integers 0..H-1.  A 1-valent vertex is identified with
its single half-edge, which is how roots and external vertices are named.
Cyclic order around a vertex is the v-successor order; every bijection in
the package reads orientation through this one convention.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Sequence


class MapError(ValueError):
    pass


def _check_perm(p: Sequence[int], name: str) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if sorted(p) != list(range(len(p))):
        raise MapError(f"{name} is not a permutation of 0..{len(p) - 1}")
    return p


def cycles(p: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(p)
    out = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cyc = []
        h = start
        while not seen[h]:
            seen[h] = True
            cyc.append(h)
            h = p[h]
        out.append(cyc)
    return out


def inverse(p: Sequence[int]) -> list[int]:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return inv


class PermutationMap:
    """Shared structure of connected and not-necessarily-connected maps."""

    __slots__ = ("v", "e", "root", "external")

    def __init__(self, v: Sequence[int], e: Sequence[int], root: int | None = None,
                 external: Iterable[int] = ()):
        v = _check_perm(v, "vertex permutation")
        e = _check_perm(e, "edge permutation")
        if len(v) != len(e):
            raise MapError("permutations have different lengths")
        if len(v) % 2:
            raise MapError("odd number of half-edges")
        for h, x in enumerate(e):
            if x == h:
                raise MapError(f"edge permutation fixes half-edge {h}")
            if e[x] != h:
                raise MapError("edge permutation is not an involution")
        external = tuple(int(x) for x in external)
        marked = ([root] if root is not None else []) + list(external)
        for h in marked:
            if not 0 <= h < len(v):
                raise MapError(f"half-edge {h} out of range")
        if root is None and external:
            raise MapError("external vertices need a root")
        for h in external:
            if v[h] != h:
                raise MapError(f"external vertex {h} is not 1-valent")
        if len(set(marked)) != len(marked):
            raise MapError("root and external vertices must be distinct")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "external", external)

    def __setattr__(self, key, value):
        raise AttributeError("maps are immutable")

    def __eq__(self, other):
        return (type(self) is type(other) and self.v == other.v and self.e == other.e
                and self.root == other.root and self.external == other.external)

    def __hash__(self):
        return hash((self.v, self.e, self.root, self.external))

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()})"

    @property
    def half_edges(self) -> int:
        return len(self.v)

    @property
    def edge_count(self) -> int:
        return len(self.v) // 2

    def vertex_cycles(self) -> list[list[int]]:
        return cycles(self.v)

    def edge_pairs(self) -> list[tuple[int, int]]:
        return [(h, x) for h, x in enumerate(self.e) if h < x]

    def face_perm(self) -> list[int]:
        """f = e^-1 v^-1, so that v e f is the identity."""
        vinv = inverse(self.v)
        return [self.e[vinv[h]] for h in range(len(self.v))]

    def components(self) -> list[list[int]]:
        n = len(self.v)
        comp = [-1] * n
        out = []
        for s in range(n):
            if comp[s] >= 0:
                continue
            comp[s] = len(out)
            part = [s]
            queue = deque([s])
            while queue:
                h = queue.popleft()
                for x in (self.v[h], self.e[h]):
                    if comp[x] < 0:
                        comp[x] = len(out)
                        part.append(x)
                        queue.append(x)
            out.append(sorted(part))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def degree(self, h: int) -> int:
        d, x = 1, self.v[h]
        while x != h:
            d += 1
            x = self.v[x]
        return d

    def to_json(self) -> dict:
        return {"half_edges": len(self.v), "vertex_cycles": self.vertex_cycles(),
                "edge_pairs": [list(p) for p in self.edge_pairs()],
                "root": self.root, "external": list(self.external)}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        H = obj["half_edges"]
        v = [-1] * H
        for cyc in obj["vertex_cycles"]:
            for i, h in enumerate(cyc):
                if not 0 <= h < H or v[h] != -1:
                    raise MapError("vertex cycles do not partition the half-edges")
                v[h] = cyc[(i + 1) % len(cyc)]
        e = [-1] * H
        for a, b in obj["edge_pairs"]:
            if not (0 <= a < H and 0 <= b < H) or e[a] != -1 or e[b] != -1:
                raise MapError("edge pairs do not partition the half-edges")
            e[a], e[b] = b, a
        if -1 in v or -1 in e:
            raise MapError("incomplete permutation data")
        return cls(v, e, obj.get("root"), obj.get("external", ()))


class CombinatorialMap(PermutationMap):
    """A connected map: ⟨v, e⟩ acts transitively on the half-edges."""

    __slots__ = ()

    def __init__(self, v, e, root=None, external=()):
        super().__init__(v, e, root, external)
        if not self.is_connected():
            raise MapError("map is not connected")


class DisconnectedMap(PermutationMap):
    """A not-necessarily-connected map."""

    __slots__ = ()


LOOP_MAP = CombinatorialMap([0, 2, 3, 1], [1, 0, 3, 2], root=0)
ONE_EDGE_MAP = CombinatorialMap([0, 1], [1, 0], root=0, external=[1])
EMPTY_MAP = CombinatorialMap([], [], root=None)


# ---------------------------------------------------------------- analysis

@dataclass(frozen=True)
class MapReport:
    valid: bool
    connected: bool
    half_edges: int
    degree_histogram: tuple[tuple[int, int], ...]
    classes: tuple[str, ...]
    problems: tuple[str, ...] = ()


@dataclass(frozen=True)
class MapStatistics:
    edge_count: int
    vertex_count: int
    face_count: int
    genus: int
    components: int
    loops: int | None = None
    internal_bridges: int | None = None
    degree_histogram: tuple[tuple[int, int], ...] = ()


def _histogram(m: PermutationMap) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(Counter(len(c) for c in m.vertex_cycles()).items()))


def is_open_rooted_trivalent(m: PermutationMap) -> bool:
    if m.root is None or not m.is_connected() or m.v[m.root] != m.root:
        return False
    special = {m.root, *m.external}
    for cyc in m.vertex_cycles():
        if len(cyc) == 1:
            if cyc[0] not in special:
                return False
        elif len(cyc) != 3:
            return False
    return True


def validate_map(m: PermutationMap) -> MapReport:
    """Check the structural invariants and report which classes ``m`` belongs to."""
    problems = []
    f = m.face_perm()
    if any(m.v[m.e[f[h]]] != h for h in range(m.half_edges)):
        problems.append("v e f is not the identity")
    hist = _histogram(m)
    degrees = {d for d, _ in hist}
    classes = []
    if degrees and degrees <= {3}:
        classes.append("trivalent")
    if degrees <= {1, 3}:
        classes.append("(1,3)")
    if degrees <= {2, 3}:
        classes.append("(2,3)")
    if is_open_rooted_trivalent(m):
        classes.append("open_rooted_trivalent")
    return MapReport(not problems, m.is_connected(), m.half_edges, hist, tuple(classes), tuple(problems))


def faces_and_genus(m: PermutationMap) -> MapStatistics:
    V = len(m.vertex_cycles())
    E = m.edge_count
    F = len(cycles(m.face_perm()))
    c = len(m.components())
    twice_g = 2 * c - V + E - F
    if twice_g < 0 or twice_g % 2:
        raise MapError("Euler characteristic is inconsistent")
    return MapStatistics(E, V, F, twice_g // 2, c, degree_histogram=_histogram(m))


def _vertex_ids(m: PermutationMap) -> list[int]:
    vid = [0] * m.half_edges
    for i, cyc in enumerate(m.vertex_cycles()):
        for h in cyc:
            vid[h] = i
    return vid


def bridges(m: PermutationMap) -> list[tuple[int, int]]:
    """Bridges of the underlying multigraph by lowlink search, as edge pairs."""
    vid = _vertex_ids(m)
    nv = max(vid) + 1 if vid else 0
    adj = [[] for _ in range(nv)]
    pairs = m.edge_pairs()
    for i, (a, b) in enumerate(pairs):
        adj[vid[a]].append((vid[b], i))
        adj[vid[b]].append((vid[a], i))
    disc = [-1] * nv
    low = [0] * nv
    out = []
    t = 0
    for s in range(nv):
        if disc[s] >= 0:
            continue
        disc[s] = low[s] = t
        t += 1
        stack = [(s, -1, iter(adj[s]))]
        while stack:
            x, via, it = stack[-1]
            advanced = False
            for y, i in it:
                if i == via:
                    continue
                if disc[y] < 0:
                    disc[y] = low[y] = t
                    t += 1
                    stack.append((y, i, iter(adj[y])))
                    advanced = True
                    break
                low[x] = min(low[x], disc[y])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[x])
                    if low[x] > disc[p]:
                        out.append(pairs[via])
    return sorted(out)


def bridges_by_deletion(m: PermutationMap) -> list[tuple[int, int]]:
    """Bridges found by deleting each edge and testing connectivity."""
    vid = _vertex_ids(m)
    pairs = m.edge_pairs()
    out = []
    for skip, (a, b) in enumerate(pairs):
        if vid[a] == vid[b]:
            continue
        adj: dict[int, list[int]] = {}
        for i, (x, y) in enumerate(pairs):
            if i != skip:
                adj.setdefault(vid[x], []).append(vid[y])
                adj.setdefault(vid[y], []).append(vid[x])
        seen = {vid[a]}
        queue = [vid[a]]
        while queue:
            x = queue.pop()
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if vid[b] not in seen:
            out.append((a, b))
    return sorted(out)


def map_statistics(m: PermutationMap) -> MapStatistics:
    base = faces_and_genus(m)
    vid = _vertex_ids(m)
    loops = sum(1 for a, b in m.edge_pairs() if vid[a] == vid[b])
    internal = sum(1 for a, b in bridges(m) if m.degree(a) == 3 and m.degree(b) == 3)
    return MapStatistics(base.edge_count, base.vertex_count, base.face_count, base.genus,
                         base.components, loops, internal, base.degree_histogram)


# ---------------------------------------------------------------- isomorphism

def _bfs_labels(m: PermutationMap, root: int) -> list[int]:
    order = [root]
    label = {root: 0}
    i = 0
    while i < len(order):
        h = order[i]
        i += 1
        for x in (m.v[h], m.e[h]):
            if x not in label:
                label[x] = len(order)
                order.append(x)
    return order


def relabel(m: PermutationMap, perm: Sequence[int]) -> PermutationMap:
    """Isomorphic copy in which half-edge h is renamed perm[h]."""
    n = m.half_edges
    v = [0] * n
    e = [0] * n
    for h in range(n):
        v[perm[h]] = perm[m.v[h]]
        e[perm[h]] = perm[m.e[h]]
    root = None if m.root is None else perm[m.root]
    return type(m)(v, e, root, [perm[x] for x in m.external])


def _encode(m: PermutationMap, root: int, with_root: bool) -> bytes:
    order = _bfs_labels(m, root)
    if len(order) != m.half_edges:
        raise MapError("canonical form needs a connected map")
    lab = {h: i for i, h in enumerate(order)}
    v = [lab[m.v[h]] for h in order]
    e = [lab[m.e[h]] for h in order]
    ext = sorted(lab[x] for x in m.external)
    return json.dumps({"v": v, "e": e, "root": 0 if with_root else None, "external": ext},
                      separators=(",", ":")).encode()


def canonical_form(m: PermutationMap) -> bytes:
    """Complete isomorphism invariant; external vertices are treated as unlabeled.

    Rooted maps are rigid, so a breadth-first relabeling from the root is
    canonical.  For an unrooted map the smallest encoding over all H root
    choices is returned, which costs O(H^2).
    """
    if m.half_edges == 0:
        return b'{"v":[],"e":[],"root":null,"external":[]}'
    if m.root is not None:
        return _encode(m, m.root, True)
    return min(_encode(m, r, False) for r in range(m.half_edges))


def canonical_relabel(m: PermutationMap) -> PermutationMap:
    """The rooted map relabeled in breadth-first order from its root."""
    if m.root is None or m.half_edges == 0:
        return m
    order = _bfs_labels(m, m.root)
    perm = [0] * m.half_edges
    for i, h in enumerate(order):
        perm[h] = i
    return relabel(m, perm)


# ---------------------------------------------------------------- rooting

def _compact(m_v, m_e, keep: list[int], root: int, cls=None) -> CombinatorialMap:
    lab = {h: i for i, h in enumerate(keep)}
    v = [lab[m_v[h]] for h in keep]
    e = [lab[m_e[h]] for h in keep]
    return canonical_relabel((cls or CombinatorialMap)(v, e, lab[root]))


def strip_root(m: PermutationMap) -> CombinatorialMap:
    """Delete the 1-valent root and its neighbour, joining the neighbour's two other edges.

    The new root is the far end of the v-successor edge of the neighbour.
    The loop map reduces to the empty map.
    """
    hr = m.root
    w0 = m.e[hr]
    if m.v[w0] == w0:
        raise MapError("the one-edge map has no root neighbourhood to remove")
    w1 = m.v[w0]
    w2 = m.v[w1]
    if m.v[w2] != w0:
        raise MapError("root neighbour is not 3-valent")
    if m.e[w1] == w2:
        if m.half_edges != 4:  # pragma: no cover - impossible for a connected map
            raise MapError("unexpected loop at the root neighbour")
        return EMPTY_MAP
    a, b = m.e[w1], m.e[w2]
    e = list(m.e)
    e[a], e[b] = b, a
    removed = {hr, w0, w1, w2}
    keep = [h for h in range(m.half_edges) if h not in removed]
    return _compact(m.v, e, keep, a)


def attach_root(m: PermutationMap) -> tuple[list[int], list[int], int]:
    """Subdivide the root edge of a half-edge-rooted map and hang a new root on it.

    Returns raw (v, e, root).  The new vertex w has cycle (w0 w1 w2) with w0
    towards the new root, w1 joined to the old root half-edge and w2 to its
    partner.  The empty map is sent to the loop map.
    """
    H = m.half_edges
    if H == 0:
        return list(LOOP_MAP.v), list(LOOP_MAP.e), 0
    h = m.root
    r0, w0, w1, w2 = H, H + 1, H + 2, H + 3
    v = list(m.v) + [r0, w1, w2, w0]
    e = list(m.e) + [w0, r0, h, m.e[h]]
    e[h] = w1
    e[m.e[h]] = w2
    return v, e, r0


def rooting_convert(m: PermutationMap, direction: str) -> CombinatorialMap:
    """Half-edge-rooted (1,3)-maps with n edges <-> open rooted trivalent maps with n+2 edges."""
    if direction == "half_edge_to_open":
        if m.root is None and m.half_edges:
            raise MapError("a half-edge root is required")
        if not m.is_connected() or not validate_map(m).classes or "(1,3)" not in validate_map(m).classes:
            raise MapError("input is not a connected (1,3)-map")
        v, e, r = attach_root(m)
        plain = CombinatorialMap(v, e, r)
        order = _bfs_labels(plain, r)
        ext = [h for h in order if h != r and plain.v[h] == h]
        return canonical_relabel(CombinatorialMap(v, e, r, ext))
    if direction == "open_to_half_edge":
        if not is_open_rooted_trivalent(m):
            raise MapError("input is not an open rooted trivalent map")
        if m.edge_count < 2:
            raise MapError("the one-edge map is below the size bound of the conversion")
        return strip_root(m)
    raise MapError(f"unknown direction {direction!r}")
