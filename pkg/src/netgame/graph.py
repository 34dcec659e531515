"""Undirected player graphs with hop distances and edge-disjoint path pairs.

Nodes are dense integer ids ``0..N-1``; each carries a :class:`PlayerClass`.
Distances are hop counts. ``None`` is the "unreachable" sentinel everywhere;
no in-band large numbers are used.

Survivability uses *edge*-disjoint path pairs. For ``delta == 1`` the pair
minimizing ``d + d'`` is found with Suurballe's algorithm. For ``delta < 1``
the pair is the true shortest path plus the shortest path avoiding its edges,
falling back to the exact pair when that second leg does not exist.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

__all__ = [
    "PlayerClass",
    "Network",
    "PathPair",
    "shortest_distance",
    "all_distances_from",
    "min_disjoint_pair",
    "exact_min_pair_oracle",
    "shortest_cycle_through",
    "connected_component",
    "bridges",
    "two_edge_component",
]

ORACLE_MAX_NODES = 12


class PlayerClass(enum.Enum):
    MAJOR_A = "A"
    MINOR_B = "B"


Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Network:
    """Simple undirected graph over players ``0..N-1``.

    Query helpers never mutate; ``add_edge``/``remove_edge`` are the only
    writers. ``copy()`` is cheap enough to snapshot states in search loops.
    """

    __slots__ = ("classes", "adj")

    def __init__(self, classes: Sequence[PlayerClass], edges: Iterable[Edge] = ()):
        self.classes: tuple[PlayerClass, ...] = tuple(classes)
        self.adj: list[set[int]] = [set() for _ in self.classes]
        for u, v in edges:
            self.add_edge(u, v)

    @classmethod
    def from_counts(cls, n_a: int, n_b: int, edges: Iterable[Edge] = ()) -> "Network":
        """Majors get ids ``0..n_a-1``, minors follow."""
        classes = [PlayerClass.MAJOR_A] * n_a + [PlayerClass.MINOR_B] * n_b
        return cls(classes, edges)

    @property
    def n(self) -> int:
        return len(self.classes)

    def majors(self) -> list[int]:
        return [i for i, c in enumerate(self.classes) if c is PlayerClass.MAJOR_A]

    def minors(self) -> list[int]:
        return [i for i, c in enumerate(self.classes) if c is PlayerClass.MINOR_B]

    def is_major(self, i: int) -> bool:
        return self.classes[i] is PlayerClass.MAJOR_A

    def check_node(self, i: int) -> None:
        if not isinstance(i, int) or not 0 <= i < len(self.classes):
            raise ValueError(f"invalid node id {i!r} (network has {self.n} nodes)")

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def add_edge(self, u: int, v: int) -> None:
        self.check_node(u)
        self.check_node(v)
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        if v not in self.adj[u]:
            raise KeyError(f"edge ({u}, {v}) not present")
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def edges(self) -> list[Edge]:
        return sorted((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def copy(self) -> "Network":
        other = Network.__new__(Network)
        other.classes = self.classes
        other.adj = [set(a) for a in self.adj]
        return other

    def edge_key(self) -> frozenset[Edge]:
        return frozenset((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.classes == other.classes and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.classes, self.edge_key()))

    def __repr__(self) -> str:
        cls = "".join(c.value for c in self.classes)
        return f"Network({cls!r}, edges={self.edges()})"


@dataclass(frozen=True)
class PathPair:
    """Lengths of two edge-disjoint paths between the same endpoints."""

    d: int
    d_prime: int

    def __post_init__(self) -> None:
        if not 1 <= self.d <= self.d_prime:
            raise ValueError(f"invalid path pair ({self.d}, {self.d_prime})")

    @property
    def total(self) -> int:
        return self.d + self.d_prime

    def weighted(self, delta: Fraction | int) -> Fraction:
        return self.d + delta * self.d_prime


# ---------------------------------------------------------------------------
# breadth-first primitives
# ---------------------------------------------------------------------------


def _bfs(adj: Sequence[set[int]], source: int) -> list[int | None]:
    dist: list[int | None] = [None] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = du
                queue.append(v)
    return dist


def _bfs_avoiding(adj: Sequence[set[int]], source: int, target: int, banned: set[Edge]) -> int | None:
    """Hop distance from ``source`` to ``target`` without using ``banned`` edges."""
    if source == target:
        return 0
    seen = {source}
    frontier = [source]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v in seen or ((u, v) if u < v else (v, u)) in banned:
                    continue
                if v == target:
                    return depth
                seen.add(v)
                nxt.append(v)
        frontier = nxt
    return None


def _lex_tree(adj: Sequence[set[int]], source: int) -> tuple[list[int | None], list[int]]:
    """BFS distances plus parents of the lexicographically smallest shortest paths.

    Prefixes of lexicographically minimal shortest paths are themselves
    minimal, so these paths form a tree. Within each layer nodes are ranked by
    (rank of parent, id), which orders them exactly by their minimal path.
    """
    n = len(adj)
    dist: list[int | None] = [None] * n
    parent = [-1] * n
    rank = [0] * n
    dist[source] = 0
    layer = [source]
    depth = 0
    while layer:
        depth += 1
        found: dict[int, int] = {}
        for u in layer:  # layer is sorted by rank
            for v in adj[u]:
                if dist[v] is None and v not in found:
                    found[v] = u
        if not found:
            break
        for v, u in found.items():
            dist[v] = depth
            parent[v] = u
        layer = sorted(found, key=lambda v: (rank[parent[v]], v))
        for r, v in enumerate(layer):
            rank[v] = r
    return dist, parent


def _tree_path(parent: Sequence[int], source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def shortest_distance(net: Network, i: int, j: int) -> int | None:
    """Hop count of a shortest ``i``-``j`` path, or ``None`` if unreachable."""
    net.check_node(i)
    net.check_node(j)
    if i == j:
        return 0
    return _bfs(net.adj, i)[j]


def all_distances_from(net: Network, i: int) -> dict[int, int | None]:
    net.check_node(i)
    return dict(enumerate(_bfs(net.adj, i)))


def connected_component(net: Network, i: int) -> set[int]:
    net.check_node(i)
    return {v for v, d in enumerate(_bfs(net.adj, i)) if d is not None}


def lex_shortest_path(net: Network, i: int, j: int) -> list[int] | None:
    """Lexicographically smallest node sequence among shortest ``i``-``j`` paths."""
    net.check_node(i)
    net.check_node(j)
    dist, parent = _lex_tree(net.adj, i)
    if dist[j] is None:
        return None
    return _tree_path(parent, i, j)


# ---------------------------------------------------------------------------
# bridges / 2-edge-connectivity
# ---------------------------------------------------------------------------


def bridges(net: Network) -> set[Edge]:
    """All bridge edges, by iterative Tarjan low-link."""
    adj = net.adj
    n = len(adj)
    disc = [-1] * n
    low = [0] * n
    out: set[Edge] = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            u, pu, it = stack[-1]
            advanced = False
            for v in it:
                if v == pu:
                    continue
                if disc[v] == -1:
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, u, iter(adj[v])))
                    advanced = True
                    break
                low[u] = min(low[u], disc[v])
            if not advanced:
                stack.pop()
                if pu != -1:
                    low[pu] = min(low[pu], low[u])
                    if low[u] > disc[pu]:
                        out.add(norm_edge(u, pu))
    return out


def two_edge_component(net: Network, i: int, bridge_set: set[Edge] | None = None) -> set[int]:
    """Nodes sharing a 2-edge-connected component with ``i``.

    Exactly these nodes admit two edge-disjoint paths to ``i`` (Menger).
    """
    if bridge_set is None:
        bridge_set = bridges(net)
    seen = {i}
    stack = [i]
    adj = net.adj
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen and norm_edge(u, v) not in bridge_set:
                seen.add(v)
                stack.append(v)
    return seen


# ---------------------------------------------------------------------------
# Suurballe, specialized to unit weights
# ---------------------------------------------------------------------------


def _suurballe(adj, dist, parent, source, target, want_paths):
    """Second augmentation of Suurballe's algorithm on the reduced residual graph.

    ``dist``/``parent`` describe a shortest-path tree from ``source``. Reduced
    arc costs ``1 + dist[u] - dist[v]`` lie in {0, 1, 2}, so a bucket queue
    replaces the heap. Returns the total ``d + d'`` (and the two paths when
    ``want_paths``), or ``None`` when no edge-disjoint pair exists.
    """
    p1 = _tree_path(parent, source, target)
    nxt = {p1[k]: p1[k + 1] for k in range(len(p1) - 1)}
    n = len(adj)
    best = [None] * n
    prev = [-1] * n
    best[source] = 0
    buckets: list[list[int]] = [[source]]
    level = 0
    while level < len(buckets):
        bucket = buckets[level]
        while bucket:
            u = bucket.pop()
            if best[u] != level:
                continue
            if u == target:
                break
            du = dist[u]
            after = nxt.get(u)
            for v in adj[u]:
                if v == after:
                    continue  # forward arc of the first path is saturated
                if nxt.get(v) == u:
                    w = level
                else:
                    w = level + 1 + du - dist[v]
                bv = best[v]
                if bv is None or w < bv:
                    best[v] = w
                    prev[v] = u
                    while len(buckets) <= w:
                        buckets.append([])
                    buckets[w].append(v)
        else:
            level += 1
            continue
        break
    r = best[target]
    if r is None:
        return None
    total = 2 * dist[target] + r
    if not want_paths:
        return total
    p2 = [target]
    while p2[-1] != source:
        p2.append(prev[p2[-1]])
    p2.reverse()
    return total, _untangle(p1, p2, source, target)


def _untangle(p1: list[int], p2: list[int], source: int, target: int) -> tuple[list[int], list[int]]:
    """Merge two augmenting paths into two edge-disjoint source-target walks."""
    arcs1 = {(p1[k], p1[k + 1]) for k in range(len(p1) - 1)}
    arcs2 = [(p2[k], p2[k + 1]) for k in range(len(p2) - 1)]
    cancelled = {(b, a) for a, b in arcs2 if (b, a) in arcs1}
    out: dict[int, list[int]] = {}
    for a, b in itertools.chain(sorted(arcs1 - cancelled), (x for x in arcs2 if (x[1], x[0]) not in cancelled)):
        out.setdefault(a, []).append(b)
    for succ in out.values():
        succ.sort(reverse=True)
    paths = []
    for _ in range(2):
        walk = [source]
        while walk[-1] != target:
            walk.append(out[walk[-1]].pop())
        paths.append(walk)
    return paths[0], paths[1]


def _pair_from_paths(a: list[int], b: list[int]) -> PathPair:
    la, lb = len(a) - 1, len(b) - 1
    return PathPair(min(la, lb), max(la, lb))


def min_disjoint_pair(net: Network, i: int, j: int, delta: Fraction | float | int = 1) -> PathPair | None:
    """Edge-disjoint path pair between ``i`` and ``j`` used by the reliable cost.

    ``delta == 1``: the pair minimizing ``d + d'`` (exact).
    ``delta < 1``: ``d`` is the shortest distance and ``d'`` the shortest path
    avoiding the edges of the lexicographically smallest shortest path; if that
    leg does not exist the exact minimum-total pair is returned instead, so
    ``None`` always means that no edge-disjoint pair exists at all.
    """
    net.check_node(i)
    net.check_node(j)
    if i == j:
        raise ValueError("min_disjoint_pair needs distinct endpoints")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    dist, parent = _lex_tree(net.adj, i)
    if dist[j] is None:
        return None
    return _pair(net.adj, dist, parent, i, j, delta)


def _pair(adj, dist, parent, i, j, delta) -> PathPair | None:
    if delta < 1:
        p1 = _tree_path(parent, i, j)
        banned = {norm_edge(p1[k], p1[k + 1]) for k in range(len(p1) - 1)}
        second = _bfs_avoiding(adj, i, j, banned)
        if second is not None:
            return PathPair(dist[j], second)
    res = _suurballe(adj, dist, parent, i, j, want_paths=True)
    if res is None:
        return None
    _, (a, b) = res
    return _pair_from_paths(a, b)


def pair_costs_from(net: Network, i: int, delta, targets: Iterable[int]):
    """Yield ``(j, dist, weighted)`` for each target, as used by the reliable cost.

    ``dist`` is the hop distance (``None`` if unreachable); ``weighted`` is
    ``d + delta*d'`` of the pair, or ``None`` when no edge-disjoint pair
    exists. For ``delta == 1`` only the Suurballe total is computed. Targets
    outside ``i``'s 2-edge-connected component skip the pair search.
    """
    adj = net.adj
    dist, parent = _lex_tree(adj, i)
    if len(adj[i]) < 2:
        survivable: set[int] = {i}
    else:
        survivable = two_edge_component(net, i)
    exact = delta == 1
    for j in targets:
        dj = dist[j]
        if dj is None or j not in survivable:
            yield j, dj, None
        elif exact:
            yield j, dj, _suurballe(adj, dist, parent, i, j, want_paths=False)
        else:
            pair = _pair(adj, dist, parent, i, j, delta)
            yield j, dj, None if pair is None else pair.weighted(delta)


def shortest_cycle_through(net: Network, i: int, j: int) -> int | None:
    """Length of the shortest closed walk using two edge-disjoint ``i``-``j`` paths."""
    pair = min_disjoint_pair(net, i, j, 1)
    return None if pair is None else pair.total


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------


def _simple_paths(adj: Sequence[set[int]], source: int, target: int) -> Iterator[list[int]]:
    stack = [(source, [source], {source})]
    while stack:
        u, path, on_path = stack.pop()
        for v in adj[u]:
            if v == target:
                yield path + [v]
            elif v not in on_path:
                stack.append((v, path + [v], on_path | {v}))


def exact_min_pair_oracle(net: Network, i: int, j: int, delta: Fraction | float | int = 1) -> PathPair | None:
    """Exhaustive minimum of ``d + delta*d'`` over all edge-disjoint path pairs.

    Every simple path ``P`` is tried as one leg; its best partner is the
    shortest path avoiding ``P``'s edges (a longer partner can only cost more).
    Minimal pairs never need repeated nodes within a leg, so simple paths
    suffice. Exponential: restricted to small graphs.
    """
    if net.n > ORACLE_MAX_NODES:
        raise OverflowError(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {net.n}")
    net.check_node(i)
    net.check_node(j)
    if i == j:
        raise ValueError("oracle needs distinct endpoints")
    best: tuple | None = None
    for path in _simple_paths(net.adj, i, j):
        banned = {norm_edge(path[k], path[k + 1]) for k in range(len(path) - 1)}
        other = _bfs_avoiding(net.adj, i, j, banned)
        if other is None:
            continue
        d, dp = sorted((len(path) - 1, other))
        key = (d + delta * dp, d)
        if best is None or key < best[0]:
            best = (key, PathPair(d, dp))
    return None if best is None else best[1]
