"""Topology metrics, motif census, and a configuration-model null.

Works on any :class:`~netgame.graph.Network`, whether loaded from an edge
list or produced by the dynamics engine.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import Network, PlayerClass, shortest_cycle_through

__all__ = [
    "EdgeFormat",
    "ClassRule",
    "LoadedNetwork",
    "ParseError",
    "load_edge_list",
    "parse_edge_list",
    "Snapshot",
    "CoreSpec",
    "coreness",
    "k_core",
    "CoreDistance",
    "node_core_distance",
    "subgraph_density",
    "disjoint_paths_to_core",
    "core_ratio",
    "mean_shortest_cycle",
    "count_double_star",
    "count_entangled_cycles",
    "Motif",
    "CMSample",
    "configuration_model",
    "MotifReport",
    "null_model_report",
    "snapshot_metrics",
    "write_metrics_csv",
]

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


class EdgeFormat:
    PLAIN = "plain"  # "a b" per line, '#' comments
    AS_REL = "asrel"  # "a|b|rel" per line, rel ignored


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class ClassRule:
    """Which nodes are major players: an explicit label list or the top-m by degree."""

    majors: tuple[str, ...] | None = None
    top_m: int | None = None

    def __post_init__(self) -> None:
        if (self.majors is None) == (self.top_m is None):
            raise ValueError("give exactly one of majors or top_m")
        if self.majors is not None:
            object.__setattr__(self, "majors", tuple(str(m) for m in self.majors))
        if self.top_m is not None and self.top_m < 0:
            raise ValueError("top_m must be non-negative")


@dataclass
class LoadedNetwork:
    net: Network
    labels: list[str]  # labels[i] is the source id of node i
    self_loops: int = 0
    duplicates: int = 0


def _label_key(label: str):
    return (0, int(label), "") if label.lstrip("-").isdigit() else (1, 0, label)


def parse_edge_list(lines: Iterable[str], fmt: str = EdgeFormat.PLAIN) -> tuple[list[tuple[str, str]], int, int]:
    """Undirected, deduplicated label pairs plus (self-loop, duplicate) counts."""
    seen: set[tuple[str, str]] = set()
    pairs: list[tuple[str, str]] = []
    loops = dups = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if fmt == EdgeFormat.PLAIN:
            parts = line.split("#", 1)[0].split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected two ids, got {raw.rstrip()!r}")
        elif fmt == EdgeFormat.AS_REL:
            parts = line.split("|")
            if len(parts) < 3 or not parts[0] or not parts[1]:
                raise ParseError(f"line {lineno}: expected 'a|b|rel', got {raw.rstrip()!r}")
            parts = parts[:2]
        else:
            raise ValueError(f"unknown edge list format {fmt!r}")
        a, b = (p.strip() for p in parts)
        if a == b:
            loops += 1
            continue
        key = (a, b) if _label_key(a) <= _label_key(b) else (b, a)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
        pairs.append(key)
    return pairs, loops, dups


def load_edge_list(path: str | Path, fmt: str = EdgeFormat.PLAIN, class_rule: ClassRule | None = None) -> LoadedNetwork:
    """Read an edge list into a network; node ids follow sorted source labels."""
    with open(path, encoding="utf-8") as fh:
        pairs, loops, dups = parse_edge_list(fh, fmt)
    if not pairs:
        raise ParseError(f"{path}: no edges")
    if loops:
        log.warning("%s: dropped %d self-loop(s)", path, loops)
    labels = sorted({x for p in pairs for x in p}, key=_label_key)
    index = {lab: i for i, lab in enumerate(labels)}
    degree = [0] * len(labels)
    for a, b in pairs:
        degree[index[a]] += 1
        degree[index[b]] += 1
    rule = class_rule or ClassRule(top_m=0)
    if rule.majors is not None:
        missing = set(rule.majors) - set(index)
        if missing:
            raise ValueError(f"major ids not in graph: {sorted(missing)}")
        major_ids = {index[m] for m in rule.majors}
    else:
        ranked = sorted(range(len(labels)), key=lambda i: (-degree[i], i))
        major_ids = set(ranked[: rule.top_m])
    classes = [PlayerClass.MAJOR_A if i in major_ids else PlayerClass.MINOR_B for i in range(len(labels))]
    net = Network(classes, ((index[a], index[b]) for a, b in pairs))
    return LoadedNetwork(net, labels, loops, dups)


@dataclass
class Snapshot:
    label: str
    net: Network
    rank: dict[int, float] | None = None

    def __post_init__(self) -> None:
        if self.rank is not None and set(self.rank) != set(range(self.net.n)):
            raise ValueError("rank must cover every node")


@dataclass(frozen=True)
class CoreSpec:
    """Core as a k-core level, an explicit node set, or the top-m ranked nodes."""

    k_level: int | None = None
    nodes: frozenset[int] | None = None
    top_ranked: int | None = None

    def __post_init__(self) -> None:
        given = sum(x is not None for x in (self.k_level, self.nodes, self.top_ranked))
        if given != 1:
            raise ValueError("give exactly one of k_level, nodes, top_ranked")
        if self.nodes is not None:
            object.__setattr__(self, "nodes", frozenset(self.nodes))

    def resolve(self, net: Network, rank: Mapping[int, float] | None = None) -> set[int]:
        if self.k_level is not None:
            core = k_core(net, self.k_level)
        elif self.nodes is not None:
            if any(not 0 <= v < net.n for v in self.nodes):
                raise ValueError("core nodes must belong to the network")
            core = set(self.nodes)
        else:
            if rank is None:
                raise ValueError("top_ranked core needs a rank map")
            core = set(sorted(rank, key=lambda v: (-rank[v], v))[: self.top_ranked])
        if not core:
            raise ValueError("core is empty")
        return core


# ---------------------------------------------------------------------------
# cores and distances
# ---------------------------------------------------------------------------


def coreness(net: Network) -> dict[int, int]:
    """k-core number of every node, by bucket peeling."""
    deg = [len(a) for a in net.adj]
    n = net.n
    max_deg = max(deg, default=0)
    buckets: list[set[int]] = [set() for _ in range(max_deg + 1)]
    for v, d in enumerate(deg):
        buckets[d].add(v)
    core = {}
    k = 0
    for _ in range(n):
        while not buckets[k]:
            k += 1
        v = buckets[k].pop()
        core[v] = k
        for w in net.adj[v]:
            if w not in core and deg[w] > k:
                buckets[deg[w]].remove(w)
                deg[w] -= 1
                buckets[deg[w]].add(w)
    return core


def k_core(net: Network, k: int) -> set[int]:
    if k < 1:
        raise ValueError("k must be at least 1")
    return {v for v, c in coreness(net).items() if c >= k}


def _multi_bfs(net: Network, sources: Iterable[int]) -> list[int | None]:
    dist: list[int | None] = [None] * net.n
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        u = queue.popleft()
        for w in net.adj[u]:
            if dist[w] is None:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


@dataclass
class CoreDistance:
    distances: dict[int, int | None]
    mean: float
    unreachable: int
    no_outside_nodes: bool = False


def node_core_distance(net: Network, core: CoreSpec | set[int], rank=None) -> CoreDistance:
    members = core.resolve(net, rank) if isinstance(core, CoreSpec) else set(core)
    if not members:
        raise ValueError("core is empty")
    dist = _multi_bfs(net, members)
    outside = [v for v in range(net.n) if v not in members]
    reached = [dist[v] for v in outside if dist[v] is not None]
    unreachable = len(outside) - len(reached)
    mean = sum(reached) / len(reached) if reached else 0.0
    return CoreDistance({v: dist[v] for v in range(net.n)}, mean, unreachable, not outside)


def subgraph_density(net: Network, nodes: Iterable[int]) -> float:
    nodes = set(nodes)
    if len(nodes) < 2:
        raise ValueError("density needs at least two nodes")
    inside = sum(1 for u in nodes for w in net.adj[u] if w in nodes) // 2
    return inside / (len(nodes) * (len(nodes) - 1) / 2)


def _unit_max_flow(net: Network, source: int, sinks: set[int]) -> int:
    """Edge-disjoint source-to-set paths: BFS augmentation on unit arcs."""
    sink = net.n  # virtual node fed by every core member
    residual: dict[tuple[int, int], int] = {}
    for u, v in net.edges():
        residual[(u, v)] = residual.get((u, v), 0) + 1
        residual[(v, u)] = residual.get((v, u), 0) + 1
    out: list[set[int]] = [set(a) for a in net.adj] + [set()]
    for c in sinks:
        residual[(c, sink)] = net.n  # effectively unbounded
        out[c].add(sink)
        out[sink].add(c)
        residual.setdefault((sink, c), 0)
    flow = 0
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for w in out[u]:
                if w not in parent and residual.get((u, w), 0) > 0:
                    parent[w] = u
                    queue.append(w)
        if sink not in parent:
            return flow
        w = sink
        while parent[w] is not None:
            u = parent[w]
            residual[(u, w)] -= 1
            residual[(w, u)] = residual.get((w, u), 0) + 1
            w = u
        flow += 1


def disjoint_paths_to_core(net: Network, core: CoreSpec | set[int], i: int, rank=None) -> tuple[int, bool]:
    """``(count, in_core)``: edge-disjoint paths from ``i`` into the core.

    A core member is reported with its degree and ``in_core=True``.
    """
    members = core.resolve(net, rank) if isinstance(core, CoreSpec) else set(core)
    if not members:
        raise ValueError("core is empty")
    net.check_node(i)
    if i in members:
        return net.degree(i), True
    return _unit_max_flow(net, i, members), False


def core_ratio(net: Network, core: CoreSpec | set[int], minors: Iterable[int], rank=None) -> float:
    """Mean disjoint-path count over minors divided by their mean degree."""
    members = core.resolve(net, rank) if isinstance(core, CoreSpec) else set(core)
    minors = [v for v in minors if v not in members]
    if not minors:
        raise ValueError("no minor nodes outside the core")
    mean_deg = sum(net.degree(v) for v in minors) / len(minors)
    if mean_deg == 0:
        return 0.0
    mean_paths = sum(_unit_max_flow(net, v, members) for v in minors) / len(minors)
    return mean_paths / mean_deg


def mean_shortest_cycle(net: Network, xs: Iterable[int], ys: Iterable[int]) -> tuple[float | None, int]:
    """``(mean, skipped)`` over pairs ``x != y`` of the shortest cycle through both."""
    xs, ys = list(xs), list(ys)
    if not xs or not ys:
        raise ValueError("both node sets must be non-empty")
    lengths = []
    skipped = 0
    for x in xs:
        for y in ys:
            if x == y:
                continue
            c = shortest_cycle_through(net, x, y)
            if c is None:
                skipped += 1
            else:
                lengths.append(c)
    return (sum(lengths) / len(lengths) if lengths else None), skipped


# ---------------------------------------------------------------------------
# motifs
# ---------------------------------------------------------------------------


def count_double_star(net: Network, m: int) -> int:
    """Adjacent pairs, both of degree > m, sharing at least m neighbors."""
    if m < 1:
        raise ValueError("m must be at least 1")
    adj = net.adj
    return sum(
        1
        for u, v in net.edges()
        if len(adj[u]) > m and len(adj[v]) > m and len(adj[u] & adj[v]) >= m
    )


def count_entangled_cycles(net: Network, l: int) -> int:
    """Triangles (``l=3``) or 4-node sets containing a diamond (``l=4``).

    A 4-set contains a diamond iff it induces at least five edges. Each such
    set is found from its chord ``uv`` as a pair of common neighbors; a K4 is
    seen from all six of its edges, hence the correction.
    """
    if l not in (3, 4):
        raise ValueError("entangled cycle length must be 3 or 4")
    adj = net.adj
    if l == 3:
        return sum(len(adj[u] & adj[v]) for u, v in net.edges()) // 3
    pairs = 0
    k4_seen = 0
    for u, v in net.edges():
        common = sorted(adj[u] & adj[v])
        pairs += len(common) * (len(common) - 1) // 2
        k4_seen += sum(1 for w, x in itertools.combinations(common, 2) if x in adj[w])
    k4 = k4_seen // 6
    return pairs - 5 * k4


@dataclass(frozen=True)
class Motif:
    kind: str  # "double_star" or "entangled_cycle"
    size: int

    def __post_init__(self) -> None:
        if self.kind not in ("double_star", "entangled_cycle"):
            raise ValueError(f"unknown motif {self.kind!r}")
        # validate the size eagerly
        self.count(Network.from_counts(0, 0))

    def count(self, net: Network) -> int:
        if self.kind == "double_star":
            return count_double_star(net, self.size)
        return count_entangled_cycles(net, self.size)

    @property
    def unit(self) -> str:
        if self.kind == "double_star":
            return "unordered adjacent center pairs"
        return "node subsets" if self.size == 4 else "triangles"

    def __str__(self) -> str:
        return f"{self.kind}({self.size})"


# ---------------------------------------------------------------------------
# configuration model
# ---------------------------------------------------------------------------


@dataclass
class CMSample:
    net: Network
    erased_fraction: float
    self_loops: int
    multi_edges: int


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def configuration_model(degrees: Sequence[int], seed=0, classes: Sequence[PlayerClass] | None = None) -> CMSample:
    """Uniform stub matching with self-loops and repeated edges erased.

    ``erased_fraction`` is the share of stubs whose pairing was dropped.
    """
    degrees = [int(d) for d in degrees]
    if any(d < 0 for d in degrees):
        raise ValueError("degrees must be non-negative")
    total = sum(degrees)
    if total % 2:
        raise ValueError("degree sum must be even")
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    _rng(seed).shuffle(stubs)
    classes = list(classes) if classes is not None else [PlayerClass.MINOR_B] * len(degrees)
    net = Network(classes)
    loops = multi = 0
    for u, v in stubs.reshape(-1, 2).tolist():
        if u == v:
            loops += 1
        elif net.has_edge(u, v):
            multi += 1
        else:
            net.add_edge(u, v)
    erased = 2 * (loops + multi) / total if total else 0.0
    return CMSample(net, erased, loops, multi)


@dataclass
class MotifReport:
    motif: str
    unit: str
    observed: int
    null_mean: float
    null_std: float
    samples: int
    z: float | None
    p_bound: float
    degenerate: bool
    mean_erased_fraction: float
    seed: int
    null_counts: list[int] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def _null_count(args) -> tuple[int, float]:
    degrees, motif, seed_seq = args
    sample = configuration_model(degrees, seed_seq)
    return motif.count(sample.net), sample.erased_fraction


def null_model_report(net: Network, motif: Motif, samples: int = 100, seed: int = 0, jobs: int = 1) -> MotifReport:
    """Observed motif count against configuration-model samples of the same degrees.

    ``z`` uses the sample standard deviation. ``p_bound`` is the Chebyshev
    bound ``min(1, 1/z^2)`` for ``z > 0`` and 1 otherwise; with zero spread
    ``z`` is undefined and the report is flagged degenerate.
    """
    if samples < 2:
        raise ValueError("need at least two null samples")
    degrees = [net.degree(v) for v in range(net.n)]
    children = np.random.SeedSequence(seed).spawn(samples)
    work = [(degrees, motif, child) for child in children]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_null_count, work))
    else:
        results = [_null_count(w) for w in work]
    counts = [c for c, _ in results]
    mean = float(np.mean(counts))
    std = float(np.std(counts, ddof=1))
    observed = motif.count(net)
    z = None if std == 0 else (observed - mean) / std
    p_bound = min(1.0, 1 / (z * z)) if z is not None and z > 0 else 1.0
    return MotifReport(
        motif=str(motif),
        unit=motif.unit,
        observed=observed,
        null_mean=mean,
        null_std=std,
        samples=samples,
        z=z,
        p_bound=p_bound,
        degenerate=z is None,
        mean_erased_fraction=float(np.mean([e for _, e in results])),
        seed=seed,
        null_counts=counts,
    )


# ---------------------------------------------------------------------------
# snapshot time series
# ---------------------------------------------------------------------------


def snapshot_metrics(snap: Snapshot, core: CoreSpec) -> dict:
    net = snap.net
    members = core.resolve(net, snap.rank)
    outside = [v for v in range(net.n) if v not in members]
    dist = node_core_distance(net, members)
    row = {
        "label": snap.label,
        "nodes": net.n,
        "edges": net.edge_count(),
        "core_size": len(members),
        "core_density": subgraph_density(net, members) if len(members) > 1 else math.nan,
        "mean_core_distance": dist.mean,
        "unreachable": dist.unreachable,
        "core_ratio": core_ratio(net, members, outside) if outside else math.nan,
    }
    return row


def write_metrics_csv(rows: Sequence[dict], path: str | Path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
