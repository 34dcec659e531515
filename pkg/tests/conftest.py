from __future__ import annotations

import itertools
import sys

import networkx as nx
from hypothesis import strategies as st

from netgame.graph import Network, PlayerClass


@st.composite
def networks(draw, min_nodes=2, max_nodes=8, connected=False):
    n = draw(st.integers(min_nodes, max_nodes))
    n_a = draw(st.integers(0, n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    net = Network.from_counts(n_a, n - n_a, chosen)
    if connected:
        # chain the components together so every draw is usable
        comps = list(nx.connected_components(to_nx(net)))
        for a, b in zip(comps, comps[1:]):
            net.add_edge(min(a), min(b))
    return net


def to_nx(net: Network) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(net.n))
    g.add_edges_from(net.edges())
    return g


def path_net(n_a: int, n_b: int, order):
    net = Network.from_counts(n_a, n_b)
    for u, v in zip(order, order[1:]):
        net.add_edge(u, v)
    return net


def cycle_net(n: int, classes=None) -> Network:
    classes = classes or [PlayerClass.MINOR_B] * n
    return Network(classes, [(k, (k + 1) % n) for k in range(n)])


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[number])
