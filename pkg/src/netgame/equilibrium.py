"""Pairwise stability, exhaustive equilibrium search, and price ratios.

Enumeration covers every labeled graph on ``n_a + n_b`` players, so it is
only practical for a handful of nodes (``guard`` defaults to 7).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Iterator

import networkx as nx

from .cost import Action, CostParams, Mode, node_cost, social_cost
from .graph import Network

__all__ = [
    "Violation",
    "StabilityReport",
    "EnumerationResult",
    "PriceReport",
    "SizeGuardError",
    "is_pairwise_stable",
    "is_pairwise_stable_with_transfers",
    "enumerate_pairwise_stable",
    "optimal_bare_network",
    "optimal_reliable_stable_network",
    "price_report",
    "check_type_a_clique",
    "graph6",
    "canonical_form",
]

DEFAULT_GUARD = 7


class SizeGuardError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Violation:
    edge: tuple[int, int]
    players: tuple[int, ...]
    action: Action
    deltas: tuple[Fraction, ...]

    def as_dict(self) -> dict:
        return {
            "edge": list(self.edge),
            "players": list(self.players),
            "action": self.action.value,
            "deltas": [str(d) for d in self.deltas],
        }


@dataclass
class StabilityReport:
    stable: bool
    violations: list[Violation] = field(default_factory=list)
    transfers: bool = False

    def as_dict(self) -> dict:
        return {
            "stable": self.stable,
            "transfers": self.transfers,
            "violations": [v.as_dict() for v in self.violations],
        }


def _costs(net: Network, p: CostParams, among) -> dict[int, Fraction]:
    players = range(net.n) if among is None else among
    return {i: node_cost(net, p, i, among).total for i in players}


def _pairs(net: Network, among) -> Iterator[tuple[int, int]]:
    players = sorted(range(net.n) if among is None else among)
    return itertools.combinations(players, 2)


def _toggled_deltas(net, p, base, u, v, among) -> tuple[Action, Fraction, Fraction]:
    present = net.has_edge(u, v)
    if present:
        net.remove_edge(u, v)
    else:
        net.add_edge(u, v)
    try:
        du = node_cost(net, p, u, among).total - base[u]
        dv = node_cost(net, p, v, among).total - base[v]
    finally:
        if present:
            net.add_edge(u, v)
        else:
            net.remove_edge(u, v)
    return (Action.REMOVE if present else Action.ADD), du, dv


def is_pairwise_stable(
    net: Network,
    p: CostParams,
    among: Collection[int] | None = None,
    *,
    removal_tie_violates: bool = True,
    first_only: bool = False,
) -> StabilityReport:
    """No endpoint gains by cutting a link; no absent link helps both ends.

    With ``removal_tie_violates`` (the default) a removal that leaves the
    remover's cost unchanged already breaks stability, since the condition
    demands a strictly positive change.
    """
    net = net.copy()
    base = _costs(net, p, among)
    report = StabilityReport(stable=True)
    for u, v in _pairs(net, among):
        action, du, dv = _toggled_deltas(net, p, base, u, v, among)
        if action is Action.REMOVE:
            actors = tuple(
                x for x, d in ((u, du), (v, dv)) if d < 0 or (removal_tie_violates and d == 0)
            )
            if actors:
                report.violations.append(Violation((u, v), actors, action, (du, dv)))
        elif du <= 0 and dv <= 0:
            report.violations.append(Violation((u, v), (u, v), action, (du, dv)))
        if first_only and report.violations:
            break
    report.stable = not report.violations
    return report


def is_pairwise_stable_with_transfers(
    net: Network,
    p: CostParams,
    among: Collection[int] | None = None,
    *,
    tie_stable: bool = True,
    first_only: bool = False,
) -> StabilityReport:
    """Stability when the two endpoints may pay each other.

    A link changes hands only if the endpoints' combined cost strictly drops
    (combined delta < 0, for addition and for removal alike). A zero combined
    delta is stable unless ``tie_stable`` is cleared.
    """
    net = net.copy()
    base = _costs(net, p, among)
    report = StabilityReport(stable=True, transfers=True)
    for u, v in _pairs(net, among):
        action, du, dv = _toggled_deltas(net, p, base, u, v, among)
        combined = du + dv
        if combined < 0 or (not tie_stable and combined == 0):
            report.violations.append(Violation((u, v), (u, v), action, (du, dv)))
            if first_only:
                break
    report.stable = not report.violations
    return report


def check_type_a_clique(net: Network) -> bool:
    majors = net.majors()
    return all(net.has_edge(u, v) for u, v in itertools.combinations(majors, 2))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _clique(n_a: int, n_b: int) -> Network:
    return Network.from_counts(n_a, n_b, itertools.combinations(range(n_a), 2))


def optimal_bare_network(p: CostParams, n_a: int, n_b: int) -> Network:
    """Socially optimal network without survivability constraints.

    Majors form a clique. If ``(A+1)/2 <= c`` every minor hangs off major 0;
    otherwise every minor links to every major.
    """
    if n_a < 1:
        raise ValueError("the optimal network needs at least one major player")
    net = _clique(n_a, n_b)
    hubs = [0] if (p.A + 1) / 2 <= p.c else range(n_a)
    for b in range(n_a, n_a + n_b):
        for a in hubs:
            net.add_edge(a, b)
    return net


def optimal_reliable_stable_network(p: CostParams, n_a: int, n_b: int) -> Network:
    """Major clique with every minor linked to majors 0 and 1."""
    if n_a < 2:
        raise ValueError("two majors are needed for two disjoint paths")
    if p.mode is not Mode.RELIABLE or p.tau != 1:
        raise ValueError("constructor applies to reliable mode with tau=1")
    net = _clique(n_a, n_b)
    for b in range(n_a, n_a + n_b):
        net.add_edge(0, b)
        net.add_edge(1, b)
    return net


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def graph6(net: Network) -> str:
    g = nx.Graph()
    g.add_nodes_from(range(net.n))
    g.add_edges_from(net.edges())
    return nx.to_graph6_bytes(g, header=False).decode().strip()


def canonical_form(net: Network) -> tuple:
    """Isomorphism invariant respecting player classes (brute force, tiny graphs)."""
    majors, minors = net.majors(), net.minors()
    best = None
    for pa in itertools.permutations(majors):
        for pb in itertools.permutations(minors):
            relabel = dict(zip(majors + minors, pa + pb))
            key = tuple(sorted(tuple(sorted((relabel[u], relabel[v]))) for u, v in net.edges()))
            if best is None or key < best:
                best = key
    return best


@dataclass
class EnumerationResult:
    n_a: int
    n_b: int
    params: CostParams
    transfers: bool
    graphs_checked: int
    optimum_cost: Fraction
    optimum: Network
    stable: list[tuple[Network, Fraction]]

    @property
    def stable_count(self) -> int:
        return len(self.stable)

    def stable_classes(self) -> int:
        return len({canonical_form(g) for g, _ in self.stable})


def _check_guard(n: int, guard: int) -> None:
    if n > guard:
        raise SizeGuardError(f"{n} players exceeds the enumeration guard of {guard}")


def enumerate_pairwise_stable(
    n_a: int,
    n_b: int,
    p: CostParams,
    transfers: bool = False,
    guard: int = DEFAULT_GUARD,
) -> EnumerationResult:
    """All labeled graphs passing the chosen stability predicate.

    Also tracks the unconstrained social-cost minimizer (first in mask order
    on ties). Graphs are visited in increasing edge-bitmask order over the
    lexicographically sorted pair list, so results are deterministic.
    """
    n = n_a + n_b
    _check_guard(n, guard)
    pairs = list(itertools.combinations(range(n), 2))
    check = is_pairwise_stable_with_transfers if transfers else is_pairwise_stable
    stable: list[tuple[Network, Fraction]] = []
    best_cost: Fraction | None = None
    best_net: Network | None = None
    for mask in range(1 << len(pairs)):
        net = Network.from_counts(n_a, n_b, (e for k, e in enumerate(pairs) if mask >> k & 1))
        cost = social_cost(net, p)
        if best_cost is None or cost < best_cost:
            best_cost, best_net = cost, net
        if check(net, p, first_only=True).stable:
            stable.append((net, cost))
    return EnumerationResult(n_a, n_b, p, transfers, 1 << len(pairs), best_cost, best_net, stable)


def _ratio(num: Fraction | None, den: Fraction) -> Fraction | None:
    # a single player costs nothing in every graph; call that ratio 1
    if num is None:
        return None
    if den == 0:
        return Fraction(1) if num == 0 else None
    return num / den


@dataclass
class PriceReport:
    params: CostParams
    n_a: int
    n_b: int
    transfers: bool
    s_optimal: Fraction
    s_best_stable: Fraction | None
    s_worst_stable: Fraction | None
    stable_count: int
    stable_classes: int
    por: Fraction | None = None
    bare_best_stable: Fraction | None = None
    witnesses: dict[str, str] = field(default_factory=dict)

    @property
    def pos(self) -> Fraction | None:
        return _ratio(self.s_best_stable, self.s_optimal)

    @property
    def poa(self) -> Fraction | None:
        return _ratio(self.s_worst_stable, self.s_optimal)

    @property
    def q_dominated(self) -> bool:
        """Worst equilibrium carries a penalty: the finite PoA stands in for an unbounded one."""
        q = self.params.penalty(self.n_a + self.n_b)
        return self.s_worst_stable is not None and self.s_worst_stable >= q

    @property
    def por_below_one(self) -> bool | None:
        return None if self.por is None else self.por < 1

    def as_dict(self) -> dict:
        def num(x):
            return None if x is None else {"exact": str(x), "float": float(x)}

        return {
            "params": self.params.as_dict(),
            "n_A": self.n_a,
            "n_B": self.n_b,
            "transfers": self.transfers,
            "s_optimal": num(self.s_optimal),
            "s_best_stable": num(self.s_best_stable),
            "s_worst_stable": num(self.s_worst_stable),
            "pos": num(self.pos),
            "poa": num(self.poa),
            "poa_q_dominated": self.q_dominated,
            "por": num(self.por),
            "bare_best_stable": num(self.bare_best_stable),
            "por_below_one": self.por_below_one,
            "stable_count": self.stable_count,
            "stable_classes": self.stable_classes,
            "witnesses": self.witnesses,
        }


def _report_from(result: EnumerationResult) -> PriceReport:
    costs = [c for _, c in result.stable]
    witnesses = {"optimum": graph6(result.optimum)}
    best = worst = None
    if costs:
        best, worst = min(costs), max(costs)
        witnesses["best_stable"] = graph6(next(g for g, c in result.stable if c == best))
        witnesses["worst_stable"] = graph6(next(g for g, c in result.stable if c == worst))
    return PriceReport(
        params=result.params,
        n_a=result.n_a,
        n_b=result.n_b,
        transfers=result.transfers,
        s_optimal=result.optimum_cost,
        s_best_stable=best,
        s_worst_stable=worst,
        stable_count=result.stable_count,
        stable_classes=result.stable_classes(),
        witnesses=witnesses,
    )


def price_report(
    p: CostParams,
    n_a: int,
    n_b: int,
    transfers: bool = False,
    with_reliability: bool = False,
    guard: int = DEFAULT_GUARD,
) -> PriceReport:
    """PoS/PoA by exhaustive enumeration.

    With ``with_reliability`` (reliable-mode params only) the same instance is
    also solved in bare mode and ``por`` is the ratio of the two best stable
    social costs.
    """
    report = _report_from(enumerate_pairwise_stable(n_a, n_b, p, transfers, guard))
    if with_reliability:
        if p.mode is not Mode.RELIABLE:
            raise ValueError("price of reliability needs reliable-mode parameters")
        bare = enumerate_pairwise_stable(n_a, n_b, p.with_mode(Mode.BARE), transfers, guard)
        bare_costs = [c for _, c in bare.stable]
        if bare_costs and report.s_best_stable is not None:
            report.bare_best_stable = min(bare_costs)
            report.por = _ratio(report.s_best_stable, report.bare_best_stable)
    return report
