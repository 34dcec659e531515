"""Player cost functions: bare, reliable, and transfer-adjusted.

All arithmetic uses :class:`fractions.Fraction`, so stability predicates built
on strict inequalities cannot be flipped by rounding. Floats are accepted as
inputs only through :func:`as_fraction`, which goes via ``str`` to keep
``0.1`` equal to ``1/10``.

Penalties. A bare-mode node pays ``Q`` for every present player it cannot
reach, and its distance terms to those players are dropped (``flat_penalty``
charges a single ``Q`` instead, however many are missing). A reliable-mode
node pays ``Q`` per *missing required path*: an unreachable target that
needs a disjoint pair counts two, a reachable one without a disjoint pair
counts one (its primary leg is still charged), and an unreachable target
that needs only a plain path counts one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Collection, Iterable, Mapping

from .graph import Network, PlayerClass, _bfs, norm_edge, pair_costs_from

__all__ = [
    "Mode",
    "Action",
    "CostParams",
    "CostBreakdown",
    "as_fraction",
    "bare_cost",
    "reliable_cost",
    "node_cost",
    "monetary_cost",
    "social_cost",
    "delta_cost",
    "line_shortcut_reduction",
    "LedgerError",
]

Number = Fraction | int | float | str


def as_fraction(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


class Mode(enum.Enum):
    BARE = "bare"
    RELIABLE = "reliable"


class Action(enum.Enum):
    ADD = "add"
    REMOVE = "remove"


class LedgerError(ValueError):
    """Payment recorded on a pair of players that is not linked."""


@dataclass(frozen=True)
class CostParams:
    A: Fraction
    c_A: Fraction
    c_B: Fraction
    delta: Fraction = Fraction(1)
    tau: int = 1
    Q: Fraction | None = None
    mode: Mode = Mode.BARE
    flat_penalty: bool = False

    def __post_init__(self) -> None:
        for name in ("A", "c_A", "c_B", "delta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.Q is not None:
            object.__setattr__(self, "Q", as_fraction(self.Q))
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode(self.mode))
        if not self.A > 1:
            raise ValueError(f"A must exceed 1, got {self.A}")
        if not 0 < self.c_A <= self.c_B:
            raise ValueError(f"need 0 < c_A <= c_B, got c_A={self.c_A}, c_B={self.c_B}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.tau not in (0, 1):
            raise ValueError(f"tau must be 0 or 1, got {self.tau}")

    @property
    def c(self) -> Fraction:
        """Mean link price ``(c_A + c_B) / 2``."""
        return (self.c_A + self.c_B) / 2

    def link_cost(self, cls: PlayerClass) -> Fraction:
        return self.c_A if cls is PlayerClass.MAJOR_A else self.c_B

    def penalty(self, n: int) -> Fraction:
        """The dominating penalty; defaults to ``1000 * N**2 * (A + c_B)``."""
        if self.Q is not None:
            return self.Q
        return 1000 * n * n * (self.A + self.c_B)

    def with_mode(self, mode: Mode) -> "CostParams":
        return replace(self, mode=mode)

    def as_dict(self) -> dict[str, str | int]:
        return {
            "A": str(self.A),
            "c_A": str(self.c_A),
            "c_B": str(self.c_B),
            "delta": str(self.delta),
            "tau": self.tau,
            "Q": None if self.Q is None else str(self.Q),
            "mode": self.mode.value,
            "flat_penalty": self.flat_penalty,
        }


@dataclass(frozen=True)
class CostBreakdown:
    link_cost: Fraction = Fraction(0)
    major_distance_cost: Fraction = Fraction(0)
    minor_distance_cost: Fraction = Fraction(0)
    penalty: Fraction = Fraction(0)
    total: Fraction = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "total",
            self.link_cost + self.major_distance_cost + self.minor_distance_cost + self.penalty,
        )

    @property
    def penalized(self) -> bool:
        return self.penalty > 0


def _targets(net: Network, i: int, among: Collection[int] | None) -> Iterable[int]:
    if among is None:
        return (j for j in range(net.n) if j != i)
    return (j for j in among if j != i)


def bare_cost(net: Network, p: CostParams, i: int, among: Collection[int] | None = None) -> CostBreakdown:
    """``deg(i)*c + A*sum_{majors} d + sum_{minors} d`` over present players."""
    net.check_node(i)
    dist = _bfs(net.adj, i)
    major = minor = 0
    unreachable = 0
    classes = net.classes
    for j in _targets(net, i, among):
        d = dist[j]
        if d is None:
            unreachable += 1
        elif classes[j] is PlayerClass.MAJOR_A:
            major += d
        else:
            minor += d
    return CostBreakdown(
        link_cost=len(net.adj[i]) * p.link_cost(classes[i]),
        major_distance_cost=p.A * major,
        minor_distance_cost=Fraction(minor),
        penalty=p.penalty(net.n) * (min(unreachable, 1) if p.flat_penalty else unreachable),
    )


def reliable_cost(net: Network, p: CostParams, i: int, among: Collection[int] | None = None) -> CostBreakdown:
    """Survivability-aware cost; the ``d'`` legs come from ``min_disjoint_pair``."""
    net.check_node(i)
    classes = net.classes
    delta = p.delta
    major_pair = Fraction(0)  # sum of d + delta*d' over majors
    major_single = 0  # primary legs charged where the backup is missing
    minor_pair = Fraction(0)
    minor_single = 0
    minor_plain = 0
    missing = 0
    for j, d, weighted in pair_costs_from(net, i, delta, _targets(net, i, among)):
        if classes[j] is PlayerClass.MAJOR_A:
            if d is None:
                missing += 2
            elif weighted is None:
                missing += 1
                major_single += d
            else:
                major_pair += weighted
        elif p.tau:
            if d is None:
                missing += 2
            elif weighted is None:
                missing += 1
                minor_single += d
            else:
                minor_pair += weighted
        else:
            if d is None:
                missing += 1
            else:
                minor_plain += d
    scale = 1 / (1 + delta)
    return CostBreakdown(
        link_cost=len(net.adj[i]) * p.link_cost(classes[i]),
        major_distance_cost=p.A * scale * (major_pair + major_single),
        minor_distance_cost=scale * (minor_pair + minor_single) + minor_plain,
        penalty=missing * p.penalty(net.n),
    )


def node_cost(net: Network, p: CostParams, i: int, among: Collection[int] | None = None) -> CostBreakdown:
    if p.mode is Mode.RELIABLE:
        return reliable_cost(net, p, i, among)
    return bare_cost(net, p, i, among)


def transfer_balance(net: Network, ledger: Mapping[tuple[int, int], Fraction], i: int) -> Fraction:
    """``sum_j (P_ij - P_ji)`` over ``i``'s links; raises on payments without a link."""
    total = Fraction(0)
    for (payer, payee), amount in ledger.items():
        if not net.has_edge(payer, payee):
            raise LedgerError(f"payment {payer}->{payee} recorded without a link")
        if payer == i:
            total += amount
        elif payee == i:
            total -= amount
    return total


def monetary_cost(
    net: Network,
    p: CostParams,
    i: int,
    ledger: Mapping[tuple[int, int], Fraction],
    among: Collection[int] | None = None,
) -> Fraction:
    """Node cost plus payments made minus payments received."""
    return node_cost(net, p, i, among).total + transfer_balance(net, ledger, i)


def social_cost(net: Network, p: CostParams, among: Collection[int] | None = None) -> Fraction:
    players = range(net.n) if among is None else among
    return sum((node_cost(net, p, i, among).total for i in players), Fraction(0))


def delta_cost(
    net: Network,
    p: CostParams,
    i: int,
    edge: tuple[int, int],
    action: Action | str,
    among: Collection[int] | None = None,
) -> Fraction:
    """``C(i, E +/- edge) - C(i, E)``, by evaluating both graphs."""
    action = Action(action)
    u, v = edge
    present = net.has_edge(u, v)
    if action is Action.ADD and present:
        raise ValueError(f"cannot add existing edge {norm_edge(u, v)}")
    if action is Action.REMOVE and not present:
        raise ValueError(f"cannot remove absent edge {norm_edge(u, v)}")
    before = node_cost(net, p, i, among).total
    after_net = net.copy()
    if action is Action.ADD:
        after_net.add_edge(u, v)
    else:
        after_net.remove_edge(u, v)
    return node_cost(after_net, p, i, among).total - before


def line_shortcut_reduction(k: int) -> Fraction:
    """Distance-sum drop for an end node of a ``k``-node line when both ends link."""
    if k < 2:
        raise ValueError(f"line needs at least 2 nodes, got {k}")
    return Fraction(k * (k - 2) + k % 2, 4)
