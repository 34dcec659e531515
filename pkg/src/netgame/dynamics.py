"""Turn-based network formation dynamics.

Players arrive one at a time and then take turns. During a turn only the
active player initiates moves (one link added or removed per move); every
other player reacts greedily and accepts a proposed link only if it strictly
lowers its own cost (after any offered payment).

Two turn rules are supported:

* ``Rule.STRICT`` (each move must strictly lower the actor's cost), and
* ``Rule.PLANNED`` (the actor may pass through worse states, e.g. cut itself
  off entirely, as long as the plan it commits to ends strictly cheaper).

``PLANNED`` turns are searched over a small family of plans: keep all links,
drop one link, or drop every link, each followed by strict greedy moves. The
best-ending plan is committed.

Costs are always evaluated over joined players only. Node costs are cached
by edge set, which makes the repeated "what if" evaluations affordable.
"""

from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .cost import Action, CostParams, Mode, node_cost
from .graph import Network, PlayerClass, norm_edge

__all__ = [
    "Rule",
    "Preference",
    "Pricing",
    "Region",
    "Prediction",
    "RoundRobin",
    "UniformRandom",
    "Scripted",
    "DynamicsConfig",
    "GameState",
    "Move",
    "TurnRecord",
    "Trace",
    "PhaseCoords",
    "CostCache",
    "run_game",
    "play_turn",
    "greedy_accept",
    "price_quote",
    "choose_partner",
    "classify_phase",
    "classify_reliable_phase",
    "convergence_prediction",
]


class Rule(enum.Enum):
    PLANNED = "2a"
    STRICT = "2b"


class Preference(enum.Enum):
    EFFICIENT = "po1"
    CHEAPEST = "po2"


class Pricing(enum.Enum):
    EFFICIENT = "efficient"
    STRATEGIC = "strategic"


class Prediction(enum.Enum):
    OPTIMAL = "optimal"
    PROMOTED_STAR = "promoted_star"
    INDETERMINATE = "indeterminate"


class Region(enum.IntEnum):
    UNCLASSIFIED = 0
    TEMPLATE = -1  # matches the survivable template, which has no nullcline regions
    OPTIMAL_BASIN = 1
    MIXED_LOW = 2
    STAR_BASIN = 3
    MIXED_HIGH = 4


# ---------------------------------------------------------------------------
# schedulers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundRobin:
    """Fixed arrival order (ids ascending by default); rounds follow it."""

    order: tuple[int, ...] | None = None

    def arrivals(self, n: int) -> list[int]:
        return list(self.order) if self.order is not None else list(range(n))

    def round_order(self, joined: Sequence[int], round_index: int) -> list[int]:
        return list(joined)

    def as_dict(self) -> dict:
        return {"kind": "round_robin", "order": None if self.order is None else list(self.order)}


@dataclass
class UniformRandom:
    """Random arrival order and a fresh random permutation every round."""

    seed: int
    _rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rng = random.Random(self.seed)

    def arrivals(self, n: int) -> list[int]:
        self._rng = random.Random(self.seed)
        order = list(range(n))
        self._rng.shuffle(order)
        return order

    def round_order(self, joined: Sequence[int], round_index: int) -> list[int]:
        order = list(joined)
        self._rng.shuffle(order)
        return order

    def as_dict(self) -> dict:
        return {"kind": "uniform_random", "seed": self.seed}


@dataclass(frozen=True)
class Scripted:
    """Explicit arrival order and, optionally, an explicit turn sequence.

    ``turns`` is consumed round by round: each entry is the acting order of
    one post-arrival round. Once exhausted, rounds fall back to arrival order.
    """

    arrival_order: tuple[int, ...]
    turns: tuple[tuple[int, ...], ...] = ()

    def arrivals(self, n: int) -> list[int]:
        return list(self.arrival_order)

    def round_order(self, joined: Sequence[int], round_index: int) -> list[int]:
        if round_index < len(self.turns):
            return list(self.turns[round_index])
        return list(joined)

    def as_dict(self) -> dict:
        return {
            "kind": "scripted",
            "arrival_order": list(self.arrival_order),
            "turns": [list(t) for t in self.turns],
        }


Scheduler = RoundRobin | UniformRandom | Scripted


@dataclass
class DynamicsConfig:
    params: CostParams
    rule: Rule = Rule.STRICT
    transfers: bool = False
    preference: Preference = Preference.EFFICIENT
    pricing: Pricing = Pricing.EFFICIENT
    scheduler: Scheduler = field(default_factory=RoundRobin)
    max_rounds: int = 50
    seed: int = 0
    rounds_between_arrivals: int = 1
    record_costs: bool = True
    record_phases: bool = False

    def __post_init__(self) -> None:
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        self.rule = Rule(self.rule)
        self.preference = Preference(self.preference)
        self.pricing = Pricing(self.pricing)

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "rule": self.rule.value,
            "transfers": self.transfers,
            "preference": self.preference.value,
            "pricing": self.pricing.value,
            "scheduler": self.scheduler.as_dict(),
            "max_rounds": self.max_rounds,
            "seed": self.seed,
            "rounds_between_arrivals": self.rounds_between_arrivals,
        }


# ---------------------------------------------------------------------------
# state and cost evaluation
# ---------------------------------------------------------------------------


class CostCache:
    """Node costs keyed by (edge set, joined set, node)."""

    def __init__(self, params: CostParams, limit: int = 500_000):
        self.params = params
        self.limit = limit
        self._store: dict[tuple, Fraction] = {}
        self.hits = 0
        self.misses = 0

    def cost(self, net: Network, i: int, among: frozenset[int]) -> Fraction:
        key = (net.edge_key(), among, i)
        value = self._store.get(key)
        if value is not None:
            self.hits += 1
            return value
        self.misses += 1
        if len(self._store) >= self.limit:
            self._store.clear()
        value = node_cost(net, self.params, i, among).total
        self._store[key] = value
        return value


@dataclass
class GameState:
    net: Network
    joined: list[int] = field(default_factory=list)
    ledger: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    turn: int = 0

    @classmethod
    def empty(cls, n_a: int, n_b: int) -> "GameState":
        return cls(Network.from_counts(n_a, n_b))

    def among(self) -> frozenset[int]:
        return frozenset(self.joined)

    def copy(self) -> "GameState":
        return GameState(self.net.copy(), list(self.joined), dict(self.ledger), self.turn)

    def balance(self, i: int) -> Fraction:
        total = Fraction(0)
        for (payer, payee), amount in self.ledger.items():
            if payer == i:
                total += amount
            elif payee == i:
                total -= amount
        return total

    def link_payment(self, i: int, j: int) -> Fraction:
        """Net amount ``i`` pays ``j`` on their link."""
        return self.ledger.get((i, j), Fraction(0)) - self.ledger.get((j, i), Fraction(0))

    def apply(self, move: "Move") -> None:
        u, v = move.edge
        if move.action is Action.ADD:
            self.net.add_edge(u, v)
            if move.priced:
                self.ledger[(move.actor, move.partner)] = move.payment
        else:
            self.net.remove_edge(u, v)
            self.ledger.pop((u, v), None)
            self.ledger.pop((v, u), None)

    def check_ledger(self) -> None:
        for payer, payee in self.ledger:
            if not self.net.has_edge(payer, payee):
                raise ValueError(f"ledger entry {payer}->{payee} has no link")


@dataclass(frozen=True)
class Move:
    actor: int
    partner: int
    action: Action
    payment: Fraction = Fraction(0)
    actor_delta: Fraction = Fraction(0)
    partner_delta: Fraction | None = None
    priced: bool = False  # formed under transfers; the ledger records even a zero price

    @property
    def edge(self) -> tuple[int, int]:
        return norm_edge(self.actor, self.partner)

    def as_dict(self) -> dict:
        return {
            "actor": self.actor,
            "partner": self.partner,
            "action": self.action.value,
            "payment": str(self.payment),
            "actor_delta": str(self.actor_delta),
            "partner_delta": None if self.partner_delta is None else str(self.partner_delta),
            "priced": self.priced,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Move":
        pd = d.get("partner_delta")
        return cls(
            actor=d["actor"],
            partner=d["partner"],
            action=Action(d["action"]),
            payment=Fraction(d["payment"]),
            actor_delta=Fraction(d["actor_delta"]),
            partner_delta=None if pd is None else Fraction(pd),
            priced=d.get("priced", False),
        )


class _Eval:
    """Cost queries against a state, with edge toggles done in place."""

    def __init__(self, state: GameState, cfg: DynamicsConfig, cache: CostCache):
        self.state = state
        self.cfg = cfg
        self.cache = cache
        self.among = state.among()

    def cost(self, i: int) -> Fraction:
        return self.cache.cost(self.state.net, i, self.among)

    def toggled(self, i: int, u: int, v: int) -> Fraction:
        net = self.state.net
        present = net.has_edge(u, v)
        if present:
            net.remove_edge(u, v)
        else:
            net.add_edge(u, v)
        try:
            return self.cache.cost(net, i, self.among)
        finally:
            if present:
                net.add_edge(u, v)
            else:
                net.remove_edge(u, v)

    def add_delta(self, i: int, u: int, v: int) -> Fraction:
        return self.toggled(i, u, v) - self.cost(i)

    def money(self, i: int) -> Fraction:
        return self.cost(i) + self.state.balance(i)


# ---------------------------------------------------------------------------
# bilateral primitives
# ---------------------------------------------------------------------------


def greedy_accept(partner_delta: Fraction, payment: Fraction = Fraction(0)) -> bool:
    """Counterparty's greedy consent to a proposed link.

    Without money the link must strictly lower the counterparty's cost. A
    positive payment that fully covers the counterparty's cost increase is
    also accepted, since the payment is priced to compensate exactly.
    """
    net = partner_delta - payment
    if net < 0:
        return True
    return payment > 0 and payment >= partner_delta


def _check_addable(state: GameState, i: int, j: int) -> None:
    if i == j:
        raise ValueError("a player cannot link to itself")
    if state.net.has_edge(i, j):
        raise ValueError(f"edge {norm_edge(i, j)} already present")
    joined = state.among()
    if i not in joined or j not in joined:
        raise ValueError("both players must have joined")


def _partners(state: GameState, i: int) -> list[int]:
    adj = state.net.adj[i]
    return [j for j in sorted(state.joined) if j != i and j not in adj]


def _strategic_anchor(ev: _Eval, i: int, partners: Sequence[int]) -> tuple[Fraction, Fraction]:
    """``(dC(i, ij*), P*)`` where ``j*`` is the partner least useful to ``i``.

    Among equally useless partners the cheapest one sets the anchor price.
    """
    deltas = {j: ev.add_delta(i, i, j) for j in partners}
    worst = max(deltas.values())
    p_star = min(max(ev.add_delta(j, i, j), Fraction(0)) for j in partners if deltas[j] == worst)
    return worst, p_star


def _quote(ev: _Eval, i: int, j: int, pricing: Pricing, d_i: Fraction, d_j: Fraction, anchor) -> Fraction:
    if pricing is Pricing.EFFICIENT:
        return max(d_j, Fraction(0))
    d_star, p_star = anchor
    alpha = (d_star + p_star) - d_i
    return max(Fraction(0), alpha, d_j)


def price_quote(state: GameState, payer: int, payee: int, pricing: Pricing, params: CostParams,
                cache: CostCache | None = None) -> Fraction:
    """Payment the payee demands for the link ``payer``-``payee``.

    Efficient pricing asks exactly the payee's cost increase (zero if the
    payee gains). Strategic pricing anchors on the partner ``j*`` whose link
    helps the payer least, priced at ``P* = max(dC(j*), 0)``; every other
    payee adds the payer's extra gain over that anchor:
    ``max(0, alpha, dC(payee))`` with ``alpha = dC(payer, j*) + P* - dC(payer, payee)``.
    """
    _check_addable(state, payer, payee)
    pricing = Pricing(pricing)
    ev = _Eval(state, DynamicsConfig(params), cache or CostCache(params))
    d_i = ev.add_delta(payer, payer, payee)
    d_j = ev.add_delta(payee, payer, payee)
    anchor = _strategic_anchor(ev, payer, _partners(state, payer)) if pricing is Pricing.STRATEGIC else None
    return _quote(ev, payer, payee, pricing, d_i, d_j, anchor)


@dataclass(frozen=True)
class _Offer:
    partner: int
    payment: Fraction
    actor_delta: Fraction  # includes the payment
    partner_delta: Fraction


def _best_offer(ev: _Eval, i: int, cfg: DynamicsConfig, rng: random.Random) -> _Offer | None:
    state = ev.state
    partners = _partners(state, i)
    if not partners:
        return None
    if not cfg.transfers:
        # Best-first: only evaluate counterparties for links that help i.
        gains = sorted((ev.add_delta(i, i, j), j) for j in partners)
        for d_i, j in gains:
            if d_i >= 0:
                break
            d_j = ev.add_delta(j, i, j)
            if d_j < 0:
                return _Offer(j, Fraction(0), d_i, d_j)
        return None

    anchor = _strategic_anchor(ev, i, partners) if cfg.pricing is Pricing.STRATEGIC else None
    offers = []
    for j in partners:
        d_i = ev.add_delta(i, i, j)
        d_j = ev.add_delta(j, i, j)
        price = _quote(ev, i, j, cfg.pricing, d_i, d_j, anchor)
        if greedy_accept(d_j, price) and d_i + price < 0:
            offers.append((j, price, d_i, d_j))
    if not offers:
        return None
    if cfg.preference is Preference.EFFICIENT:
        key = min(d_i + min(d_j, 0) for _, _, d_i, d_j in offers)
        j, price, d_i, d_j = next(o for o in offers if o[2] + min(o[3], 0) == key)
    else:
        best = min(d_i + price for _, price, d_i, _ in offers)
        tied = [o for o in offers if o[2] + o[1] == best]
        cheapest = min(o[1] for o in tied)
        tied = [o for o in tied if o[1] == cheapest]
        j, price, d_i, d_j = tied[0] if len(tied) == 1 else rng.choice(tied)
    return _Offer(j, price, d_i + price, d_j)


def choose_partner(state: GameState, player: int, cfg: DynamicsConfig,
                   cache: CostCache | None = None, rng: random.Random | None = None) -> int | None:
    """Counterparty the player would link to next, or None if no link helps it."""
    ev = _Eval(state, cfg, cache or CostCache(cfg.params))
    offer = _best_offer(ev, player, cfg, rng or random.Random(cfg.seed))
    return None if offer is None else offer.partner


# ---------------------------------------------------------------------------
# turns
# ---------------------------------------------------------------------------


def _best_strict_move(ev: _Eval, i: int, cfg: DynamicsConfig, rng: random.Random) -> Move | None:
    state = ev.state
    best: Move | None = None
    for j in sorted(state.net.adj[i]):
        d = ev.toggled(i, i, j) - ev.cost(i) - state.link_payment(i, j)
        if d < 0 and (best is None or d < best.actor_delta):
            best = Move(i, j, Action.REMOVE, actor_delta=d)
    offer = _best_offer(ev, i, cfg, rng)
    if offer is not None and (best is None or offer.actor_delta < best.actor_delta):
        best = Move(i, offer.partner, Action.ADD, offer.payment, offer.actor_delta,
                    offer.partner_delta, priced=cfg.transfers)
    return best


def _greedy(state: GameState, i: int, cfg: DynamicsConfig, cache: CostCache,
            rng: random.Random, budget: int) -> list[Move]:
    moves: list[Move] = []
    while len(moves) < budget:
        move = _best_strict_move(_Eval(state, cfg, cache), i, cfg, rng)
        if move is None:
            break
        state.apply(move)
        moves.append(move)
    return moves


def _forced_removal(ev: _Eval, i: int, j: int) -> Move:
    d = ev.toggled(i, i, j) - ev.cost(i) - ev.state.link_payment(i, j)
    return Move(i, j, Action.REMOVE, actor_delta=d)


def _plan(state: GameState, i: int, cut: Sequence[int], cfg, cache, rng, budget) -> tuple[Fraction, list[Move], GameState]:
    scratch = state.copy()
    moves = []
    for j in cut:
        move = _forced_removal(_Eval(scratch, cfg, cache), i, j)
        scratch.apply(move)
        moves.append(move)
    moves += _greedy(scratch, i, cfg, cache, rng, budget - len(moves))
    return _Eval(scratch, cfg, cache).money(i), moves, scratch


def play_turn(state: GameState, player: int, cfg: DynamicsConfig,
              cache: CostCache | None = None, rng: random.Random | None = None) -> tuple[list[Move], bool]:
    """Let ``player`` move until it has nothing left to gain.

    Returns the committed moves and whether the 2N move budget was exhausted.
    """
    if player not in state.joined:
        raise ValueError(f"player {player} has not joined")
    cache = cache or CostCache(cfg.params)
    rng = rng or random.Random(cfg.seed)
    budget = 2 * state.net.n
    if cfg.rule is Rule.STRICT:
        moves = _greedy(state, player, cfg, cache, rng, budget)
        return moves, len(moves) >= budget and _best_strict_move(_Eval(state, cfg, cache), player, cfg, rng) is not None

    moves: list[Move] = []
    while len(moves) < budget:
        current = _Eval(state, cfg, cache).money(player)
        links = sorted(state.net.adj[player])
        cuts: list[Sequence[int]] = [()] + [(j,) for j in links]
        if len(links) > 1:
            cuts.append(tuple(links))
        best = None
        for cut in cuts:
            # Each plan draws tie-breaks from its own copy of the generator.
            plan_rng = random.Random()
            plan_rng.setstate(rng.getstate())
            final, plan_moves, scratch = _plan(state, player, cut, cfg, cache, plan_rng, budget - len(moves))
            if plan_moves and final < current and (best is None or final < best[0]):
                best = (final, plan_moves, scratch, plan_rng)
        if best is None:
            return moves, False
        _, plan_moves, scratch, plan_rng = best
        state.net, state.ledger = scratch.net, scratch.ledger
        rng.setstate(plan_rng.getstate())
        moves += plan_moves
    return moves, True


# ---------------------------------------------------------------------------
# phase classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseCoords:
    s_size: int
    l_size: int
    d_size: int
    region: Region
    center: int | None = None
    hub: int | None = None
    hub_linked: bool | None = None
    term1: Fraction | None = None
    term2: Fraction | None = None
    s2_size: int | None = None
    d2_size: int | None = None

    @property
    def classified(self) -> bool:
        return self.region is not Region.UNCLASSIFIED

    def as_dict(self) -> dict:
        out = {
            "S": self.s_size,
            "L": self.l_size,
            "D": self.d_size,
            "region": int(self.region),
            "center": self.center,
            "hub": self.hub,
        }
        if self.s2_size is not None:
            out.update(S2=self.s2_size, D2=self.d2_size)
        return out


UNCLASSIFIED = PhaseCoords(0, 0, 0, Region.UNCLASSIFIED)


def _region(term1: Fraction, term2: Fraction) -> Region:
    # Zero counts with the "no" side of each nullcline: a major gains from
    # linking the center only if term1 < 0; a newcomer prefers the center
    # only if term2 > 0.
    if term1 > 0:
        return Region.OPTIMAL_BASIN if term2 <= 0 else Region.MIXED_HIGH
    return Region.STAR_BASIN if term2 > 0 else Region.MIXED_LOW


def nullcline_terms(p: CostParams, s: int, l: int, d: int, m_a: int, hub_linked: bool) -> tuple[Fraction, Fraction]:
    """``(term1, term2)``: a major's gain from linking the star center, and a
    newcomer's preference for the center over the hub (positive favors the center)."""
    term1 = p.c_A - s - 1
    if hub_linked:
        term2 = -p.A * (1 + m_a - d) + 1 + s - l
    else:
        term2 = -p.A * (1 + m_a - d) + 2 * (1 + s - l)
    return term1, term2


def classify_phase(state: GameState, p: CostParams, order: Sequence[int] | None = None) -> PhaseCoords:
    """Map a bare-model state onto the two-star template.

    The star center ``x`` is the joined minor with the most minor neighbors
    (lowest id on ties; none if no minor-minor link exists). The hub ``k`` is
    the first major, in ``order`` (arrival order by default), adjacent to a
    minor. Every other minor must hang off ``x`` or ``k`` alone, and the joined
    majors must form a clique; otherwise the state is unclassified.
    """
    net = state.net
    joined = set(state.joined)
    order = list(order) if order is not None else list(state.joined)
    majors = [v for v in order if v in joined and net.is_major(v)]
    minors = sorted(v for v in joined if not net.is_major(v))
    if not all(net.has_edge(u, v) for u, v in itertools.combinations(majors, 2)):
        return UNCLASSIFIED
    minor_deg = {b: sum(1 for w in net.adj[b] if w in joined and not net.is_major(w)) for b in minors}
    x = None
    if minors and max(minor_deg.values()) > 0:
        x = min(minors, key=lambda b: (-minor_deg[b], b))
    k = next((a for a in majors if any(not net.is_major(w) for w in net.adj[a])), None)
    s_set, l_set = set(), set()
    for b in minors:
        if b == x:
            continue
        nbrs = net.adj[b] & joined
        if x is not None and nbrs == {x}:
            s_set.add(b)
        elif k is not None and nbrs == {k}:
            l_set.add(b)
        else:
            return UNCLASSIFIED
    d_set = set()
    if x is not None:
        if any(w not in s_set and not net.is_major(w) for w in net.adj[x] & joined):
            return UNCLASSIFIED
        d_set = {a for a in net.adj[x] & joined if net.is_major(a)}
    hub_linked = x is None or k is None or net.has_edge(k, x)
    term1, term2 = nullcline_terms(p, len(s_set), len(l_set), len(d_set), len(majors), hub_linked)
    return PhaseCoords(len(s_set), len(l_set), len(d_set), _region(term1, term2), x, k,
                       hub_linked, term1, term2)


def classify_reliable_phase(state: GameState, p: CostParams) -> PhaseCoords:
    """Two-star template for survivable dynamics with symmetric requirements.

    Star centers are the (at most two) minors with at least two minor
    neighbors, by minor-degree then id. ``S1`` holds non-center minors
    adjacent to center 1, ``S2`` those adjacent to center 2 only, ``L`` minors
    whose neighbors are all majors (at least two). ``D1``/``D2`` are majors
    adjacent to each center. Anything else is unclassified.
    """
    if p.mode is not Mode.RELIABLE or p.tau != 1:
        return UNCLASSIFIED
    net = state.net
    joined = set(state.joined)
    majors = sorted(v for v in joined if net.is_major(v))
    minors = sorted(v for v in joined if not net.is_major(v))
    if not all(net.has_edge(u, v) for u, v in itertools.combinations(majors, 2)):
        return UNCLASSIFIED
    minor_deg = {b: sum(1 for w in net.adj[b] if w in joined and not net.is_major(w)) for b in minors}
    centers = sorted((b for b in minors if minor_deg[b] >= 2), key=lambda b: (-minor_deg[b], b))[:2]
    c1 = centers[0] if centers else None
    c2 = centers[1] if len(centers) > 1 else None
    s1, s2, l_set = set(), set(), set()
    for b in minors:
        if b in centers:
            continue
        nbrs = net.adj[b] & joined
        if c1 is not None and c1 in nbrs:
            s1.add(b)
        elif c2 is not None and c2 in nbrs:
            s2.add(b)
        elif len(nbrs) >= 2 and all(net.is_major(w) for w in nbrs):
            l_set.add(b)
        else:
            return UNCLASSIFIED
    d1 = {a for a in majors if c1 is not None and net.has_edge(a, c1)}
    d2 = {a for a in majors if c2 is not None and net.has_edge(a, c2)}
    return PhaseCoords(len(s1), len(l_set), len(d1), Region.TEMPLATE, c1,
                       s2_size=len(s2), d2_size=len(d2))


def convergence_prediction(
    p: CostParams,
    arrival_history: Iterable[PlayerClass | str],
    n_a_total: int | None = None,
    n_b_total: int | None = None,
) -> Prediction:
    """Which attractor the bare dynamics head for, from the arrival prefix.

    ``k`` minors arrive before the first major and ``k_A`` majors arrive right
    after them. ``A*k_A > k+1`` (or, with totals, ``A*|T_A| > |T_B|``) predicts
    the optimum. With totals given and both inequalities strictly reversed,
    the star attractor is predicted when the post-burst state lies in its
    basin. Everything else is order dependent.
    """
    classes = [PlayerClass(c) for c in arrival_history]
    k = next((idx for idx, c in enumerate(classes) if c is PlayerClass.MAJOR_A), len(classes))
    k_a = 0
    for c in classes[k:]:
        if c is not PlayerClass.MAJOR_A:
            break
        k_a += 1
    if p.A * k_a > k + 1:
        return Prediction.OPTIMAL
    have_totals = n_a_total is not None and n_b_total is not None
    if have_totals and p.A * n_a_total > n_b_total:
        return Prediction.OPTIMAL
    if have_totals and p.A * k_a < k + 1 and p.A * n_a_total < n_b_total and k >= 1:
        s = k - 1
        term1, _ = nullcline_terms(p, s, 0, 0, k_a, True)
        d = k_a if term1 < 0 else 1
        term1, term2 = nullcline_terms(p, s, 0, d, k_a, True)
        if _region(term1, term2) is Region.STAR_BASIN:
            return Prediction.PROMOTED_STAR
    return Prediction.INDETERMINATE


# ---------------------------------------------------------------------------
# game loop and trace
# ---------------------------------------------------------------------------


@dataclass
class TurnRecord:
    turn: int
    player: int
    arrival: bool
    moves: list[Move]
    social_cost: Fraction | None = None
    phase: PhaseCoords | None = None
    budget_hit: bool = False

    def as_dict(self) -> dict:
        return {
            "turn": self.turn,
            "player": self.player,
            "arrival": self.arrival,
            "moves": [m.as_dict() for m in self.moves],
            "social_cost": None if self.social_cost is None else str(self.social_cost),
            "phase": None if self.phase is None else self.phase.as_dict(),
            "budget_hit": self.budget_hit,
        }


@dataclass
class Trace:
    n_a: int
    n_b: int
    config: dict
    turns: list[TurnRecord] = field(default_factory=list)
    converged: bool = False
    rounds_after_arrivals: int = 0
    active_rounds_after_arrivals: int = 0
    budget_hits: int = 0

    def arrival_order(self) -> list[int]:
        return [t.player for t in self.turns if t.arrival]

    def moves(self) -> Iterator[Move]:
        for t in self.turns:
            yield from t.moves

    def replay(self) -> GameState:
        state = GameState.empty(self.n_a, self.n_b)
        for t in self.turns:
            if t.arrival:
                state.joined.append(t.player)
            for move in t.moves:
                state.apply(move)
            state.turn = t.turn
        return state

    def to_jsonl(self) -> str:
        header = {
            "n_A": self.n_a,
            "n_B": self.n_b,
            "config": self.config,
            "converged": self.converged,
            "rounds_after_arrivals": self.rounds_after_arrivals,
            "active_rounds_after_arrivals": self.active_rounds_after_arrivals,
            "budget_hits": self.budget_hits,
        }
        lines = [json.dumps(header, sort_keys=True)]
        lines += [json.dumps(t.as_dict(), sort_keys=True) for t in self.turns]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        head = rows[0]
        trace = cls(head["n_A"], head["n_B"], head["config"], converged=head["converged"],
                    rounds_after_arrivals=head["rounds_after_arrivals"],
                    active_rounds_after_arrivals=head["active_rounds_after_arrivals"],
                    budget_hits=head["budget_hits"])
        for r in rows[1:]:
            trace.turns.append(TurnRecord(
                turn=r["turn"],
                player=r["player"],
                arrival=r["arrival"],
                moves=[Move.from_dict(m) for m in r["moves"]],
                social_cost=None if r["social_cost"] is None else Fraction(r["social_cost"]),
                budget_hit=r["budget_hit"],
            ))
        return trace


class _Runner:
    def __init__(self, cfg: DynamicsConfig, n_a: int, n_b: int):
        self.cfg = cfg
        self.state = GameState.empty(n_a, n_b)
        self.cache = CostCache(cfg.params)
        self.rng = random.Random(cfg.seed)
        self.trace = Trace(n_a, n_b, cfg.as_dict())

    def turn(self, player: int, arrival: bool) -> int:
        state = self.state
        state.turn += 1
        moves, hit = play_turn(state, player, self.cfg, self.cache, self.rng)
        record = TurnRecord(state.turn, player, arrival, moves, budget_hit=hit)
        if self.cfg.record_costs:
            ev = _Eval(state, self.cfg, self.cache)
            record.social_cost = sum((ev.cost(i) for i in state.joined), Fraction(0))
        if self.cfg.record_phases:
            if self.cfg.params.mode is Mode.RELIABLE:
                record.phase = classify_reliable_phase(state, self.cfg.params)
            else:
                record.phase = classify_phase(state, self.cfg.params)
        self.trace.turns.append(record)
        self.trace.budget_hits += hit
        return len(moves)

    def round(self, index: int) -> int:
        order = self.cfg.scheduler.round_order(self.state.joined, index)
        # scripted rounds may name players that have not arrived yet
        order = [player for player in order if player in self.state.joined]
        return sum(self.turn(player, False) for player in order)


def run_game(cfg: DynamicsConfig, n_a: int, n_b: int) -> tuple[Trace, GameState]:
    """Play arrivals, then full rounds until one passes with no moves.

    Each arrival takes a turn immediately, optionally followed by
    ``rounds_between_arrivals`` rounds over everyone present. After the last
    arrival, rounds continue until a quiet round (converged) or
    ``max_rounds``.
    """
    runner = _Runner(cfg, n_a, n_b)
    arrivals = cfg.scheduler.arrivals(n_a + n_b)
    if sorted(arrivals) != list(range(n_a + n_b)):
        raise ValueError("arrival order must list every player exactly once")
    round_index = 0
    for player in arrivals:
        runner.state.joined.append(player)
        runner.turn(player, True)
        for _ in range(cfg.rounds_between_arrivals):
            quiet = runner.round(round_index) == 0
            round_index += 1
            if quiet:
                break
    trace = runner.trace
    for _ in range(cfg.max_rounds):
        moved = runner.round(round_index)
        round_index += 1
        trace.rounds_after_arrivals += 1
        if moved == 0:
            trace.converged = True
            break
        trace.active_rounds_after_arrivals += 1
    return trace, runner.state
