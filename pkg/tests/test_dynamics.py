from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netgame.cost import Action, CostParams, Mode, delta_cost, node_cost, social_cost
from netgame.dynamics import (
    CostCache,
    DynamicsConfig,
    GameState,
    Move,
    Prediction,
    Preference,
    Pricing,
    Region,
    RoundRobin,
    Rule,
    Scripted,
    Trace,
    UniformRandom,
    choose_partner,
    classify_phase,
    classify_reliable_phase,
    convergence_prediction,
    greedy_accept,
    play_turn,
    price_quote,
    run_game,
)
from netgame.equilibrium import (
    is_pairwise_stable,
    is_pairwise_stable_with_transfers,
    optimal_bare_network,
    optimal_reliable_stable_network,
)
from netgame.graph import Network, PlayerClass

P = CostParams(3, 2, 2)
P_SPLIT = CostParams(3, 2, 4)  # c_B > A: a minor never pays for a second major link
P_CHEAP = CostParams(3, Fraction(3, 2), Fraction(3, 2))


def joined_state(net: Network) -> GameState:
    return GameState(net, list(range(net.n)))


def replay_checks(trace: Trace, cfg: DynamicsConfig):
    """Walk the trace, yielding ``(state_before, move)`` for every move."""
    state = GameState.empty(trace.n_a, trace.n_b)
    for t in trace.turns:
        if t.arrival:
            state.joined.append(t.player)
        for move in t.moves:
            yield state, move
            state.apply(move)


class TestGreedyAccept:
    def test_examples(self):
        assert greedy_accept(Fraction(-1))
        assert not greedy_accept(Fraction(0))
        assert greedy_accept(Fraction(2), Fraction(3))

    def test_exact_compensation(self):
        assert greedy_accept(Fraction(2), Fraction(2))
        assert not greedy_accept(Fraction(2), Fraction(1))


class TestPriceQuote:
    def test_payee_gains(self):
        state = joined_state(Network.from_counts(0, 2))
        assert price_quote(state, 0, 1, Pricing.EFFICIENT, P) == 0

    def test_payee_loses_two(self):
        state = joined_state(Network.from_counts(0, 3, [(0, 1), (1, 2)]))
        p = CostParams(3, 3, 3)
        assert price_quote(state, 0, 2, Pricing.EFFICIENT, p) == 2

    def test_strategic_tie_collapses_to_efficient(self):
        # leaves of a star are interchangeable, so alpha is 0
        state = joined_state(Network.from_counts(0, 4, [(0, 1), (0, 2), (0, 3)]))
        p = CostParams(3, 3, 3)
        assert price_quote(state, 1, 2, "strategic", p) == price_quote(state, 1, 2, "efficient", p) == 2

    def test_strategic_charges_excess(self):
        # Minor 2 is a hub for major 0 and minors 1, 3. For payer 1 the least
        # useful partner is 3 (dC = 3 - 1 = 2, asking P* = 2); the major saves
        # it 2 more (dC = 3 - 3 = 0), so the major asks 0 + 2 + 2 = 4.
        state = joined_state(Network.from_counts(1, 3, [(0, 2), (1, 2), (2, 3)]))
        p = CostParams(3, 2, 3)
        assert price_quote(state, 1, 0, Pricing.EFFICIENT, p) == 1
        assert price_quote(state, 1, 0, Pricing.STRATEGIC, p) == 4
        assert price_quote(state, 1, 3, Pricing.STRATEGIC, p) == 2

    def test_existing_edge(self):
        state = joined_state(Network.from_counts(0, 2, [(0, 1)]))
        with pytest.raises(ValueError):
            price_quote(state, 0, 1, Pricing.EFFICIENT, P)


class TestChoosePartner:
    def test_single_beneficial_partner(self):
        state = GameState(Network.from_counts(1, 1), [0, 1])
        assert choose_partner(state, 1, DynamicsConfig(P)) == 0

    def test_none_when_nothing_helps(self):
        net = optimal_bare_network(P, 1, 3)
        assert choose_partner(joined_state(net), 2, DynamicsConfig(P)) is None

    def _tie_state(self):
        # For player 3: partner 2 yields dC = -3 at price 0, partner 5 yields
        # dC = -5 at price 2. Both total -3.
        net = Network.from_counts(2, 4, [(0, 1), (0, 2), (0, 5), (1, 5), (3, 4), (4, 5)])
        return joined_state(net), CostParams(3, 2, 3)

    def test_cheapest_equivalent(self):
        state, p = self._tie_state()
        cfg = DynamicsConfig(p, transfers=True, preference=Preference.CHEAPEST)
        assert price_quote(state, 3, 2, Pricing.EFFICIENT, p) == 0
        assert price_quote(state, 3, 5, Pricing.EFFICIENT, p) == 2
        assert choose_partner(state, 3, cfg) == 2

    def test_efficient_preference_counts_partner_gain(self):
        state, p = self._tie_state()
        cfg = DynamicsConfig(p, transfers=True, preference=Preference.EFFICIENT)
        assert choose_partner(state, 3, cfg) == 5


class TestPlayTurn:
    def test_newcomer_links_to_major(self):
        state = GameState(Network.from_counts(1, 1), [0, 1])
        moves, hit = play_turn(state, 1, DynamicsConfig(P))
        assert [(m.edge, m.action) for m in moves] == [((0, 1), Action.ADD)] and not hit

    def test_stable_position_is_quiet(self):
        state = joined_state(optimal_bare_network(P, 1, 3))
        assert play_turn(state, 2, DynamicsConfig(P)) == ([], False)

    def test_requires_joined(self):
        with pytest.raises(ValueError):
            play_turn(GameState(Network.from_counts(0, 2), [0]), 1, DynamicsConfig(P))

    def test_planned_defection_from_star_leaf(self):
        # Leaf 2 hangs off the minor center 1, which links to the hub 0.
        net = Network.from_counts(1, 2, [(0, 1), (1, 2)])
        coords = classify_phase(joined_state(net), P_SPLIT)
        assert (coords.s_size, coords.l_size, coords.d_size) == (1, 0, 1)
        assert coords.term2 < 0
        strict, _ = play_turn(joined_state(net), 2, DynamicsConfig(P_SPLIT, rule=Rule.STRICT))
        assert strict == []
        state = joined_state(net)
        planned, _ = play_turn(state, 2, DynamicsConfig(P_SPLIT, rule=Rule.PLANNED))
        assert [(m.edge, m.action) for m in planned] == [((1, 2), Action.REMOVE), ((0, 2), Action.ADD)]
        assert node_cost(state.net, P_SPLIT, 2).total < node_cost(net, P_SPLIT, 2).total


class TestRunGame:
    def test_scripted_star(self):
        cfg = DynamicsConfig(P, rule=Rule.STRICT, scheduler=Scripted((0, 1, 2, 3)))
        trace, state = run_game(cfg, 1, 3)
        assert trace.converged
        assert state.net.edges() == [(0, 1), (0, 2), (0, 3)]
        assert is_pairwise_stable(state.net, P).stable

    @pytest.mark.parametrize("seed", range(3))
    def test_many_majors_reach_optimum(self, seed):
        cfg = DynamicsConfig(P_SPLIT, rule=Rule.PLANNED, scheduler=UniformRandom(seed), seed=seed,
                             record_costs=False)
        trace, state = run_game(cfg, 4, 10)
        assert trace.converged
        assert social_cost(state.net, P_SPLIT) == social_cost(optimal_bare_network(P_SPLIT, 4, 10), P_SPLIT)

    def test_settlement_free_clique(self):
        cfg = DynamicsConfig(P_CHEAP, rule=Rule.STRICT, transfers=True, scheduler=UniformRandom(3), seed=3)
        trace, state = run_game(cfg, 3, 4)
        assert state.net == optimal_bare_network(P_CHEAP, 3, 4)
        assert is_pairwise_stable_with_transfers(state.net, P_CHEAP).stable
        majors = state.net.majors()
        assert all(state.ledger.get((a, b), 0) == 0 for a in majors for b in majors if a != b)

    def test_bad_arrival_order(self):
        with pytest.raises(ValueError):
            run_game(DynamicsConfig(P, scheduler=Scripted((0, 0))), 1, 1)

    def test_max_rounds_validated(self):
        with pytest.raises(ValueError):
            DynamicsConfig(P, max_rounds=0)

    def test_non_convergence_is_flagged(self):
        cfg = DynamicsConfig(P, scheduler=Scripted((0, 1, 2)), max_rounds=1, rounds_between_arrivals=0)
        trace, _ = run_game(cfg, 0, 3)
        assert trace.rounds_after_arrivals == 1
        assert trace.converged == (trace.active_rounds_after_arrivals == 0)

    def test_scripted_turns(self):
        cfg = DynamicsConfig(P, scheduler=Scripted((0, 1, 2), turns=((2, 1),)), rounds_between_arrivals=1)
        trace, _ = run_game(cfg, 1, 2)
        assert [t.player for t in trace.turns][:2] == [0, 1]

    def test_cost_cache_counts(self):
        cache = CostCache(P)
        net = Network.from_counts(0, 2, [(0, 1)])
        cache.cost(net, 0, frozenset({0, 1}))
        cache.cost(net, 0, frozenset({0, 1}))
        assert (cache.hits, cache.misses) == (1, 1)


game_settings = st.fixed_dictionaries(
    {
        "n_a": st.integers(1, 3),
        "n_b": st.integers(0, 4),
        "seed": st.integers(0, 10**6),
        "transfers": st.booleans(),
        "pricing": st.sampled_from(list(Pricing)),
        "preference": st.sampled_from(list(Preference)),
        "mode": st.sampled_from([Mode.BARE, Mode.RELIABLE]),
    }
)


def _config(s, rule=Rule.STRICT):
    p = CostParams(3, 2, 3, delta=Fraction(1, 2), mode=s["mode"])
    return DynamicsConfig(p, rule=rule, transfers=s["transfers"], pricing=s["pricing"],
                          preference=s["preference"], scheduler=UniformRandom(s["seed"]),
                          seed=s["seed"], max_rounds=8)


class TestProperties:
    @given(game_settings)
    @settings(max_examples=25, deadline=None)
    def test_replay_determinism(self, s):
        cfg_a, cfg_b = _config(s), _config(s)
        trace_a, state_a = run_game(cfg_a, s["n_a"], s["n_b"])
        trace_b, _ = run_game(cfg_b, s["n_a"], s["n_b"])
        assert trace_a.to_jsonl() == trace_b.to_jsonl()
        replayed = trace_a.replay()
        assert replayed.net == state_a.net and replayed.ledger == state_a.ledger
        state_a.check_ledger()

    @given(game_settings)
    @settings(max_examples=25, deadline=None)
    def test_jsonl_round_trip(self, s):
        trace, state = run_game(_config(s), s["n_a"], s["n_b"])
        again = Trace.from_jsonl(trace.to_jsonl())
        assert again.to_jsonl() == trace.to_jsonl()
        assert again.replay().net == state.net

    @given(game_settings)
    @settings(max_examples=25, deadline=None)
    def test_strict_moves_lower_actor_cost(self, s):
        cfg = _config(s)
        trace, _ = run_game(cfg, s["n_a"], s["n_b"])
        for before, move in replay_checks(trace, cfg):
            after = before.copy()
            after.apply(move)
            among = before.among()
            money = lambda st_, i: node_cost(st_.net, cfg.params, i, among).total + st_.balance(i)  # noqa: E731
            assert money(after, move.actor) - money(before, move.actor) == move.actor_delta
            assert move.actor_delta < 0

    @given(game_settings, st.sampled_from([Rule.STRICT, Rule.PLANNED]))
    @settings(max_examples=20, deadline=None)
    def test_additions_are_bilateral(self, s, rule):
        cfg = _config(s, rule)
        trace, _ = run_game(cfg, s["n_a"], s["n_b"])
        for before, move in replay_checks(trace, cfg):
            if move.action is not Action.ADD:
                continue
            d_j = delta_cost(before.net, cfg.params, move.partner, move.edge, Action.ADD, among=before.among())
            assert d_j == move.partner_delta
            assert greedy_accept(d_j, move.payment)

    def test_round_robin_order(self):
        assert RoundRobin().arrivals(3) == [0, 1, 2]
        assert RoundRobin((2, 0, 1)).round_order([2, 0, 1], 0) == [2, 0, 1]

    def test_uniform_random_is_seeded(self):
        assert UniformRandom(5).arrivals(10) == UniformRandom(5).arrivals(10)


def _max_distance_pair(state: GameState, p: CostParams) -> set[int]:
    among = state.among()
    net = state.net

    def distance_cost(i):
        c = p.c_A if net.is_major(i) else p.c_B
        return node_cost(net, p, i, among).total - c * net.degree(i)

    scores = {i: distance_cost(i) for i in among}
    ranked = sorted(scores.values(), reverse=True)
    return {i for i, v in scores.items() if v >= ranked[1]}


@pytest.mark.parametrize("tau", [0, 1])
def test_entangled_cycles_burst(tau):
    # Four majors (sqrt(4c) < 4) in a clique; minor 4 is dual-homed and
    # carries the adjacent pair 5, 6, which have the largest distance cost.
    # A burst of minors 7..11 then arrives, each acting once on arrival.
    p = CostParams(10, 3, 4, delta=1, tau=tau, mode=Mode.RELIABLE)
    edges = [(a, b) for a in range(4) for b in range(a + 1, 4)] + [(0, 4), (1, 4), (4, 5), (4, 6), (5, 6)]
    state = GameState(Network.from_counts(4, 8, edges), list(range(7)))
    assert _max_distance_pair(state, p) == {5, 6}
    cfg = DynamicsConfig(p, transfers=True, pricing=Pricing.STRATEGIC, preference=Preference.CHEAPEST)
    for x in range(7, 12):
        expected = _max_distance_pair(state, p)
        state.joined.append(x)
        moves, _ = play_turn(state, x, cfg)
        adds = [m.partner for m in moves if m.action is Action.ADD]
        assert len(adds) >= 2 and set(adds[:2]) <= expected


class TestPhase:
    def test_optimal_star_on_major(self):
        state = joined_state(optimal_bare_network(P, 2, 4))
        coords = classify_phase(state, P)
        assert coords.s_size == 0 and coords.d_size in (0, 1)
        assert coords.region is Region.OPTIMAL_BASIN

    def test_full_minor_star(self):
        n_a, n_b = 2, 4
        x = n_a
        edges = [(0, 1)] + [(x, b) for b in range(n_a + 1, n_a + n_b)] + [(a, x) for a in range(n_a)]
        coords = classify_phase(joined_state(Network.from_counts(n_a, n_b, edges)), P)
        assert (coords.s_size, coords.d_size, coords.center) == (n_b - 1, n_a, x)
        assert coords.s_size + coords.l_size + 1 <= n_b

    def test_dense_graph_unclassified(self):
        net = Network.from_counts(1, 4, [(u, v) for u in range(5) for v in range(u + 1, 5)])
        assert classify_phase(joined_state(net), P).region is Region.UNCLASSIFIED

    def test_region_zero_handling(self):
        # term1 = c_A - |S| - 1 = 0 falls on the star side
        net = Network.from_counts(1, 3, [(0, 1), (1, 2)])
        coords = classify_phase(GameState(net, [0, 1, 2]), CostParams(3, 2, 4))
        assert coords.term1 == 0 and coords.region in (Region.STAR_BASIN, Region.MIXED_LOW)

    def test_reliable_template_on_optimum(self):
        p = CostParams(10, 3, 4, mode=Mode.RELIABLE)
        coords = classify_reliable_phase(joined_state(optimal_reliable_stable_network(p, 3, 4)), p)
        assert (coords.s_size, coords.s2_size, coords.l_size) == (0, 0, 4)

    def test_reliable_double_star(self):
        p = CostParams(10, 3, 4, mode=Mode.RELIABLE)
        # centers 2 (leaves 4, 5, 6) and 3 (leaves 7, 8); centers hang off both majors
        edges = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]
        edges += [(2, b) for b in (4, 5, 6)] + [(3, b) for b in (7, 8)] + [(2, 4), (4, 5), (7, 8)]
        edges = sorted(set(tuple(sorted(e)) for e in edges))
        coords = classify_reliable_phase(joined_state(Network.from_counts(2, 7, edges)), p)
        assert (coords.s_size, coords.s2_size, coords.d_size, coords.d2_size) == (3, 2, 2, 2)

    def test_reliable_needs_symmetric_context(self):
        state = joined_state(optimal_bare_network(P, 2, 3))
        assert classify_reliable_phase(state, P).region is Region.UNCLASSIFIED


class TestPrediction:
    def test_major_first(self):
        assert convergence_prediction(P, ["A", "B", "B"]) is Prediction.OPTIMAL

    def test_totals(self):
        history = [PlayerClass.MINOR_B] * 3 + [PlayerClass.MAJOR_A]
        assert convergence_prediction(P, history, n_a_total=4, n_b_total=10) is Prediction.OPTIMAL

    def test_indeterminate(self):
        p = CostParams(2, 1, 1)
        assert convergence_prediction(p, ["B"] * 5 + ["A"]) is Prediction.INDETERMINATE

    def test_promoted_star(self):
        # Six minors ahead of the only major: A*k_A = 2 < 7 and A*|T_A| = 2 < 10.
        # The burst leaves S = 5, D = 1 with term1 = 3/2 - 6 < 0 and
        # term2 = -2(1 + 1 - 1) + 1 + 5 > 0.
        p = CostParams(2, Fraction(3, 2), 4)
        result = convergence_prediction(p, ["B"] * 6 + ["A"], n_a_total=1, n_b_total=10)
        assert result is Prediction.PROMOTED_STAR
        assert convergence_prediction(p, ["B"] * 6 + ["A"]) is Prediction.INDETERMINATE


def test_phases_recorded_when_asked():
    cfg = DynamicsConfig(P, scheduler=Scripted((0, 1, 2)), record_phases=True)
    trace, _ = run_game(cfg, 1, 2)
    assert all(t.phase is not None for t in trace.turns)


def test_move_dict_round_trip():
    move = Move(1, 2, Action.ADD, Fraction(3, 2), Fraction(-1), Fraction(1, 3), priced=True)
    assert Move.from_dict(move.as_dict()) == move


def test_converged_states_are_rest_points():
    # Greedy moves need strict gains, so a rest point tolerates zero-delta
    # additions that the pairwise stability check flags.
    rng = random.Random(11)
    for _ in range(5):
        seed = rng.randrange(10**6)
        cfg = DynamicsConfig(P, scheduler=UniformRandom(seed), seed=seed)
        trace, state = run_game(cfg, 2, 4)
        assert trace.converged
        report = is_pairwise_stable(state.net, P, removal_tie_violates=False)
        for v in report.violations:
            assert v.action is Action.ADD and max(v.deltas) == 0
