"""Head-to-head harness: rounding, ledgers, duplicate matches, agents."""

import math

import numpy as np
import pytest

from rlcfr.agents import AgentSpec, make_agent
from rlcfr.cfr import DcfrParams
from rlcfr.errors import (ConfigError, EmptyAbstractionError,
                          IllegalAbstractionError)
from rlcfr.games.base import ALL_IN, BET_RAISE, CHECK_CALL, FOLD, GameAction
from rlcfr.match import (evaluate_exploitability, parse_ledger_line,
                         play_match, replay_hand, round_off_tree)


def _menu(*specs):
    out = []
    for kind, amount in specs:
        out.append(GameAction(kind, amount=amount))
    return out


def test_round_off_exact_member_passes_through():
    menu = _menu((CHECK_CALL, 0), (BET_RAISE, 2), (BET_RAISE, 8), (ALL_IN, 0))
    got = round_off_tree(GameAction(BET_RAISE, amount=8), menu)
    assert got.kind == BET_RAISE and got.amount == 8
    assert round_off_tree(GameAction(ALL_IN), menu).kind == ALL_IN


def test_round_off_uses_log_distance():
    menu = _menu((BET_RAISE, 2), (BET_RAISE, 8))
    # log 6 sits closer to log 8 than to log 2
    assert round_off_tree(GameAction(BET_RAISE, amount=6), menu).amount == 8
    # log 4 is equidistant; ties go to the smaller bet
    assert round_off_tree(GameAction(BET_RAISE, amount=4), menu).amount == 2
    # clamping at both ends
    assert round_off_tree(GameAction(BET_RAISE, amount=100), menu).amount == 8
    assert round_off_tree(GameAction(BET_RAISE, amount=1), menu).amount == 2


def test_round_off_degenerate_menus():
    with pytest.raises(EmptyAbstractionError):
        round_off_tree(GameAction(BET_RAISE, amount=3), [])
    with pytest.raises(IllegalAbstractionError):
        round_off_tree(GameAction(FOLD), _menu((CHECK_CALL, 0)))
    # no bets in the menu: a bet rounds to all-in, else check
    got = round_off_tree(GameAction(BET_RAISE, amount=3),
                         _menu((CHECK_CALL, 0), (ALL_IN, 0)))
    assert got.kind == ALL_IN
    got = round_off_tree(GameAction(BET_RAISE, amount=3),
                         _menu((CHECK_CALL, 0),))
    assert got.kind == CHECK_CALL


def test_match_swapping_agents_negates_the_mean(leduc5):
    a = make_agent(leduc5, AgentSpec(kind="BASE_FIXED",
                                     params=DcfrParams(iterations=80)), "a")
    b = make_agent(leduc5, AgentSpec(kind="UNIFORM"), "b")
    ab = play_match(leduc5, a, b, 40, seed=5)
    ba = play_match(leduc5, b, a, 40, seed=5)
    assert ba.mean_ma == -ab.mean_ma
    assert np.array_equal(np.sort(ba.net_chips), np.sort(-ab.net_chips))


def test_mirrored_self_play_pairs_cancel_exactly(leduc5):
    a = make_agent(leduc5, AgentSpec(kind="BASE_FIXED",
                                     params=DcfrParams(iterations=60)))
    res = play_match(leduc5, a, a, 60, seed=2, mirror=True)
    pair_sums = res.net_chips[0::2] + res.net_chips[1::2]
    assert np.all(pair_sums == 0.0)
    assert res.mean_ma == 0.0
    # independent hands lose the pairing and the cancellation
    loose = play_match(leduc5, a, a, 60, seed=2, mirror=False)
    assert np.any(loose.net_chips[0::2] + loose.net_chips[1::2] != 0.0)


def test_ledger_lines_replay_to_recorded_outcomes(leduc5):
    a = make_agent(leduc5, AgentSpec(kind="BASE_FIXED",
                                     params=DcfrParams(iterations=60)))
    b = make_agent(leduc5, AgentSpec(kind="UNIFORM"))
    res = play_match(leduc5, a, b, 30, seed=9)
    assert len(res.ledger) == 30
    for line in res.ledger:
        rec = parse_ledger_line(line)
        assert replay_hand(leduc5, rec) == pytest.approx(rec.net_a)
    # round trip through text is lossless
    rec = parse_ledger_line(res.ledger[7])
    assert parse_ledger_line(rec.line()) == rec


def test_empty_match_result(leduc5):
    a = make_agent(leduc5, AgentSpec(kind="UNIFORM"))
    res = play_match(leduc5, a, a, 0)
    assert res.empty
    assert res.n_hands == 0 and res.net_chips.size == 0
    assert math.isnan(res.se_ma)


def test_exploitability_ranks_agents(kuhn):
    nash = make_agent(kuhn, AgentSpec(kind="EXACT_NASH"))
    solver = make_agent(kuhn, AgentSpec(kind="BASE_FIXED",
                                        params=DcfrParams(iterations=400)))
    naive = make_agent(kuhn, AgentSpec(kind="UNIFORM"))
    m_nash, _, _ = evaluate_exploitability(kuhn, nash, 5, round_filter=1)
    m_solver, _, _ = evaluate_exploitability(kuhn, solver, 5, round_filter=1)
    m_naive, _, _ = evaluate_exploitability(kuhn, naive, 5, round_filter=1)
    assert m_nash <= 1e-6
    assert m_nash <= m_solver < m_naive


def test_exploitability_empty_sample_is_nan(kuhn):
    agent = make_agent(kuhn, AgentSpec(kind="UNIFORM"))
    # kuhn has one round; nothing matches a round-5 filter
    mean, se, vals = evaluate_exploitability(kuhn, agent, 3, round_filter=5,
                                             max_walks=200)
    assert math.isnan(mean) and math.isnan(se) and vals.size == 0


def test_agent_spec_guards():
    with pytest.raises(ConfigError):
        AgentSpec(kind="NOT_A_KIND")
    with pytest.raises(ConfigError):
        AgentSpec(kind="RLCFR")  # checkpoints are required
    with pytest.raises(ConfigError):
        AgentSpec(kind="BASE_FIXED", depth_rounds=1)  # no value net
    AgentSpec(kind="UNIFORM", depth_rounds=1)  # uniform never prices leaves


def test_agent_act_returns_legal_action(toy, rng):
    from rlcfr.belief import initial_pbs, representative_state

    agent = make_agent(toy, AgentSpec(kind="BASE_FIXED",
                                      params=DcfrParams(iterations=50)))
    pbs = initial_pbs(toy)
    rep = representative_state(toy, pbs)
    card = rep.private_cards[rep.acting][0]
    action, node = agent.act(pbs, card, rng)
    assert action in toy.legal_actions(rep)
    assert node.profile is agent.solve_at(pbs).profile  # cached solve
