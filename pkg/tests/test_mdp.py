"""Betting-abstraction MDP: encoding, clipping, decode, reward."""

import dataclasses

import numpy as np
import pytest

from rlcfr import mdp
from rlcfr.belief import initial_pbs, pbs_transition, representative_state
from rlcfr.cfr import DcfrParams, StrategyProfile, TerminalOnlyEvaluator
from rlcfr.errors import NotDecisionPbsError
from rlcfr.games.base import ALL_IN, BET_RAISE, CHECK_CALL, FOLD, GameAction


def uniform_profile_for(game, pbs):
    prof = StrategyProfile()
    st = representative_state(game, pbs)
    p = st.acting
    for c in pbs.cards[p]:
        if p == 0:
            other = next(j for j in pbs.cards[1]
                         if game.joint_deal_weight(c, j) > 0.0)
            s = game.state_from_public(pbs.public, c, other)
        else:
            other = next(i for i in pbs.cards[0]
                         if game.joint_deal_weight(i, c) > 0.0)
            s = game.state_from_public(pbs.public, other, c)
        acts = tuple(game.legal_actions(s))
        prof.set(game.infostate_key(s, p).text(), acts,
                 np.full(len(acts), 1.0 / len(acts)))
    return prof


def test_feature_length_matches_encoding(toy, kuhn, leduc5):
    for g in (toy, kuhn, leduc5):
        vec = mdp.encode_state(g, initial_pbs(g))
        assert vec.shape == (mdp.feature_length(g),)


def test_encoding_is_public_only(leduc5):
    pbs = initial_pbs(leduc5)
    vec = mdp.encode_state(leduc5, pbs)
    nc = leduc5.num_cards
    assert np.all(vec[:nc] == 0.0)  # no board yet
    pot, s0, s1, rnd, acting = vec[nc:nc + 5]
    assert pot == pytest.approx(2.0)
    assert s0 == s1 == pytest.approx(4.0)
    assert rnd == 1.0
    assert acting == 0.0
    assert np.all(vec[nc + 5:] == 0.0)  # empty action window
    # beliefs must not leak into the features
    skew = (np.array([1.0, 0, 0, 0, 0, 0]), pbs.beliefs[1])
    pbs2 = dataclasses.replace(pbs, beliefs=skew)
    assert np.array_equal(mdp.encode_state(leduc5, pbs2), vec)


def _walk_min_raises(game):
    """Deal (0, 1), min-raise until exhausted, then shove; returns the
    state facing the all-in."""
    s = game.apply(game.initial_state(), game.deal_action(0, 1))
    while True:
        raises = [a for a in game.legal_actions(s) if a.kind == BET_RAISE]
        if not raises:
            return game.apply(s, GameAction(ALL_IN))
        s = game.apply(s, min(raises, key=lambda a: a.amount))


def test_window_one_hot_rows(leduc5):
    g = leduc5
    s = g.apply(g.initial_state(), g.deal_action(0, 1))
    s = g.apply(s, GameAction(BET_RAISE, amount=1))
    s = g.apply(s, GameAction(BET_RAISE, amount=2))
    vec = mdp.encode_features(g, s)
    win = vec[g.num_cards + 5:].reshape(mdp.ACTION_WINDOW, 5)
    assert np.array_equal(win[0], [0, 0, 1, 0, 1.0])
    assert np.array_equal(win[1], [0, 0, 1, 0, 2.0])
    assert np.all(win[2:] == 0.0)


def test_window_truncates_to_last_eight():
    from rlcfr.games import make_game

    g = make_game("nl-leduc", stack=10)
    s = _walk_min_raises(g)
    moves = [a for a in s.action_history if a.kind in mdp._KIND_SLOT]
    assert len(moves) > mdp.ACTION_WINDOW
    win = mdp.encode_features(g, s)[g.num_cards + 5:].reshape(
        mdp.ACTION_WINDOW, 5)
    for slot, act in enumerate(moves[-mdp.ACTION_WINDOW:]):
        assert win[slot, mdp._KIND_SLOT[act.kind]] == 1.0
        assert win[slot, 4] == pytest.approx(act.amount / g.ante)


def test_clip_to_legal_menu(leduc5):
    # root: legal raises 1..3, all-in at 4 behind
    pbs = initial_pbs(leduc5)
    cases = [
        (0.2, "R1"),   # below the minimum raise
        (3.4, "R3"),   # floor(3.9) = 3
        (3.5, "A"),    # half-up to 4 = stack behind
        (7.0, "A"),    # clamp above
        (2.0, "R2"),   # exact member
    ]
    for raw, tok in cases:
        assert mdp.clip_to_legal(leduc5, pbs, raw).token() == tok


def test_clip_returns_none_when_no_raise_is_legal(leduc5):
    st = representative_state(leduc5, initial_pbs(leduc5))
    st = leduc5.apply(st, GameAction(ALL_IN))
    assert [a.token() for a in leduc5.legal_actions(st)] == ["F", "C"]
    assert mdp.clip_to_legal(leduc5, st, 3.0) is None


def test_always_set(leduc5):
    st = representative_state(leduc5, initial_pbs(leduc5))
    assert [a.token() for a in mdp.always_set(leduc5, st)] == ["C", "A"]
    st2 = leduc5.apply(st, GameAction(BET_RAISE, amount=2))
    assert [a.token() for a in mdp.always_set(leduc5, st2)] == ["F", "C", "A"]


def test_fraction_menus_at_root(leduc5):
    # pot 2, to_call 0: fraction f maps to a raise of 2f chips
    pbs = initial_pbs(leduc5)
    toks = lambda aa: [a.token() for a in aa]
    assert toks(mdp.base_abstraction(leduc5, pbs)) == ["C", "R1", "R2", "A"]
    assert toks(mdp.fine_grain_abstraction(leduc5, pbs)) == [
        "C", "R1", "R2", "R3", "A"]
    cands = mdp.mul_action_candidates(leduc5, pbs)
    assert len(cands) == len(mdp.MUL_ACTION_FRACTIONS)
    assert toks(cands[0]) == toks(mdp.base_abstraction(leduc5, pbs))
    assert toks(cands[2]) == ["C", "R1", "R3", "A"]


def test_decode_skips_negative_y(leduc5):
    pbs = initial_pbs(leduc5)
    nothing = mdp.decode_abstraction(leduc5, pbs, [0.3, -0.5, -0.9, -1.0, 0.0, -0.1])
    st = representative_state(leduc5, pbs)
    assert nothing == mdp.always_set(leduc5, st)


def test_decode_dedupes_and_ignores_pair_order(leduc5):
    pbs = initial_pbs(leduc5)
    # x = -0.8 -> fraction 0.5 -> raise 1; duplicated pair adds nothing
    a = mdp.decode_abstraction(leduc5, pbs, [-0.8, 1.0, -0.8, 0.5, -0.6, 1.0])
    b = mdp.decode_abstraction(leduc5, pbs, [-0.6, 1.0, -0.8, 0.5, -0.8, 1.0])
    assert [x.token() for x in a] == ["C", "R1", "R2", "A"]
    assert a == b


def test_decode_clamps_components(leduc5):
    pbs = initial_pbs(leduc5)
    # x clamps to 1 -> fraction 5 -> 10 chips -> all-in; y clamps to 1
    aa = mdp.decode_abstraction(leduc5, pbs, [5.0, 9.0])
    assert [x.token() for x in aa] == ["C", "A"]
    # x clamps to -1 -> fraction 0 -> 0 chips -> minimum raise
    aa = mdp.decode_abstraction(leduc5, pbs, [-7.0, 1.0])
    assert [x.token() for x in aa] == ["C", "R1", "A"]


def test_decode_rejects_odd_vector(leduc5):
    with pytest.raises(NotDecisionPbsError):
        mdp.decode_abstraction(leduc5, initial_pbs(leduc5), [0.1, 0.2, 0.3])


def test_reward_is_exact_zero_on_identical_tokens(leduc5):
    pbs = initial_pbs(leduc5)
    base = mdp.base_abstraction(leduc5, pbs)
    r, res_p, res_r = mdp.abstraction_reward(
        leduc5, pbs, list(base), list(base), TerminalOnlyEvaluator(),
        DcfrParams(iterations=20), nonroot_policy=mdp.nonroot_base_policy,
        depth_rounds=None)
    assert r == 0.0
    assert res_p is res_r  # the second solve is skipped outright


def test_reward_pairs_decoded_against_base(leduc5):
    pbs = initial_pbs(leduc5)
    # pairs decoding exactly to the base menu: raises of 1 and 2 chips
    vec = [-0.8, 1.0, -0.6, 1.0, 0.0, -1.0]
    out = mdp.reward(leduc5, pbs, vec, TerminalOnlyEvaluator(),
                     DcfrParams(iterations=20),
                     nonroot_policy=mdp.nonroot_base_policy,
                     depth_rounds=None)
    assert out.r == 0.0
    assert out.result_mdp is out.result_base
    assert out.root_values[0] == out.root_values[1]


def test_mul_action_select_tie_prefers_lowest_index(leduc5):
    pbs = initial_pbs(leduc5)
    base = mdp.base_abstraction(leduc5, pbs)
    idx, values, results = mdp.mul_action_select(
        leduc5, pbs, [list(base), list(base)], TerminalOnlyEvaluator(),
        DcfrParams(iterations=20), nonroot_policy=mdp.nonroot_base_policy,
        depth_rounds=None)
    assert idx == 0
    assert values[0] == values[1]
    assert len(results) == 2


def test_encode_state_rejects_chance_pbs(leduc5):
    pbs = initial_pbs(leduc5)
    chk = GameAction(CHECK_CALL)
    pbs = pbs_transition(leduc5, pbs, uniform_profile_for(leduc5, pbs), chk)
    pbs = pbs_transition(leduc5, pbs, uniform_profile_for(leduc5, pbs), chk)
    with pytest.raises(NotDecisionPbsError):
        mdp.encode_state(leduc5, pbs)
