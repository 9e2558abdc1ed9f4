"""Belief tracking: Bayes updates, chance transitions, zero-reach guards."""

import numpy as np
import pytest

from rlcfr.belief import (acting_player, chance_outcome_probs, initial_pbs,
                          pbs_chance_transition, pbs_transition, perturb_pbs,
                          representative_state, zero_sum_adjust)
from rlcfr.cfr import StrategyProfile
from rlcfr.errors import ZeroReachError
from rlcfr.games import make_game
from rlcfr.games.base import CHECK_CALL, GameAction


def uniform_profile_for(game, pbs):
    prof = StrategyProfile()
    p = acting_player(game, pbs)
    for ci, c in enumerate(pbs.cards[p]):
        st = representative_state(game, pbs)
        if p == 0:
            other = next(j for j in pbs.cards[1]
                         if game.joint_deal_weight(c, j) > 0)
            st = game.state_from_public(pbs.public, c, other)
        else:
            other = next(i for i in pbs.cards[0]
                         if game.joint_deal_weight(i, c) > 0)
            st = game.state_from_public(pbs.public, other, c)
        acts = tuple(game.legal_actions(st))
        prof.set(game.infostate_key(st, p).text(), acts,
                 np.full(len(acts), 1.0 / len(acts)))
    return prof


def test_initial_pbs_matches_deal_prior(kuhn):
    pbs = initial_pbs(kuhn)
    pbs.validate()
    assert pbs.cards == ((0, 1, 2), (0, 1, 2))
    for p in (0, 1):
        assert np.allclose(pbs.beliefs[p], 1.0 / 3.0)
    assert acting_player(kuhn, pbs) == 0


def test_bayes_update_concentrates_on_card(kuhn):
    # a profile where only card 2 ever bets: seeing a bet reveals the card
    pbs = initial_pbs(kuhn)
    prof = StrategyProfile()
    st0 = kuhn.initial_state()
    for c in (0, 1, 2):
        s = kuhn.apply(st0, kuhn.deal_action(c, (c + 1) % 3))
        acts = tuple(kuhn.legal_actions(s))
        bet_i = next(i for i, a in enumerate(acts) if a.kind != CHECK_CALL)
        row = np.zeros(len(acts))
        if c == 2:
            row[bet_i] = 1.0
        else:
            row[1 - bet_i] = 1.0
        prof.set(kuhn.infostate_key(s, 0).text(), acts, row)
    bet = next(a for a in kuhn.legal_actions(
        kuhn.apply(st0, kuhn.deal_action(0, 1))) if a.kind != CHECK_CALL)
    out = pbs_transition(kuhn, pbs, prof, bet)
    assert np.allclose(out.beliefs[0], [0.0, 0.0, 1.0])
    # the non-acting player's beliefs are untouched
    assert np.allclose(out.beliefs[1], pbs.beliefs[1])


def test_zero_reach_strict_raises_lenient_renormalizes(kuhn):
    pbs = initial_pbs(kuhn)
    prof = StrategyProfile()
    st0 = kuhn.initial_state()
    for c in (0, 1, 2):
        s = kuhn.apply(st0, kuhn.deal_action(c, (c + 1) % 3))
        acts = tuple(kuhn.legal_actions(s))
        row = np.zeros(len(acts))
        row[next(i for i, a in enumerate(acts) if a.kind == CHECK_CALL)] = 1.0
        prof.set(kuhn.infostate_key(s, 0).text(), acts, row)
    bet = next(a for a in kuhn.legal_actions(
        kuhn.apply(st0, kuhn.deal_action(0, 1))) if a.kind != CHECK_CALL)
    with pytest.raises(ZeroReachError):
        pbs_transition(kuhn, pbs, prof, bet)
    out = pbs_transition(kuhn, pbs, prof, bet, strict=False)
    assert np.allclose(out.beliefs[0], 1.0 / 3.0)


def test_chance_transition_prunes_revealed_card(leduc5):
    pbs = initial_pbs(leduc5)
    prof = uniform_profile_for(leduc5, pbs)
    # check, check ends the round; next node reveals the board card
    chk = GameAction(CHECK_CALL)
    pbs = pbs_transition(leduc5, pbs, prof, chk)
    prof = uniform_profile_for(leduc5, pbs)
    pbs = pbs_transition(leduc5, pbs, prof, chk)
    rep = representative_state(leduc5, pbs)
    assert rep.is_chance()
    outcomes = chance_outcome_probs(leduc5, pbs)
    assert abs(sum(q for _, q in outcomes) - 1.0) < 1e-12
    nxt = pbs_chance_transition(leduc5, pbs, outcomes[0][0])
    revealed = nxt.public.board_cards[0]
    for p in (0, 1):
        assert revealed not in nxt.cards[p]
        assert abs(nxt.beliefs[p].sum() - 1.0) < 1e-12
    # every outcome must be reachable even when the representative deal
    # holds the revealed card
    for o, _ in outcomes:
        pbs_chance_transition(leduc5, pbs, o)


def test_chance_probs_respect_blockers(leduc5):
    pbs = initial_pbs(leduc5)
    prof = uniform_profile_for(leduc5, pbs)
    chk = GameAction(CHECK_CALL)
    pbs = pbs_transition(leduc5, pbs, prof, chk)
    pbs = pbs_transition(leduc5, pbs, uniform_profile_for(leduc5, pbs), chk)
    # uniform beliefs over 6 cards, two held: each remaining card is
    # equally likely; all six outcomes keep positive probability
    outcomes = chance_outcome_probs(leduc5, pbs)
    assert len(outcomes) == 6
    assert np.allclose([q for _, q in outcomes], 1.0 / 6.0)


def test_perturb_pbs_bounds(leduc5, rng):
    from dataclasses import replace

    pbs = initial_pbs(leduc5)
    # a 2-chip pot rounds back to itself; use a pot large enough to move
    pbs = type(pbs)(public=replace(pbs.public, pot=20), cards=pbs.cards,
                    beliefs=pbs.beliefs)
    pots = set()
    for _ in range(200):
        out = perturb_pbs(leduc5, pbs, rng)
        assert out.public.pot >= 2 * leduc5.ante
        # half-up rounding of pot * U[0.9, 1.1]
        assert 0.9 * pbs.public.pot - 1 <= out.public.pot <= 1.1 * pbs.public.pot + 1
        pots.add(out.public.pot)
    assert min(pots) == 18 and max(pots) == 22
    same = perturb_pbs(leduc5, pbs, rng, enabled=False)
    assert same.public.pot == pbs.public.pot


def test_perturb_pbs_floors_at_ante_total(toy, rng):
    pbs = initial_pbs(toy)
    for _ in range(100):
        out = perturb_pbs(toy, pbs, rng)
        assert out.public.pot >= 2 * toy.ante


def test_zero_sum_adjust_makes_values_balance(kuhn, rng):
    pbs = initial_pbs(kuhn)
    values = (rng.normal(size=3), rng.normal(size=3))
    adj0, adj1 = zero_sum_adjust(kuhn, pbs.cards, values, pbs.beliefs)
    ev0 = float(pbs.beliefs[0] @ adj0)
    ev1 = float(pbs.beliefs[1] @ adj1)
    assert abs(ev0 + ev1) < 1e-12
