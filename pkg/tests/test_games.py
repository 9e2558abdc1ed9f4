"""Game mechanics: enumeration invariants over every reachable state."""

import numpy as np
import pytest

from rlcfr.errors import (IllegalActionError, NotTerminalError,
                          TerminalStateError)
from rlcfr.games import make_game
from rlcfr.games.base import (ALL_IN, BET_RAISE, CHECK_CALL, FOLD, GameAction)


def enumerate_states(game, limit=200_000):
    """Every reachable state, depth first from the initial deal."""
    out = []
    stack = [game.initial_state()]
    while stack:
        s = stack.pop()
        out.append(s)
        assert len(out) < limit, "state space larger than expected"
        if s.is_terminal():
            continue
        if s.is_chance():
            outcomes = game.chance_outcomes(s)
            probs = [p for _, p in outcomes]
            assert abs(sum(probs) - 1.0) < 1e-12
            stack.extend(game.apply(s, a) for a, _ in outcomes)
        else:
            for a in game.legal_actions(s):
                stack.extend([game.apply(s, a)])
    return out


@pytest.mark.parametrize("name,stack", [("toy", None), ("kuhn", None),
                                        ("nl-leduc", 5)])
def test_state_invariants(name, stack):
    game = make_game(name) if stack is None else make_game(name, stack=stack)
    states = enumerate_states(game)
    n_terminal = 0
    for s in states:
        # chips in the middle always equal the players' total contributions
        if not s.is_chance():
            assert s.pot == pytest.approx(s.contrib[0] + s.contrib[1])
        assert s.pot >= 2 * game.ante
        assert min(s.stacks) >= 0
        if s.is_terminal():
            n_terminal += 1
            u0 = game.terminal_utility(s, 0)
            u1 = game.terminal_utility(s, 1)
            assert u0 == -u1
            if s.terminal_kind == "fold":
                loser = s.folder
                assert game.terminal_utility(s, loser) == -s.contrib[loser]
            # nobody can win more than the opponent put in
            assert abs(u0) <= max(s.contrib)
    assert n_terminal > 0


def test_toy_tree_shape(toy):
    states = enumerate_states(toy)
    terminals = [s for s in states if s.is_terminal()]
    # J: check, jam-fold, jam-call; K: jam-fold, jam-call
    assert len(terminals) == 5
    uts = sorted(toy.terminal_utility(s, 0) for s in terminals)
    assert uts == [-3.0, -1.0, 1.0, 1.0, 3.0]


def test_kuhn_showdown_and_fold_payoffs(kuhn):
    states = enumerate_states(kuhn)
    for s in states:
        if not s.is_terminal():
            continue
        c0, c1 = s.private_cards[0][0], s.private_cards[1][0]
        u0 = kuhn.terminal_utility(s, 0)
        if s.terminal_kind == "showdown":
            assert u0 == (s.contrib[1] if c0 > c1 else -s.contrib[0])
        else:
            folder = s.folder
            assert u0 == (-s.contrib[0] if folder == 0 else s.contrib[1])


def test_leduc_pair_beats_high_card():
    game = make_game("nl-leduc", stack=5)
    # six cards, two suits of three ranks
    assert game.num_cards == 6
    ranks = [game.rank_of(c) for c in range(6)]
    assert sorted(set(ranks)) == [0, 1, 2]
    states = enumerate_states(game)
    for s in states:
        if not (s.is_terminal() and s.terminal_kind == "showdown"):
            continue
        c0, c1 = s.private_cards[0][0], s.private_cards[1][0]
        board = s.board_cards[0]
        r0, r1, rb = game.rank_of(c0), game.rank_of(c1), game.rank_of(board)
        if r0 == rb and r1 != rb:
            assert game.terminal_utility(s, 0) > 0
        elif r1 == rb and r0 != rb:
            assert game.terminal_utility(s, 0) < 0
        elif r0 == r1:
            assert game.terminal_utility(s, 0) == 0


def test_action_token_round_trip():
    for a in (GameAction(FOLD), GameAction(CHECK_CALL),
              GameAction(BET_RAISE, amount=7), GameAction(ALL_IN)):
        assert GameAction.from_token(a.token()) == a
    with pytest.raises(ValueError):
        GameAction.from_token("Z9")


def test_guard_errors(kuhn):
    s = kuhn.initial_state()
    with pytest.raises(NotTerminalError):
        kuhn.terminal_utility(s, 0)
    s = kuhn.apply(s, kuhn.deal_action(0, 1))
    with pytest.raises(IllegalActionError):
        kuhn.apply(s, GameAction(BET_RAISE, amount=99))
    while not s.is_terminal():
        s = kuhn.apply(s, kuhn.legal_actions(s)[0])
    with pytest.raises(TerminalStateError):
        kuhn.apply(s, GameAction(FOLD))
    with pytest.raises(TerminalStateError):
        kuhn.legal_actions(s)


def test_deal_weights_normalize():
    for name, stack in (("toy", None), ("kuhn", None), ("nl-leduc", 5)):
        game = make_game(name) if stack is None else make_game(name, stack=stack)
        total = sum(game.joint_deal_weight(c0, c1)
                    for c0 in game.deal_cards(0) for c1 in game.deal_cards(1))
        assert total == pytest.approx(1.0)


def test_state_from_public_round_trip(leduc5):
    rng = np.random.default_rng(1)
    for _ in range(40):
        s = leduc5.initial_state()
        deals = [(c0, c1) for c0 in leduc5.deal_cards(0)
                 for c1 in leduc5.deal_cards(1)
                 if leduc5.joint_deal_weight(c0, c1) > 0]
        c0, c1 = deals[rng.integers(len(deals))]
        s = leduc5.apply(s, leduc5.deal_action(c0, c1))
        while not s.is_terminal():
            if s.is_chance():
                outs = leduc5.chance_outcomes(s)
                a = outs[rng.integers(len(outs))][0]
            else:
                acts = leduc5.legal_actions(s)
                a = acts[rng.integers(len(acts))]
                pub = leduc5.public_key(s)
                rebuilt = leduc5.state_from_public(pub, c0, c1)
                assert rebuilt.pot == s.pot
                assert rebuilt.stacks == s.stacks
                assert rebuilt.acting == s.acting
                assert leduc5.public_key(rebuilt) == pub
            s = leduc5.apply(s, a)


def test_synthetic_pot_round_start_only(leduc5):
    s = leduc5.initial_state()
    s = leduc5.apply(s, leduc5.deal_action(0, 1))
    pub = leduc5.public_key(s)
    # round start: a perturbed pot reconstructs with even contributions
    synth = type(pub)(game_id=pub.game_id, board_cards=pub.board_cards,
                      pot=pub.pot + 2, stacks=pub.stacks, round=pub.round,
                      history=pub.history)
    st = leduc5.state_from_public(synth, 0, 1)
    assert st.pot == pub.pot + 2
    assert st.contrib == (st.pot / 2.0, st.pot / 2.0)
    # mid-round (after a raise) the override must be refused
    acts = [a for a in leduc5.legal_actions(s) if a.kind == BET_RAISE]
    s2 = leduc5.apply(s, acts[0])
    pub2 = leduc5.public_key(s2)
    synth2 = type(pub2)(game_id=pub2.game_id, board_cards=pub2.board_cards,
                        pot=pub2.pot + 2, stacks=pub2.stacks, round=pub2.round,
                        history=pub2.history)
    with pytest.raises(IllegalActionError):
        leduc5.state_from_public(synth2, 0, 1)


def test_iso_groups_partition_live_cards(leduc5):
    live = list(range(leduc5.num_cards))
    groups = leduc5.iso_groups(live)
    flat = sorted(c for g in groups for c in g)
    assert flat == live
    # suits of the same rank are interchangeable before any board card
    sizes = sorted(len(g) for g in groups)
    assert sizes == [2, 2, 2]


def test_make_game_rejects_unknown():
    with pytest.raises(ValueError):
        make_game("omaha")
