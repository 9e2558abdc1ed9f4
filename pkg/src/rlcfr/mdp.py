"""Action-abstraction MDP: state encoding, action decoding, rewards.

States are public-only feature vectors; actions are 2K vectors in
[-1, 1]^2K whose (x, y) pairs decode to bet sizes; rewards are paired
depth-limited solves of the decoded abstraction against the base
abstraction at the same root, ante-normalized.

Bet-size convention: a fraction f maps to a raise by f times the pot
after calling, i.e. the action's total commit is
to_call + f * (pot + to_call) chips. All sizing helpers work from a
concrete representative state so they can serve both pbs-level callers
and the tree builder's non-root policy hook.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import PublicBeliefState, representative_state
from .cfr import DcfrParams
from .errors import NotDecisionPbsError
from .games.base import (
    ALL_IN,
    BET_RAISE,
    CHECK_CALL,
    FOLD,
    GameAction,
    GameState,
    sorted_actions,
)
from .rebel import RebelResult, rebel_solve

# The MDP is solved with single-step rewards (the critic regresses r
# directly), so the discount never enters any computation; kept for
# documentation.
MDP_DISCOUNT = 1.0

ACTION_PAIRS = 3  # K
BET_FRACTION_SCALE = 2.5  # fraction = 2.5 * (x + 1), spanning [0, 5] x pot

BASE_FRACTIONS = (0.5, 1.0, 2.0)
FINE_GRAIN_FRACTIONS = (0.25, 0.5, 0.75, 1.0, 1.25, 2.0)
MUL_ACTION_FRACTIONS = (
    (0.5, 1.0, 2.0),
    (0.25, 0.5, 1.0),
    (0.33, 0.7, 1.5),
)
NONROOT_FRACTION = 0.8

ACTION_WINDOW = 8
_KIND_SLOT = {FOLD: 0, CHECK_CALL: 1, BET_RAISE: 2, ALL_IN: 3}


def _decision_state(game, pbs: PublicBeliefState) -> GameState:
    state = representative_state(game, pbs)
    if state.is_terminal() or state.is_chance():
        raise NotDecisionPbsError("pbs at %s is not a player decision" % pbs.public.text())
    return state


def feature_length(game) -> int:
    return game.num_cards + 5 + ACTION_WINDOW * 5


def encode_features(game, state: GameState) -> np.ndarray:
    """Public-only features of a decision state; see feature_length."""
    ante = float(game.ante)
    board = np.zeros(game.num_cards)
    for c in state.board_cards:
        board[c] = 1.0
    scalars = np.array([
        state.pot / ante,
        state.stacks[0] / ante,
        state.stacks[1] / ante,
        float(state.round),
        float(state.acting),
    ])
    window = np.zeros((ACTION_WINDOW, 5))
    moves = [a for a in state.action_history if a.kind in _KIND_SLOT]
    for slot, act in enumerate(moves[-ACTION_WINDOW:]):
        window[slot, _KIND_SLOT[act.kind]] = 1.0
        window[slot, 4] = act.amount / ante
    return np.concatenate([board, scalars, window.ravel()])


def encode_state(game, pbs: PublicBeliefState) -> np.ndarray:
    """Features of a decision pbs; beliefs never enter the encoding."""
    return encode_features(game, _decision_state(game, pbs))


def _betting_context(state: GameState):
    p = state.acting
    to_call = max(state.committed[1 - p] - state.committed[p], 0)
    behind = state.stacks[p]
    return to_call, behind


def _raise_menu(game, state: GameState):
    """(sorted legal BET_RAISE amounts, all_in action or None)."""
    amounts = []
    all_in = None
    for a in game.legal_actions(state):
        if a.kind == BET_RAISE:
            amounts.append(a.amount)
        elif a.kind == ALL_IN:
            all_in = a
    return sorted(amounts), all_in


def clip_to_legal(game, state_or_pbs, raw_amount: float):
    """Nearest legal raise for a desired total commit of raw_amount chips.

    Rounds half-up, clamps below to the minimum raise and at/above the
    stack to all-in. Returns None when no raise is legal.
    """
    if isinstance(state_or_pbs, PublicBeliefState):
        state = _decision_state(game, state_or_pbs)
    else:
        state = state_or_pbs
    amounts, all_in = _raise_menu(game, state)
    if not amounts and all_in is None:
        return None
    target = int(np.floor(raw_amount + 0.5))
    _, behind = _betting_context(state)
    if target >= behind or not amounts:
        return all_in if all_in is not None else GameAction(BET_RAISE, amount=amounts[-1])
    if target < amounts[0]:
        return GameAction(BET_RAISE, amount=amounts[0])
    if target > amounts[-1]:
        return all_in if all_in is not None else GameAction(BET_RAISE, amount=amounts[-1])
    return GameAction(BET_RAISE, amount=target)


def always_set(game, state: GameState) -> list:
    keep = {FOLD, CHECK_CALL, ALL_IN}
    return sorted_actions(a for a in game.legal_actions(state) if a.kind in keep)


def _fraction_amount(state: GameState, fraction: float) -> float:
    to_call, _ = _betting_context(state)
    return to_call + fraction * (state.pot + to_call)


def fraction_abstraction(game, state: GameState, fractions) -> list:
    acts = set(always_set(game, state))
    for f in fractions:
        a = clip_to_legal(game, state, _fraction_amount(state, f))
        if a is not None:
            acts.add(a)
    return sorted_actions(acts)


def base_abstraction(game, pbs_or_state) -> list:
    state = (_decision_state(game, pbs_or_state)
             if isinstance(pbs_or_state, PublicBeliefState) else pbs_or_state)
    return fraction_abstraction(game, state, BASE_FRACTIONS)


def fine_grain_abstraction(game, pbs_or_state) -> list:
    state = (_decision_state(game, pbs_or_state)
             if isinstance(pbs_or_state, PublicBeliefState) else pbs_or_state)
    return fraction_abstraction(game, state, FINE_GRAIN_FRACTIONS)


def mul_action_candidates(game, pbs_or_state) -> list:
    state = (_decision_state(game, pbs_or_state)
             if isinstance(pbs_or_state, PublicBeliefState) else pbs_or_state)
    return [fraction_abstraction(game, state, fr) for fr in MUL_ACTION_FRACTIONS]


def nonroot_base_policy(game, state: GameState) -> list:
    """Fixed interior abstraction {F, C, A, 0.8 x pot}."""
    return fraction_abstraction(game, state, (NONROOT_FRACTION,))


def learned_nonroot_policy(actor_net):
    """Interior abstraction from the action network's clamped output."""

    def policy(game, state):
        a = actor_net.forward(encode_features(game, state))
        return decode_abstraction(game, state, a)

    return policy


def decode_abstraction(game, pbs_or_state, action_vector) -> list:
    """Always-set plus up to K decoded bet sizes, one per (x, y) pair.

    Pairs with y < 0 contribute nothing; x maps to a pot fraction
    2.5 (x + 1); results are deduped and sorted, so the decode is
    invariant to pair order.
    """
    state = (_decision_state(game, pbs_or_state)
             if isinstance(pbs_or_state, PublicBeliefState) else pbs_or_state)
    a = np.clip(np.asarray(action_vector, dtype=np.float64), -1.0, 1.0)
    if a.size % 2 != 0:
        raise NotDecisionPbsError("action vector must have 2K components")
    acts = set(always_set(game, state))
    for i in range(a.size // 2):
        x, y = a[2 * i], a[2 * i + 1]
        if y < 0.0:
            continue
        frac = BET_FRACTION_SCALE * (x + 1.0)
        act = clip_to_legal(game, state, _fraction_amount(state, frac))
        if act is not None:
            acts.add(act)
    return sorted_actions(acts)


@dataclass
class RewardResult:
    r: float
    profile_mdp: object
    profile_base: object
    root_values: tuple
    result_mdp: RebelResult
    result_base: RebelResult


def abstraction_reward(game, pbs: PublicBeliefState, aa_probe, aa_ref,
                       value_fn, params: DcfrParams, nonroot_policy=None,
                       depth_rounds: int | None = 1, tree_cache=None):
    """(probe root value - reference root value) / ante, plus both solves.

    Identical token lists skip the second solve, so the reward is an
    exact 0.0 rather than a difference of two float paths.
    """
    res_p = rebel_solve(game, pbs, aa_probe, value_fn, params,
                        nonroot_policy=nonroot_policy,
                        depth_rounds=depth_rounds, tree_cache=tree_cache)
    if [a.token() for a in aa_probe] == [a.token() for a in aa_ref]:
        return 0.0, res_p, res_p
    res_r = rebel_solve(game, pbs, aa_ref, value_fn, params,
                        nonroot_policy=nonroot_policy,
                        depth_rounds=depth_rounds, tree_cache=tree_cache)
    r = (res_p.root_value - res_r.root_value) / game.ante
    return r, res_p, res_r


def reward(game, pbs: PublicBeliefState, action_vector, value_fn,
           params: DcfrParams, nonroot_policy=None,
           depth_rounds: int | None = 1, tree_cache=None) -> RewardResult:
    """Paired-solve reward: decoded abstraction minus base, in antes."""
    aa_mdp = decode_abstraction(game, pbs, action_vector)
    aa_base = base_abstraction(game, pbs)
    r, res_m, res_b = abstraction_reward(
        game, pbs, aa_mdp, aa_base, value_fn, params,
        nonroot_policy=nonroot_policy, depth_rounds=depth_rounds,
        tree_cache=tree_cache)
    return RewardResult(
        r=r,
        profile_mdp=res_m.profile,
        profile_base=res_b.profile,
        root_values=(res_m.root_value, res_b.root_value),
        result_mdp=res_m,
        result_base=res_b,
    )


def solve_abstraction(game, pbs, abstraction, value_fn, params,
                      nonroot_policy=None, depth_rounds=1,
                      tree_cache=None) -> RebelResult:
    return rebel_solve(game, pbs, abstraction, value_fn, params,
                       nonroot_policy=nonroot_policy, depth_rounds=depth_rounds,
                       tree_cache=tree_cache)


def mul_action_select(game, pbs, candidate_abstractions, value_fn,
                      params: DcfrParams, nonroot_policy=None,
                      depth_rounds: int | None = 1, tree_cache=None):
    """Index of the candidate with the highest acting-player root value.

    Returns (index, values, results); ties resolve to the lowest index.
    """
    values = []
    results = []
    for aa in candidate_abstractions:
        res = rebel_solve(game, pbs, aa, value_fn, params,
                          nonroot_policy=nonroot_policy,
                          depth_rounds=depth_rounds, tree_cache=tree_cache)
        values.append(res.root_value)
        results.append(res)
    idx = int(np.argmax(values))
    return idx, values, results


@dataclass
class TransitionSample:
    s: np.ndarray
    a: np.ndarray
    r: float
