"""Public belief states: construction, Bayes transitions, perturbation,
zero-sum value adjustment, and the sample collector.

Beliefs are stored as per-player probability arrays aligned with the
player's live private cards at the public state (cards not on the
board). The spec-facing map view keyed by infostate is derived on
demand.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import (
    IllegalActionError,
    IncompleteProfileError,
    NotChanceError,
    ZeroReachError,
)
from .games.base import CHANCE_OUTCOME, Game, GameAction, InfoStateKey, PublicStateKey

BELIEF_ATOL = 1e-9


def live_cards(game: Game, public: PublicStateKey, player: int) -> tuple:
    board = set(public.board_cards)
    return tuple(c for c in game.deal_cards(player) if c not in board)


@dataclass(eq=False)
class PublicBeliefState:
    public: PublicStateKey
    cards: tuple  # (cards for p0, cards for p1)
    beliefs: tuple  # (np array over cards0, np array over cards1)

    def validate(self):
        for p in (0, 1):
            b = self.beliefs[p]
            if len(b) != len(self.cards[p]):
                raise ValueError("belief length mismatch for player %d" % p)
            if np.any(b < -BELIEF_ATOL) or abs(b.sum() - 1.0) > BELIEF_ATOL:
                raise ValueError("beliefs for player %d are not a distribution" % p)

    def belief_map(self, player: int) -> dict:
        out = {}
        for c, w in zip(self.cards[player], self.beliefs[player]):
            key = InfoStateKey(player=player, private_cards=(c,), public=self.public)
            out[key] = float(w)
        return out

    def infostate_keys(self, player: int) -> list:
        return [
            InfoStateKey(player=player, private_cards=(c,), public=self.public)
            for c in self.cards[player]
        ]


def initial_pbs(game: Game) -> PublicBeliefState:
    state = game.initial_state()
    cards0 = tuple(game.deal_cards(0))
    cards1 = tuple(game.deal_cards(1))
    c0, c1 = next(
        (i, j) for i in cards0 for j in cards1 if game.joint_deal_weight(i, j) > 0.0
    )
    public = game.public_key(game.apply(state, game.deal_action(c0, c1)))
    w = np.array(
        [[game.joint_deal_weight(i, j) for j in cards1] for i in cards0], dtype=np.float64
    )
    b0 = w.sum(axis=1)
    b1 = w.sum(axis=0)
    return PublicBeliefState(
        public=public,
        cards=(cards0, cards1),
        beliefs=(b0 / b0.sum(), b1 / b1.sum()),
    )


def compat_matrix(game: Game, pbs: PublicBeliefState) -> np.ndarray:
    """Joint deal compatibility over the pbs card index spaces."""
    return np.array(
        [[game.joint_deal_weight(i, j) for j in pbs.cards[1]] for i in pbs.cards[0]],
        dtype=np.float64,
    )


def representative_state(game: Game, pbs: PublicBeliefState, require_action=None):
    """A concrete state consistent with the pbs.

    When `require_action` is given, prefers an assignment for which that
    action is legal for the acting player.
    """
    fallback = None
    for i in pbs.cards[0]:
        for j in pbs.cards[1]:
            if game.joint_deal_weight(i, j) <= 0.0:
                continue
            state = game.state_from_public(pbs.public, i, j)
            if require_action is None:
                return state
            if fallback is None:
                fallback = state
            if not state.is_terminal() and not state.is_chance():
                if require_action in game.legal_actions(state):
                    return state
    if fallback is None:
        raise ZeroReachError("pbs has no compatible private assignment")
    return fallback


def acting_player(game: Game, pbs: PublicBeliefState) -> int:
    return representative_state(game, pbs).acting


def pbs_transition(game, pbs, profile, action: GameAction, strict: bool = True):
    """Bayes update of the acting player's beliefs after `action`.

    `profile` maps infostate keys to (actions, probabilities); see
    cfr.StrategyProfile. With strict=False a zero-reach action falls back
    to the prior renormalized over infostates where the action is legal.
    """
    rep = representative_state(game, pbs, require_action=action)
    p = rep.acting
    if p not in (0, 1):
        raise IllegalActionError("pbs_transition requires a player decision pbs")
    cards = pbs.cards[p]
    prior = pbs.beliefs[p]
    probs = np.zeros(len(cards))
    legal_mask = np.zeros(len(cards))
    for ci, c in enumerate(cards):
        if p == 0:
            other = next(j for j in pbs.cards[1] if game.joint_deal_weight(c, j) > 0.0)
            state = game.state_from_public(pbs.public, c, other)
        else:
            other = next(i for i in pbs.cards[0] if game.joint_deal_weight(i, c) > 0.0)
            state = game.state_from_public(pbs.public, other, c)
        legal = game.legal_actions(state)
        if action in legal:
            legal_mask[ci] = 1.0
            key = game.infostate_key(state, p).text()
            row = profile.get(key)
            if row is None:
                raise IncompleteProfileError("profile missing infostate %s" % key)
            actions, sigma = row
            if action in actions:
                probs[ci] = sigma[actions.index(action)]
    posterior = prior * probs
    total = posterior.sum()
    if total <= 0.0:
        if strict:
            raise ZeroReachError(
                "action %s has zero probability under the profile" % action.token()
            )
        posterior = prior * legal_mask
        total = posterior.sum()
        if total <= 0.0:
            posterior = legal_mask.copy()
            total = posterior.sum()
            if total <= 0.0:
                raise ZeroReachError("action %s is legal nowhere" % action.token())
    posterior = posterior / total
    new_public = game.public_key(game.apply(representative_for_action(game, pbs, action), action))
    new_beliefs = list(pbs.beliefs)
    new_beliefs[p] = posterior
    return PublicBeliefState(public=new_public, cards=pbs.cards, beliefs=tuple(new_beliefs))


def representative_for_action(game, pbs, action):
    return representative_state(game, pbs, require_action=action)


def pbs_chance_transition(game, pbs, outcome: GameAction):
    """Advance the pbs through a public chance event (board reveal)."""
    rep = representative_state(game, pbs)
    if not rep.is_chance():
        raise NotChanceError("pbs is not at a chance node")
    # the first compatible deal may block this outcome (e.g. it holds the
    # revealed card); find one that admits it
    child = None
    for i in pbs.cards[0]:
        for j in pbs.cards[1]:
            if game.joint_deal_weight(i, j) <= 0.0:
                continue
            state = game.state_from_public(pbs.public, i, j)
            if any(a.outcome_id == outcome.outcome_id
                   for a, _ in game.chance_outcomes(state)):
                child = game.apply(state, outcome)
                break
        if child is not None:
            break
    if child is None:
        raise ZeroReachError("chance outcome incompatible with beliefs")
    new_public = game.public_key(child)
    new_cards = (
        live_cards(game, new_public, 0),
        live_cards(game, new_public, 1),
    )
    new_beliefs = []
    for p in (0, 1):
        keep = [pbs.cards[p].index(c) for c in new_cards[p]]
        b = pbs.beliefs[p][keep]
        total = b.sum()
        if total <= 0.0:
            raise ZeroReachError("chance outcome incompatible with beliefs")
        new_beliefs.append(b / total)
    return PublicBeliefState(public=new_public, cards=new_cards, beliefs=tuple(new_beliefs))


def chance_outcome_probs(game, pbs):
    """Belief-weighted outcome distribution at a chance pbs."""
    rep = representative_state(game, pbs)
    if not rep.is_chance():
        raise NotChanceError("pbs is not at a chance node")
    compat = compat_matrix(game, pbs)
    joint = np.outer(pbs.beliefs[0], pbs.beliefs[1]) * compat
    total = joint.sum()
    if total <= 0.0:
        raise ZeroReachError("pbs has no compatible private assignment")
    joint /= total
    acc = {}
    for i0, i in enumerate(pbs.cards[0]):
        for j1, j in enumerate(pbs.cards[1]):
            if joint[i0, j1] <= 0.0:
                continue
            state = game.state_from_public(pbs.public, i, j)
            for act, q in game.chance_outcomes(state):
                acc[act.outcome_id] = acc.get(act.outcome_id, 0.0) + joint[i0, j1] * q
    return [
        (GameAction(CHANCE_OUTCOME, outcome_id=oid), acc[oid]) for oid in sorted(acc)
    ]


def perturb_pbs(game, pbs, rng, enabled: bool = True):
    """Scale the pot by u ~ unif[0.9, 1.1], floored at the ante total."""
    if not enabled:
        return pbs
    u = rng.uniform(0.9, 1.1)
    pot = int(np.floor(pbs.public.pot * u + 0.5))
    pot = max(pot, 2 * game.ante)
    public = PublicStateKey(
        game_id=pbs.public.game_id,
        board_cards=pbs.public.board_cards,
        pot=pot,
        stacks=pbs.public.stacks,
        round=pbs.public.round,
        history=pbs.public.history,
    )
    return PublicBeliefState(public=public, cards=pbs.cards, beliefs=pbs.beliefs)


def zero_sum_adjust(game, cards, values, beliefs):
    """Average value-isomorphic infostates, then split the discrepancy.

    `cards`, `values`, `beliefs` are (player0, player1) tuples of aligned
    arrays. Returns adjusted value arrays; inputs are not modified.
    """
    out = []
    for p in (0, 1):
        v = np.array(values[p], dtype=np.float64)
        b = beliefs[p]
        for group in game.iso_groups(cards[p]):
            if len(group) < 2:
                continue
            idx = [cards[p].index(c) for c in group]
            mass = b[idx].sum()
            if mass > 0.0:
                mean = float((b[idx] * v[idx]).sum() / mass)
            else:
                mean = float(v[idx].mean())
            v[idx] = mean
        out.append(v)
    d = float((beliefs[0] * out[0]).sum() + (beliefs[1] * out[1]).sum())
    out[0] -= d / 2.0
    out[1] -= d / 2.0
    return out[0], out[1]


@dataclass
class PbsSample:
    pbs: PublicBeliefState
    values: tuple  # (np array over cards0, np array over cards1)

    def value_map(self, player: int) -> dict:
        out = {}
        for c, v in zip(self.pbs.cards[player], self.values[player]):
            key = InfoStateKey(player=player, private_cards=(c,), public=self.pbs.public)
            out[key] = float(v)
        return out


class PbsCollector:
    """Append-only sample collector; snapshots are safe under concurrent appends."""

    def __init__(self):
        self._lock = threading.Lock()
        self._items = []

    def append(self, sample: PbsSample):
        with self._lock:
            self._items.append(sample)

    def extend(self, samples):
        with self._lock:
            self._items.extend(samples)

    def snapshot(self) -> list:
        with self._lock:
            return list(self._items)

    def __len__(self):
        with self._lock:
            return len(self._items)
