"""Head-to-head matches, hand ledgers, and exploitability sweeps.

Matches run in mirrored duplicate pairs: both hands of a pair share the
deal and board streams while the agents swap seats, and each seat's
action draws come from a per-(pair, seat) stream. A swapped-order match
therefore replays the exact same physical hands, which makes reported
win-rates antisymmetric to the bit.

Beliefs are common knowledge: every transition updates the shared pbs
with the acting agent's solved profile.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .agents import Agent
from .belief import (
    initial_pbs,
    pbs_chance_transition,
    pbs_transition,
)
from .cfr import exploitability
from .errors import EmptyAbstractionError, IllegalAbstractionError
from .games.base import ALL_IN, BET_RAISE, CHECK_CALL, FOLD, GameAction
from .training import sample_decision_states


def round_off_tree(observed: GameAction, abstraction) -> GameAction:
    """Nearest in-abstraction stand-in for an observed legal action.

    Fold/check/all-in map to themselves when present; bet amounts map to
    the closest abstraction bet in log space, ties to the smaller bet.
    """
    if not abstraction:
        raise EmptyAbstractionError("cannot round into an empty abstraction")
    tokens = {a.token(): a for a in abstraction}
    if observed.token() in tokens:
        return tokens[observed.token()]
    if observed.kind != BET_RAISE:
        raise IllegalAbstractionError(
            "%s absent from abstraction" % observed.token())
    bets = sorted(a.amount for a in abstraction if a.kind == BET_RAISE)
    if not bets:
        for kind in (ALL_IN, CHECK_CALL):
            for a in abstraction:
                if a.kind == kind:
                    return a
        raise IllegalAbstractionError("no bet-like action to round to")
    best = bets[0]
    best_d = abs(math.log(observed.amount) - math.log(best))
    for b in bets[1:]:
        d = abs(math.log(observed.amount) - math.log(b))
        if d < best_d - 1e-12:
            best, best_d = b, d
    return GameAction(BET_RAISE, amount=best)


@dataclass
class HandRecord:
    hand: int
    pair: int
    seat_of_a: int
    cards: tuple  # (seat0 card, seat1 card)
    actions: tuple  # tokens, player actions and board reveals interleaved
    net_a: float  # chips won by agent a

    def line(self) -> str:
        return "hand=%d pair=%d seat_a=%d c0=%d c1=%d actions=%s net_a=%.6g" % (
            self.hand, self.pair, self.seat_of_a, self.cards[0], self.cards[1],
            "/".join(self.actions) or "-", self.net_a)


def parse_ledger_line(line: str) -> HandRecord:
    kv = dict(part.split("=", 1) for part in line.split())
    actions = tuple(kv["actions"].split("/")) if kv["actions"] != "-" else ()
    return HandRecord(hand=int(kv["hand"]), pair=int(kv["pair"]),
                      seat_of_a=int(kv["seat_a"]),
                      cards=(int(kv["c0"]), int(kv["c1"])),
                      actions=actions, net_a=float(kv["net_a"]))


def replay_hand(game, record: HandRecord) -> float:
    """Re-simulate a ledger line; returns agent a's net chips."""
    state = game.state_from_public(
        initial_pbs(game).public, record.cards[0], record.cards[1])
    for token in record.actions:
        matches = [a for a in
                   (game.chance_outcomes(state) if state.is_chance()
                    else [(x, None) for x in game.legal_actions(state)])
                   if a[0].token() == token]
        state = game.apply(state, matches[0][0])
    u0 = game.terminal_utility(state, 0)
    return u0 if record.seat_of_a == 0 else -u0


@dataclass
class MatchResult:
    n_hands: int
    mean_ma: float  # agent a win-rate, milli-antes per hand
    se_ma: float
    net_chips: np.ndarray
    ledger: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.n_hands == 0


def _draw_deal(game, rng):
    deals = [(c0, c1, game.joint_deal_weight(c0, c1))
             for c0 in game.deal_cards(0) for c1 in game.deal_cards(1)]
    w = np.array([d[2] for d in deals])
    k = int(rng.choice(len(deals), p=w / w.sum()))
    return deals[k][0], deals[k][1]


def _play_hand(game, seat_agents, cards, rngs, rng_chance):
    """One hand; returns (net chips for seat 0, action tokens)."""
    state = game.state_from_public(initial_pbs(game).public, cards[0], cards[1])
    pbs = initial_pbs(game)
    tokens = []
    while not state.is_terminal():
        if state.is_chance():
            outs = game.chance_outcomes(state)
            ps = np.array([q for _, q in outs])
            k = int(rng_chance.choice(len(outs), p=ps / ps.sum()))
            act = outs[k][0]
            state = game.apply(state, act)
            pbs = pbs_chance_transition(game, pbs, act)
            tokens.append(act.token())
            continue
        seat = state.acting
        card = state.private_cards[seat][0]
        action, node = seat_agents[seat].act(pbs, card, rngs[seat])
        state = game.apply(state, action)
        pbs = pbs_transition(game, pbs, node.profile, action, strict=False)
        tokens.append(action.token())
    return game.terminal_utility(state, 0), tuple(tokens)


def play_match(game, agent_a: Agent, agent_b: Agent, n_hands: int,
               seed: int = 0, mirror: bool = True, workers: int = 1,
               keep_ledger: bool = True) -> MatchResult:
    """Duplicate match; seats swap every hand within a mirrored pair.

    mirror=False plays independent hands (fresh cards per hand) instead;
    kept for variance comparisons.
    """
    if n_hands == 0:
        return MatchResult(n_hands=0, mean_ma=0.0, se_ma=float("nan"),
                           net_chips=np.zeros(0))

    def play_one(h):
        pair = h // 2
        swap = (h % 2 == 1) and mirror
        deal_key = pair if mirror else h
        rng_deal = np.random.default_rng((seed, deal_key, 3))
        cards = _draw_deal(game, rng_deal)
        rngs = {0: np.random.default_rng((seed, deal_key, 0)),
                1: np.random.default_rng((seed, deal_key, 1))}
        rng_chance = np.random.default_rng((seed, deal_key, 2))
        seat_of_a = 1 if swap else 0
        seat_agents = {seat_of_a: agent_a, 1 - seat_of_a: agent_b}
        u0, tokens = _play_hand(game, seat_agents, cards, rngs, rng_chance)
        net_a = u0 if seat_of_a == 0 else -u0
        rec = HandRecord(hand=h, pair=pair, seat_of_a=seat_of_a, cards=cards,
                         actions=tokens, net_a=net_a)
        return rec

    if workers <= 1:
        records = [play_one(h) for h in range(n_hands)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(play_one, range(n_hands)))

    net = np.array([r.net_a for r in records])
    ma = net / game.ante * 1000.0
    mean = float(ma.mean())
    se = float(ma.std(ddof=1) / np.sqrt(n_hands)) if n_hands > 1 else float("nan")
    return MatchResult(n_hands=n_hands, mean_ma=mean, se_ma=se, net_chips=net,
                       ledger=[r.line() for r in records] if keep_ledger else [])


def evaluate_exploitability(game, agent: Agent, n_states: int, seed: int = 0,
                            round_filter: int | None = 2,
                            max_walks: int = 100_000):
    """Mean total exploitability (antes) of the agent's solves at sampled
    decision states; returns (mean, se, per-state array)."""
    rng = np.random.default_rng(seed)
    states = sample_decision_states(game, rng, n_states,
                                    round_filter=round_filter,
                                    max_walks=max_walks)
    vals = []
    for pbs in states:
        node = agent.solve_at(pbs)
        e0, e1 = exploitability(node.tree, node.profile)
        vals.append((e0 + e1) / game.ante)
    vals = np.array(vals)
    if vals.size == 0:
        return float("nan"), float("nan"), vals
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else float("nan")
    return float(vals.mean()), se, vals
