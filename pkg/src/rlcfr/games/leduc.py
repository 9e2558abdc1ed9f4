"""No-limit Leduc: 6 cards ({J,Q,K} x 2 suits), two betting rounds.

Each player antes `ante` out of a `stack`-chip total. One private card
each, betting, one public board card, betting, showdown (pair beats high
card). Bets and raises are integer chip amounts: the minimum opening bet
of a round is the ante, the minimum raise increment is the previous
bet/raise increment of the round, and an all-in is always allowed.
Player 0 acts first in both rounds.
"""

from __future__ import annotations

from dataclasses import replace

from .base import (
    ALL_IN,
    BET_RAISE,
    CHANCE,
    CHANCE_OUTCOME,
    CHECK_CALL,
    FOLD,
    TERMINAL,
    Game,
    GameAction,
    GameState,
)

_RANK_NAMES = "JQK"
_DEALS = [(i, j) for i in range(6) for j in range(6) if i != j]


class NoLimitLeduc(Game):
    game_id = "NL_LEDUC"
    num_cards = 6

    def __init__(self, stack: int = 20, ante: int = 1):
        if ante < 1 or stack <= ante:
            raise ValueError("need stack > ante >= 1")
        self.stack = stack
        self.ante = ante

    def initial_state(self) -> GameState:
        behind = self.stack - self.ante
        return GameState(
            game_id=self.game_id,
            action_history=(),
            private_cards=((), ()),
            board_cards=(),
            pot=2 * self.ante,
            stacks=(behind, behind),
            round=1,
            acting=CHANCE,
            committed=(0, 0),
            contrib=(float(self.ante), float(self.ante)),
            min_inc=self.ante,
        )

    def rank_of(self, card: int) -> int:
        return card // 2

    def card_label(self, card: int) -> str:
        return _RANK_NAMES[card // 2] + "ab"[card % 2]

    def deal_cards(self, player: int) -> list:
        return list(range(6))

    def deal_action(self, c0: int, c1: int) -> GameAction:
        return GameAction(CHANCE_OUTCOME, outcome_id=_DEALS.index((c0, c1)))

    def joint_deal_weight(self, c0: int, c1: int) -> float:
        return 0.0 if c0 == c1 else 1.0 / 30.0

    def iso_groups(self, live_cards) -> list:
        by_rank = {}
        for c in live_cards:
            by_rank.setdefault(c // 2, []).append(c)
        return [by_rank[r] for r in sorted(by_rank)]

    def _chance_outcomes(self, state: GameState) -> list:
        if not state.private_cards[0]:
            return [
                (GameAction(CHANCE_OUTCOME, outcome_id=i), 1.0 / 30.0)
                for i in range(len(_DEALS))
            ]
        used = set(state.private_cards[0] + state.private_cards[1]) | set(state.board_cards)
        remaining = [c for c in range(6) if c not in used]
        p = 1.0 / len(remaining)
        return [(GameAction(CHANCE_OUTCOME, outcome_id=c), p) for c in remaining]

    def _legal_actions(self, state: GameState) -> list:
        p = state.acting
        o = 1 - p
        behind = state.stacks[p]
        to_call = state.committed[o] - state.committed[p]
        acts = []
        if to_call > 0:
            acts.append(GameAction(FOLD))
        acts.append(GameAction(CHECK_CALL))
        if to_call < behind:
            lo = to_call + state.min_inc
            acts.extend(GameAction(BET_RAISE, amount=m) for m in range(lo, behind))
            acts.append(GameAction(ALL_IN))
        return acts

    def _apply(self, state: GameState, action: GameAction) -> GameState:
        hist = state.action_history + (action,)
        if state.acting == CHANCE:
            if not state.private_cards[0]:
                c0, c1 = _DEALS[action.outcome_id]
                return replace(
                    state, action_history=hist, private_cards=((c0,), (c1,)), acting=0
                )
            board = (action.outcome_id,)
            acting = TERMINAL if state.stacks == (0, 0) else 0
            return replace(
                state,
                action_history=hist,
                board_cards=board,
                round=2,
                committed=(0, 0),
                min_inc=self.ante,
                checked=False,
                acting=acting,
                terminal_kind="showdown" if acting == TERMINAL else "",
            )
        p = state.acting
        o = 1 - p
        to_call = state.committed[o] - state.committed[p]
        if action.kind == FOLD:
            return replace(
                state, action_history=hist, acting=TERMINAL, terminal_kind="fold", folder=p
            )
        if action.kind == CHECK_CALL:
            if to_call == 0:
                if state.checked:
                    return self._end_round(state, hist)
                return replace(state, action_history=hist, checked=True, acting=o)
            pay = min(to_call, state.stacks[p])
            state = self._commit(state, p, pay)
            return self._end_round(state, hist)
        pay = state.stacks[p] if action.kind == ALL_IN else action.amount
        inc = pay - to_call
        state = self._commit(state, p, pay)
        return replace(
            state,
            action_history=hist,
            min_inc=max(state.min_inc, inc),
            checked=False,
            acting=o,
        )

    def _commit(self, state: GameState, p: int, pay: int) -> GameState:
        stacks = list(state.stacks)
        stacks[p] -= pay
        committed = list(state.committed)
        committed[p] += pay
        contrib = list(state.contrib)
        contrib[p] += pay
        return replace(
            state,
            pot=state.pot + pay,
            stacks=tuple(stacks),
            committed=tuple(committed),
            contrib=tuple(contrib),
        )

    def _end_round(self, state: GameState, hist) -> GameState:
        if state.round == 1:
            return replace(state, action_history=hist, acting=CHANCE)
        return replace(state, action_history=hist, acting=TERMINAL, terminal_kind="showdown")

    def _utility_p0(self, state: GameState) -> float:
        if state.terminal_kind == "fold":
            return state.contrib[1] if state.folder == 1 else -state.contrib[0]
        rb = state.board_cards[0] // 2
        s0 = (state.private_cards[0][0] // 2 == rb, state.private_cards[0][0] // 2)
        s1 = (state.private_cards[1][0] // 2 == rb, state.private_cards[1][0] // 2)
        if s0 > s1:
            return state.contrib[1]
        if s0 < s1:
            return -state.contrib[0]
        return 0.0
