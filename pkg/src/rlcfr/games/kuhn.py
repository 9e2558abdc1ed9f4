"""Kuhn poker: 3 cards, one ante, a single 1-chip bet round."""

from __future__ import annotations

from dataclasses import replace

from .base import (
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

_NAMES = {0: "J", 1: "Q", 2: "K"}
_DEALS = [(i, j) for i in range(3) for j in range(3) if i != j]


class KuhnPoker(Game):
    game_id = "KUHN"
    num_cards = 3
    ante = 1
    stack_behind = 1

    def initial_state(self) -> GameState:
        return GameState(
            game_id=self.game_id,
            action_history=(),
            private_cards=((), ()),
            board_cards=(),
            pot=2,
            stacks=(1, 1),
            round=1,
            acting=CHANCE,
            committed=(0, 0),
            contrib=(1.0, 1.0),
            min_inc=1,
        )

    def deal_cards(self, player: int) -> list:
        return [0, 1, 2]

    def deal_action(self, c0: int, c1: int) -> GameAction:
        return GameAction(CHANCE_OUTCOME, outcome_id=_DEALS.index((c0, c1)))

    def joint_deal_weight(self, c0: int, c1: int) -> float:
        return 0.0 if c0 == c1 else 1.0 / 6.0

    def card_label(self, card: int) -> str:
        return _NAMES[card]

    def _chance_outcomes(self, state: GameState) -> list:
        return [
            (GameAction(CHANCE_OUTCOME, outcome_id=i), 1.0 / 6.0)
            for i in range(len(_DEALS))
        ]

    def _legal_actions(self, state: GameState) -> list:
        if max(state.committed) == 0:
            return [GameAction(CHECK_CALL), GameAction(BET_RAISE, amount=1)]
        return [GameAction(FOLD), GameAction(CHECK_CALL)]

    def _apply(self, state: GameState, action: GameAction) -> GameState:
        hist = state.action_history + (action,)
        if state.acting == CHANCE:
            c0, c1 = _DEALS[action.outcome_id]
            return replace(
                state, action_history=hist, private_cards=((c0,), (c1,)), acting=0
            )
        p = state.acting
        o = 1 - p
        if action.kind == FOLD:
            return replace(
                state, action_history=hist, acting=TERMINAL, terminal_kind="fold", folder=p
            )
        if action.kind == BET_RAISE:
            committed = list(state.committed)
            committed[p] += 1
            stacks = list(state.stacks)
            stacks[p] -= 1
            contrib = list(state.contrib)
            contrib[p] += 1
            return replace(
                state,
                action_history=hist,
                pot=state.pot + 1,
                stacks=tuple(stacks),
                committed=tuple(committed),
                contrib=tuple(contrib),
                acting=o,
            )
        # CHECK_CALL
        to_call = state.committed[o] - state.committed[p]
        if to_call > 0:
            contrib = list(state.contrib)
            contrib[p] += to_call
            stacks = list(state.stacks)
            stacks[p] -= to_call
            committed = list(state.committed)
            committed[p] += to_call
            return replace(
                state,
                action_history=hist,
                pot=state.pot + to_call,
                stacks=tuple(stacks),
                committed=tuple(committed),
                contrib=tuple(contrib),
                acting=TERMINAL,
                terminal_kind="showdown",
            )
        if state.checked:
            return replace(
                state, action_history=hist, acting=TERMINAL, terminal_kind="showdown"
            )
        return replace(state, action_history=hist, checked=True, acting=o)

    def _utility_p0(self, state: GameState) -> float:
        if state.terminal_kind == "fold":
            return state.contrib[1] if state.folder == 1 else -state.contrib[0]
        c0, c1 = state.private_cards[0][0], state.private_cards[1][0]
        if c0 > c1:
            return state.contrib[1]
        if c0 < c1:
            return -state.contrib[0]
        return 0.0
