"""Three-card toy game: P1 holds J or K, P2 always holds Q.

Each player antes 1 with 2 chips behind. P1 may check (showdown at ante
stakes) or move all-in; with K the all-in is automatic. Facing the
all-in, P2 folds or calls.
"""

from __future__ import annotations

from dataclasses import replace

from .base import (
    ALL_IN,
    CHANCE,
    CHANCE_OUTCOME,
    CHECK_CALL,
    FOLD,
    TERMINAL,
    Game,
    GameAction,
    GameState,
)

J, Q, K = 0, 1, 2
_NAMES = {J: "J", Q: "Q", K: "K"}


class ToyPoker(Game):
    game_id = "TOY"
    num_cards = 3
    ante = 1
    stack_behind = 2

    def initial_state(self) -> GameState:
        return GameState(
            game_id=self.game_id,
            action_history=(),
            private_cards=((), ()),
            board_cards=(),
            pot=2,
            stacks=(self.stack_behind, self.stack_behind),
            round=1,
            acting=CHANCE,
            committed=(0, 0),
            contrib=(1.0, 1.0),
            min_inc=1,
        )

    def deal_cards(self, player: int) -> list:
        return [J, K] if player == 0 else [Q]

    def deal_action(self, c0: int, c1: int) -> GameAction:
        assert c1 == Q and c0 in (J, K)
        return GameAction(CHANCE_OUTCOME, outcome_id=0 if c0 == J else 1)

    def joint_deal_weight(self, c0: int, c1: int) -> float:
        if c1 != Q or c0 not in (J, K):
            return 0.0
        return 0.5

    def card_label(self, card: int) -> str:
        return _NAMES[card]

    def _chance_outcomes(self, state: GameState) -> list:
        return [
            (GameAction(CHANCE_OUTCOME, outcome_id=0), 0.5),
            (GameAction(CHANCE_OUTCOME, outcome_id=1), 0.5),
        ]

    def _legal_actions(self, state: GameState) -> list:
        if state.acting == 0:
            if state.private_cards[0][0] == K:
                return [GameAction(ALL_IN)]  # automatic all-in with K
            return [GameAction(CHECK_CALL), GameAction(ALL_IN)]
        return [GameAction(FOLD), GameAction(CHECK_CALL)]

    def _apply(self, state: GameState, action: GameAction) -> GameState:
        hist = state.action_history + (action,)
        if state.acting == CHANCE:
            c0 = J if action.outcome_id == 0 else K
            return replace(
                state,
                action_history=hist,
                private_cards=((c0,), (Q,)),
                acting=0,
            )
        if state.acting == 0:
            if action.kind == CHECK_CALL:
                return replace(
                    state, action_history=hist, acting=TERMINAL, terminal_kind="showdown"
                )
            # all-in commits the 2 chips behind
            return replace(
                state,
                action_history=hist,
                pot=state.pot + 2,
                stacks=(0, state.stacks[1]),
                committed=(2, 0),
                contrib=(state.contrib[0] + 2, state.contrib[1]),
                acting=1,
            )
        if action.kind == FOLD:
            return replace(
                state, action_history=hist, acting=TERMINAL, terminal_kind="fold", folder=1
            )
        return replace(
            state,
            action_history=hist,
            pot=state.pot + 2,
            stacks=(state.stacks[0], 0),
            committed=(2, 2),
            contrib=(state.contrib[0], state.contrib[1] + 2),
            acting=TERMINAL,
            terminal_kind="showdown",
        )

    def _utility_p0(self, state: GameState) -> float:
        if state.terminal_kind == "fold":
            return state.contrib[1] if state.folder == 1 else -state.contrib[0]
        c0, c1 = state.private_cards[0][0], state.private_cards[1][0]
        if c0 > c1:
            return state.contrib[1]
        if c0 < c1:
            return -state.contrib[0]
        return 0.0
