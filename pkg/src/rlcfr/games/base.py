"""Core game types and the two-player zero-sum game interface.

States are immutable values. A state is reconstructible from
(game_id, initial config, action_history); betting context fields are
carried along for O(1) stepping but are functions of the history.

Player ids are 0 and 1; CHANCE and TERMINAL are distinguished markers
used in the `acting` field.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import (
    IllegalActionError,
    NotChanceError,
    NotTerminalError,
    TerminalStateError,
)

P0 = 0
P1 = 1
CHANCE = -1
TERMINAL = -2

FOLD = 0
CHECK_CALL = 1
BET_RAISE = 2
ALL_IN = 3
CHANCE_OUTCOME = 4

_KIND_ORDER = {FOLD: 0, CHECK_CALL: 1, BET_RAISE: 2, ALL_IN: 3, CHANCE_OUTCOME: 4}


@dataclass(frozen=True)
class GameAction:
    """One edge of the game tree.

    `amount` is the total chips committed by this action (BET_RAISE only);
    `outcome_id` identifies a chance outcome (CHANCE_OUTCOME only).
    """

    kind: int
    amount: int = 0
    outcome_id: int = -1

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.amount, self.outcome_id)

    def token(self) -> str:
        if self.kind == FOLD:
            return "F"
        if self.kind == CHECK_CALL:
            return "C"
        if self.kind == BET_RAISE:
            return "R%d" % self.amount
        if self.kind == ALL_IN:
            return "A"
        return "X%d" % self.outcome_id

    @staticmethod
    def from_token(tok: str) -> "GameAction":
        if tok == "F":
            return GameAction(FOLD)
        if tok == "C":
            return GameAction(CHECK_CALL)
        if tok == "A":
            return GameAction(ALL_IN)
        if tok.startswith("R"):
            return GameAction(BET_RAISE, amount=int(tok[1:]))
        if tok.startswith("X"):
            return GameAction(CHANCE_OUTCOME, outcome_id=int(tok[1:]))
        raise ValueError("bad action token %r" % tok)


@dataclass(frozen=True)
class PublicStateKey:
    """Information common to both players; stable dict/file key."""

    game_id: str
    board_cards: tuple
    pot: int
    stacks: tuple
    round: int
    history: tuple  # public action tokens (player actions + board reveals)

    def text(self) -> str:
        return "%s|r%d|pot%d|s%d,%d|b%s|%s" % (
            self.game_id,
            self.round,
            self.pot,
            self.stacks[0],
            self.stacks[1],
            ",".join(str(c) for c in self.board_cards),
            "/".join(self.history),
        )


@dataclass(frozen=True)
class InfoStateKey:
    """One player's view: own cards plus the public state."""

    player: int
    private_cards: tuple
    public: PublicStateKey

    def text(self) -> str:
        return "%s|p%d|c%s" % (
            self.public.text(),
            self.player,
            ",".join(str(c) for c in self.private_cards),
        )


@dataclass(frozen=True)
class GameState:
    game_id: str
    action_history: tuple
    private_cards: tuple  # ((p0 cards...), (p1 cards...))
    board_cards: tuple
    pot: int
    stacks: tuple
    round: int
    acting: int
    # betting context, derived from history
    committed: tuple = (0, 0)  # chips committed this round
    contrib: tuple = (0.0, 0.0)  # total invested incl. ante (real for synthetic pots)
    min_inc: int = 1
    checked: bool = False
    terminal_kind: str = ""  # "", "fold", "showdown"
    folder: int = -1

    def is_terminal(self) -> bool:
        return self.acting == TERMINAL

    def is_chance(self) -> bool:
        return self.acting == CHANCE


class Game:
    """Interface shared by the three desk games.

    Subclasses set `game_id`, `num_cards`, `ante`, and implement the
    rule hooks. Card ids are dense ints in [0, num_cards).
    """

    game_id = ""
    num_cards = 0
    ante = 1

    # -- core operations ---------------------------------------------------

    def initial_state(self) -> GameState:
        raise NotImplementedError

    def legal_actions(self, state: GameState) -> list:
        if state.is_terminal():
            raise TerminalStateError("legal_actions on terminal state")
        return self._legal_actions(state)

    def apply(self, state: GameState, action: GameAction) -> GameState:
        if state.is_terminal():
            raise TerminalStateError("apply on terminal state")
        if state.is_chance():
            legal = [a for a, _ in self.chance_outcomes(state)]
        else:
            legal = self._legal_actions(state)
        if action not in legal:
            raise IllegalActionError(
                "action %s not legal at %s" % (action.token(), self.public_key(state).text())
            )
        return self._apply(state, action)

    def terminal_utility(self, state: GameState, player: int) -> float:
        if not state.is_terminal():
            raise NotTerminalError("terminal_utility on non-terminal state")
        u0 = self._utility_p0(state)
        return u0 if player == 0 else -u0

    def chance_outcomes(self, state: GameState) -> list:
        if not state.is_chance():
            raise NotChanceError("chance_outcomes on non-chance state")
        return self._chance_outcomes(state)

    def infostate_key(self, state: GameState, player: int) -> InfoStateKey:
        return InfoStateKey(
            player=player,
            private_cards=state.private_cards[player],
            public=self.public_key(state),
        )

    def public_key(self, state: GameState) -> PublicStateKey:
        # the first history entry is always the private deal; board reveals
        # are public chance events and stay in the key
        hist = tuple(a.token() for a in state.action_history[1:])
        return PublicStateKey(
            game_id=self.game_id,
            board_cards=state.board_cards,
            pot=state.pot,
            stacks=state.stacks,
            round=state.round,
            history=hist,
        )

    # -- rule hooks ---------------------------------------------------------

    def _legal_actions(self, state: GameState) -> list:
        raise NotImplementedError

    def _apply(self, state: GameState, action: GameAction) -> GameState:
        raise NotImplementedError

    def _utility_p0(self, state: GameState) -> float:
        raise NotImplementedError

    def _chance_outcomes(self, state: GameState) -> list:
        raise NotImplementedError

    # -- belief machinery support -------------------------------------------

    def deal_cards(self, player: int) -> list:
        """Candidate private cards for `player` at the deal."""
        raise NotImplementedError

    def deal_action(self, c0: int, c1: int) -> GameAction:
        """The chance outcome that deals c0 to player 0, c1 to player 1."""
        raise NotImplementedError

    def joint_deal_weight(self, c0: int, c1: int) -> float:
        """Prior probability of the joint deal (0 if incompatible)."""
        raise NotImplementedError

    def rank_of(self, card: int) -> int:
        return card

    def card_label(self, card: int) -> str:
        return str(card)

    def iso_groups(self, live_cards) -> list:
        """Groups of live cards whose infostate values must coincide."""
        return [[c] for c in live_cards]

    def state_from_public(self, public: PublicStateKey, c0: int, c1: int) -> GameState:
        """Reconstruct the concrete state for a joint private assignment.

        Replays the public history on top of the deal. A synthetic pot
        (perturbed belief states) is only representable at the start of a
        betting round; contributions are then split evenly.
        """
        state = self.initial_state()
        state = self._apply(state, self.deal_action(c0, c1))
        for tok in public.history:
            state = self._apply(state, GameAction.from_token(tok))
        if state.pot != public.pot or state.stacks != tuple(public.stacks):
            if state.committed != (0, 0):
                raise IllegalActionError(
                    "synthetic pot/stack override requires a round-start state"
                )
            state = replace(
                state,
                pot=public.pot,
                stacks=tuple(public.stacks),
                contrib=(public.pot / 2.0, public.pot / 2.0),
            )
        return state


def sorted_actions(actions) -> list:
    return sorted(actions, key=lambda a: a.sort_key())
