"""Game implementations and the shared interface."""

from .base import (
    ALL_IN,
    BET_RAISE,
    CHANCE,
    CHANCE_OUTCOME,
    CHECK_CALL,
    FOLD,
    P0,
    P1,
    TERMINAL,
    Game,
    GameAction,
    GameState,
    InfoStateKey,
    PublicStateKey,
    sorted_actions,
)
from .kuhn import KuhnPoker
from .leduc import NoLimitLeduc
from .toy import ToyPoker

GAME_NAMES = ("toy", "kuhn", "nl-leduc")


def make_game(name: str, **kwargs) -> Game:
    if name == "toy":
        return ToyPoker()
    if name == "kuhn":
        return KuhnPoker()
    if name == "nl-leduc":
        return NoLimitLeduc(**kwargs)
    raise ValueError("unknown game %r (expected one of %s)" % (name, ", ".join(GAME_NAMES)))
