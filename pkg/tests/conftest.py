import numpy as np
import pytest

from rlcfr.belief import initial_pbs
from rlcfr.cfr import DcfrParams, Solver
from rlcfr.games import make_game
from rlcfr.rebel import full_legal_abstraction
from rlcfr.tree import build_subgame


@pytest.fixture(scope="session")
def toy():
    return make_game("toy")


@pytest.fixture(scope="session")
def kuhn():
    return make_game("kuhn")


@pytest.fixture(scope="session")
def leduc5():
    return make_game("nl-leduc", stack=5)


@pytest.fixture(scope="session")
def kuhn_tree(kuhn):
    pbs = initial_pbs(kuhn)
    aa = full_legal_abstraction(kuhn, pbs)
    return build_subgame(kuhn, pbs, aa, nonroot_policy=None, depth_rounds=None)


@pytest.fixture(scope="session")
def kuhn_solved(kuhn_tree):
    # shared medium-accuracy equilibrium; tests needing tighter accuracy
    # solve their own
    solver = Solver(kuhn_tree, DcfrParams(iterations=2000))
    solver.run()
    return solver


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
