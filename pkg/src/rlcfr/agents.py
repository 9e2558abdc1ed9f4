"""Match-ready agents: abstraction choice plus cached subgame solving.

Every agent kind answers the same two queries at a decision pbs: a
solved strategy profile over its chosen action abstraction, and an
action draw for the private card it actually holds. Solves key on the
public state text; deterministic agents therefore solve each public
state once per process regardless of hand count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import mdp
from .belief import PublicBeliefState, acting_player
from .cfr import DcfrParams, StrategyProfile, TerminalOnlyEvaluator
from .errors import ConfigError
from .games.base import InfoStateKey
from .lp import lp_solve
from .nets import Net, load_checkpoint
from .rebel import full_legal_abstraction, rebel_solve
from .training import gated_abstraction, make_value_evaluator
from .tree import build_subgame

AGENT_KINDS = ("RLCFR", "BASE_FIXED", "MUL_ACTION", "FINE_GRAIN", "UNIFORM",
               "EXACT_NASH")


@dataclass
class AgentSpec:
    kind: str = "BASE_FIXED"
    actor_ckpt: str = ""
    critic_ckpt: str = ""
    value_ckpt: str = ""
    params: DcfrParams = field(default_factory=DcfrParams)
    gate: bool = True
    depth_rounds: int | None = None  # None solves to the end of the game

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ConfigError("unknown agent kind %r" % self.kind)
        if self.kind == "RLCFR":
            for name in ("actor_ckpt", "critic_ckpt"):
                path = getattr(self, name)
                if not path or not Path(path).exists():
                    raise ConfigError("RLCFR agent needs %s (got %r)" % (name, path))
        if (self.depth_rounds is not None and not self.value_ckpt
                and self.kind not in ("UNIFORM", "EXACT_NASH")):
            raise ConfigError(
                "depth_rounds=%d needs value_ckpt; depth-limited solves price "
                "their leaves with the value net" % self.depth_rounds)


@dataclass
class SolvedNode:
    profile: StrategyProfile
    abstraction: list
    tree: object
    root_value: float


def _load_net(path: str, expected_role: str) -> Net:
    _, spec, params, _, _ = load_checkpoint(path, expected_role=expected_role)
    return Net(spec, params=params)


class Agent:
    """One seatable player; stateless across hands except for solve caches."""

    def __init__(self, game, spec: AgentSpec, name: str = ""):
        self.game = game
        self.spec = spec
        self.name = name or spec.kind
        self._cache = {}
        self.actor = self.critic = None
        if spec.kind == "RLCFR":
            self.actor = _load_net(spec.actor_ckpt, "actor")
            self.critic = _load_net(spec.critic_ckpt, "critic")
        if spec.value_ckpt:
            self.value_fn = make_value_evaluator(
                game, _load_net(spec.value_ckpt, "value"))
            self.depth = spec.depth_rounds if spec.depth_rounds else 1
        else:
            self.value_fn = TerminalOnlyEvaluator()
            self.depth = spec.depth_rounds  # None: full-depth solves

    def _abstraction(self, pbs: PublicBeliefState):
        kind = self.spec.kind
        if kind in ("BASE_FIXED", "EXACT_NASH"):
            return mdp.base_abstraction(self.game, pbs)
        if kind == "FINE_GRAIN":
            return mdp.fine_grain_abstraction(self.game, pbs)
        if kind == "UNIFORM":
            return full_legal_abstraction(self.game, pbs)
        if kind == "RLCFR":
            aa, _, _ = gated_abstraction(self.game, pbs, self.actor,
                                         self.critic, gate=self.spec.gate)
            return aa
        raise ConfigError("no direct abstraction for %s" % kind)

    def solve_at(self, pbs: PublicBeliefState) -> SolvedNode:
        key = pbs.public.text()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        kind = self.spec.kind
        if kind == "UNIFORM":
            aa = full_legal_abstraction(self.game, pbs)
            tree = build_subgame(self.game, pbs, aa,
                                 nonroot_policy=None, depth_rounds=None)
            node = SolvedNode(profile=_uniform_full_profile(self.game, tree),
                              abstraction=aa, tree=tree, root_value=float("nan"))
        elif kind == "EXACT_NASH":
            aa = full_legal_abstraction(self.game, pbs)
            tree = build_subgame(self.game, pbs, aa,
                                 nonroot_policy=None, depth_rounds=None)
            profile, v0, v1 = lp_solve(tree)
            root_v = v0 if acting_player(self.game, pbs) == 0 else v1
            node = SolvedNode(profile=profile, abstraction=aa, tree=tree,
                              root_value=root_v)
        elif kind == "MUL_ACTION":
            cands = mdp.mul_action_candidates(self.game, pbs)
            idx, values, results = mdp.mul_action_select(
                self.game, pbs, cands, self.value_fn, self.spec.params,
                nonroot_policy=mdp.nonroot_base_policy,
                depth_rounds=self.depth)
            res = results[idx]
            node = SolvedNode(profile=res.profile, abstraction=cands[idx],
                              tree=res.solver.tree, root_value=values[idx])
        else:
            aa = self._abstraction(pbs)
            res = rebel_solve(self.game, pbs, aa, self.value_fn,
                              self.spec.params,
                              nonroot_policy=mdp.nonroot_base_policy,
                              depth_rounds=self.depth)
            node = SolvedNode(profile=res.profile, abstraction=aa,
                              tree=res.solver.tree, root_value=res.root_value)
        self._cache[key] = node
        return node

    def act(self, pbs: PublicBeliefState, card, rng):
        """Sample an action for the private card actually held."""
        node = self.solve_at(pbs)
        p = acting_player(self.game, pbs)
        i = pbs.cards[p].index(card)
        key = pbs.infostate_keys(p)[i].text()
        row = node.profile.get(key)
        if row is None:
            actions = node.abstraction
            probs = np.full(len(actions), 1.0 / len(actions))
        else:
            actions, probs = row
        k = int(rng.choice(len(actions), p=np.asarray(probs) / np.sum(probs)))
        return actions[k], node


def _uniform_full_profile(game, tree) -> StrategyProfile:
    """Uniform over legal actions at every decision infostate of the tree."""
    prof = StrategyProfile()
    for u in tree.decision_nodes():
        p = int(tree.player[u])
        na = int(tree.nact[u])
        cards = tree.cards0 if p == 0 else tree.cards1
        for i, c in enumerate(cards):
            mask = tree.legal[tree.off_e[u] + i * na: tree.off_e[u] + (i + 1) * na]
            total = mask.sum()
            if total <= 0:
                continue
            key = InfoStateKey(player=p, private_cards=(c,),
                               public=tree.pubkeys[u]).text()
            prof.set(key, tuple(tree.edges[u]), mask / total)
    return prof


def make_agent(game, spec: AgentSpec, name: str = "") -> Agent:
    return Agent(game, spec, name=name)
