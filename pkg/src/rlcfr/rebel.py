"""Depth-limited re-solving with per-iteration leaf value estimation.

rebel_solve wraps the core Solver loop: it builds the subgame, runs the
configured number of iterations with the supplied leaf evaluator, draws
one leaf PBS for continued self-play (iteration t_sample, epsilon-random
leaf otherwise), and packages the running-average value vector as a
training sample. Reward-only callers pass explore=None, which skips
sampling entirely.

Leaf evaluators here adjust their raw outputs so each leaf's
belief-weighted two-player total is zero before the solver consumes
them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .belief import (
    PbsSample,
    PublicBeliefState,
    live_cards,
    perturb_pbs,
    zero_sum_adjust,
)
from .cfr import DcfrParams, LeafEvaluator, Solver, StrategyProfile
from .errors import LeafEvalFailedError
from .tree import (
    KIND_CHANCE,
    KIND_DECISION,
    KIND_LEAF,
    KIND_TERMINAL,
    SubgameTree,
    build_subgame,
    leaf_pbs,
)


def full_legal_abstraction(game, pbs: PublicBeliefState) -> list:
    """Union of legal actions over the live infostates at a decision pbs."""
    from .games.base import sorted_actions

    union = set()
    for i in pbs.cards[0]:
        for j in pbs.cards[1]:
            if game.joint_deal_weight(i, j) <= 0.0:
                continue
            state = game.state_from_public(pbs.public, i, j)
            union.update(game.legal_actions(state))
    return sorted_actions(union)


def _leaf_live_maps(tree: SubgameTree):
    """Per-leaf live card index lists, cached on the tree."""
    cached = tree.cache.get("leaf_live")
    if cached is not None:
        return cached
    maps = []
    for slot in range(tree.leaf_count):
        node = int(tree.leaf_nodes[slot])
        public = tree.pubkeys[node]
        lc0 = live_cards(tree.game, public, 0)
        lc1 = live_cards(tree.game, public, 1)
        idx0 = np.array([tree.cards0.index(c) for c in lc0], dtype=np.int64)
        idx1 = np.array([tree.cards1.index(c) for c in lc1], dtype=np.int64)
        maps.append((lc0, idx0, lc1, idx1))
    tree.cache["leaf_live"] = maps
    return maps


def adjust_leaf_values(tree: SubgameTree, V0, V1, B0, B1):
    """Apply the zero-sum adjustment leaf by leaf over live cards."""
    game = tree.game
    V0 = np.array(V0, dtype=np.float64)
    V1 = np.array(V1, dtype=np.float64)
    for slot, (lc0, idx0, lc1, idx1) in enumerate(_leaf_live_maps(tree)):
        b0 = B0[slot][idx0]
        b1 = B1[slot][idx1]
        s0, s1 = b0.sum(), b1.sum()
        b0 = b0 / s0 if s0 > 0.0 else np.full(len(idx0), 1.0 / max(len(idx0), 1))
        b1 = b1 / s1 if s1 > 0.0 else np.full(len(idx1), 1.0 / max(len(idx1), 1))
        v0, v1 = zero_sum_adjust(
            game, (lc0, lc1), (V0[slot][idx0], V1[slot][idx1]), (b0, b1)
        )
        V0[slot][idx0] = v0
        V1[slot][idx1] = v1
    return V0, V1


class ExactSubsolveEvaluator(LeafEvaluator):
    """Oracle leaf values: solve each leaf subgame to equilibrium.

    Results are cached on beliefs rounded to `cache_decimals` places, so
    repeated queries from a converging outer solve mostly hit the cache.
    """

    def __init__(self, game, params: DcfrParams = None, cache_decimals: int = 2,
                 adjust: bool = True):
        self.game = game
        self.params = params if params is not None else DcfrParams(iterations=100)
        self.cache_decimals = cache_decimals
        self.adjust = adjust
        self._cache = {}
        self._trees = {}  # leaf public text -> structure, reused across beliefs
        self.queries = 0
        self.solves = 0

    def _solve_leaf(self, pbs: PublicBeliefState):
        key = pbs.public.text()
        base = self._trees.get(key)
        if base is None:
            abstraction = full_legal_abstraction(self.game, pbs)
            base = build_subgame(self.game, pbs, abstraction, depth_rounds=None)
            self._trees[key] = base
        tree = replace(base, root=pbs)
        solver = Solver(tree, self.params).run()
        return solver.root_value_vectors()

    def evaluate(self, tree: SubgameTree, B0, B1):
        V0 = np.zeros((tree.leaf_count, tree.n0))
        V1 = np.zeros((tree.leaf_count, tree.n1))
        for slot, (lc0, idx0, lc1, idx1) in enumerate(_leaf_live_maps(tree)):
            pbs = leaf_pbs(tree, slot, B0[slot], B1[slot])
            key = (
                pbs.public.text(),
                tuple(np.round(pbs.beliefs[0], self.cache_decimals)),
                tuple(np.round(pbs.beliefs[1], self.cache_decimals)),
            )
            self.queries += 1
            vals = self._cache.get(key)
            if vals is None:
                vals = self._solve_leaf(pbs)
                self._cache[key] = vals
                self.solves += 1
            V0[slot][idx0] = vals[0]
            V1[slot][idx1] = vals[1]
        if self.adjust:
            V0, V1 = adjust_leaf_values(tree, V0, V1, B0, B1)
        return V0, V1


class NetLeafEvaluator(LeafEvaluator):
    """Value-network leaf evaluation: one batched forward per query.

    `encoder(game, pbs)` produces the public feature vector; the network
    input is [features, p0 beliefs over the full deck, p1 beliefs over
    the full deck] and the output is ante-normalized per-card values for
    both players, which are rescaled to chips here.
    """

    def __init__(self, game, net, encoder, adjust: bool = True):
        self.game = game
        self.net = net
        self.encoder = encoder
        self.adjust = adjust

    def _leaf_features(self, tree: SubgameTree):
        feats = tree.cache.get("leaf_feats")
        if feats is None:
            rows = []
            for slot in range(tree.leaf_count):
                node = int(tree.leaf_nodes[slot])
                public = tree.pubkeys[node]
                lc0 = live_cards(tree.game, public, 0)
                lc1 = live_cards(tree.game, public, 1)
                b0 = np.full(len(lc0), 1.0 / max(len(lc0), 1))
                b1 = np.full(len(lc1), 1.0 / max(len(lc1), 1))
                pbs = PublicBeliefState(public=public, cards=(lc0, lc1), beliefs=(b0, b1))
                rows.append(self.encoder(self.game, pbs))
            feats = np.array(rows) if rows else np.zeros((0, 0))
            tree.cache["leaf_feats"] = feats
        return feats

    def _full_space(self, tree, B, player):
        deck = list(self.game.deal_cards(player))
        cards = tree.cards0 if player == 0 else tree.cards1
        out = np.zeros((B.shape[0], len(deck)))
        cols = [deck.index(c) for c in cards]
        out[:, cols] = B
        return out, cols

    def evaluate(self, tree: SubgameTree, B0, B1):
        L = tree.leaf_count
        feats = self._leaf_features(tree)
        F0, cols0 = self._full_space(tree, B0, 0)
        F1, cols1 = self._full_space(tree, B1, 1)
        x = np.concatenate([feats, F0, F1], axis=1)
        y = self.net.forward(x)
        if not np.isfinite(y).all():
            raise LeafEvalFailedError("value network produced non-finite output")
        n_deck0 = F0.shape[1]
        ante = self.game.ante
        V0 = y[:, :n_deck0][:, cols0] * ante
        V1 = y[:, n_deck0:][:, cols1] * ante
        if self.adjust:
            V0, V1 = adjust_leaf_values(tree, V0, V1, B0, B1)
        return V0, V1


@dataclass
class RebelResult:
    profile: StrategyProfile
    root_value: float
    next_pbs: PublicBeliefState | None
    pbs_sample: PbsSample
    values: tuple
    cards: tuple
    root_player: int
    solver: Solver

    def player_value(self, p: int) -> float:
        b = self.solver.tree.root.beliefs[p]
        return float(b @ self.values[p])


def _sample_trajectory(game, tree: SubgameTree, solver: Solver, rng):
    """Walk a concrete deal through the subgame under the current sigma.

    Returns the reached leaf slot, or None when the walk ends at a
    terminal.
    """
    b0, b1 = tree.root.beliefs
    mu = np.outer(b0, b1) * tree.C0
    total = mu.sum()
    if total <= 0.0:
        return None
    flat = int(rng.choice(mu.size, p=(mu / total).ravel()))
    i0, j1 = divmod(flat, tree.n1)
    state = game.state_from_public(tree.root.public, tree.cards0[i0], tree.cards1[j1])
    u = 0
    while True:
        k = int(tree.kind[u])
        if k == KIND_TERMINAL:
            return None
        if k == KIND_LEAF:
            return int(tree.leaf_slot[u])
        if k == KIND_DECISION:
            p = int(tree.player[u])
            na = int(tree.nact[u])
            base = int(tree.off_e[u])
            row = i0 if p == 0 else j1
            probs = solver.sigma[base + row * na: base + (row + 1) * na]
            ai = int(rng.choice(na, p=probs / probs.sum()))
            state = game.apply(state, tree.edges[u][ai])
            u = int(tree.children[tree.child_off[u] + ai])
        elif k == KIND_CHANCE:
            outs = game.chance_outcomes(state)
            ps = np.array([q for _, q in outs])
            oi = int(rng.choice(len(outs), p=ps / ps.sum()))
            act = outs[oi][0]
            state = game.apply(state, act)
            ids = [e.outcome_id for e in tree.edges[u]]
            u = int(tree.children[tree.child_off[u] + ids.index(act.outcome_id)])


def rebel_solve(game, root: PublicBeliefState, abstraction, value_fn,
                params: DcfrParams, explore=None, rng=None,
                nonroot_policy=None, depth_rounds: int | None = 1,
                collector=None, tree_cache: dict | None = None) -> RebelResult:
    """Solve the subgame at `root`; optionally sample the next leaf pbs.

    `explore` carries the leaf-sampling epsilon and enables pot
    perturbation of the sampled pbs; explore=None skips sampling (value
    queries). The emitted PbsSample holds the zero-sum adjusted
    running-average value vector.

    `tree_cache` (optional dict) reuses built trees across calls with the
    same public root, abstraction and depth; structure is belief-free so
    only the root pbs is swapped. The caller owns invalidation, which
    matters when nonroot_policy output changes between calls.
    """
    if tree_cache is not None:
        key = (root.public.text(),
               tuple(a.token() for a in abstraction), depth_rounds)
        tree = tree_cache.get(key)
        if tree is None:
            tree = build_subgame(game, root, abstraction, nonroot_policy, depth_rounds)
            tree_cache[key] = tree
        else:
            tree = replace(tree, root=root)
    else:
        tree = build_subgame(game, root, abstraction, nonroot_policy, depth_rounds)
    solver = Solver(tree, params, value_fn)
    t_sample = None
    if explore is not None and rng is not None:
        t_sample = int(rng.integers(1, params.iterations + 1))
    picked = {"slot": None, "B0": None, "B1": None}

    def on_iteration(sv: Solver):
        if t_sample is None or sv.t != t_sample:
            return
        if tree.leaf_count == 0:
            return
        if rng.random() < explore.epsilon:
            picked["slot"] = int(rng.integers(0, tree.leaf_count))
        else:
            picked["slot"] = _sample_trajectory(game, tree, sv, rng)
        if picked["slot"] is not None:
            B0, B1 = sv.leaf_beliefs()
            picked["B0"] = B0[picked["slot"]]
            picked["B1"] = B1[picked["slot"]]

    solver.run(on_iteration=on_iteration if t_sample is not None else None)

    next_pbs = None
    if picked["slot"] is not None:
        next_pbs = leaf_pbs(tree, picked["slot"], picked["B0"], picked["B1"])
        next_pbs = perturb_pbs(game, next_pbs, rng)

    vbar0, vbar1 = solver.root_value_vectors()
    adj0, adj1 = zero_sum_adjust(
        game, (tree.cards0, tree.cards1), (vbar0, vbar1), root.beliefs
    )
    sample = PbsSample(pbs=root, values=(adj0, adj1))
    if collector is not None:
        collector.append(sample)
    return RebelResult(
        profile=solver.average_profile(),
        root_value=solver.acting_root_value(),
        next_pbs=next_pbs,
        pbs_sample=sample,
        values=(vbar0, vbar1),
        cards=(tree.cards0, tree.cards1),
        root_player=solver.root_player,
        solver=solver,
    )
