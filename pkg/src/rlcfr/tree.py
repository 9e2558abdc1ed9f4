"""Depth-limited public subgame trees in flattened array form.

The tree is built once per solve from a root public belief state. Nodes
are stored in preorder, so every child index is larger than its parent:
a forward scan is a root-to-leaf pass and a reverse scan is a leaf-to-root
pass. Per-infostate tables (regrets, strategy sums) live in a single flat
array indexed by node offset + card row * action count.

Private assignments are tracked as an (i, j) matrix per node. An entry is
None when that assignment cannot reach the node through its own player's
actions; chance incompatibility instead zeroes the weight matrix. Payoff
and weight matrices are prefolded with the joint deal weights so the
solver sweeps are plain matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .belief import PublicBeliefState, live_cards
from .errors import EmptyAbstractionError, IllegalAbstractionError
from .games.base import Game, GameAction, sorted_actions

KIND_DECISION = 0
KIND_CHANCE = 1
KIND_TERMINAL = 2
KIND_LEAF = 3


@dataclass
class SubgameTree:
    game: Game
    root: PublicBeliefState
    cards0: tuple
    cards1: tuple
    depth_rounds: int | None
    # node arrays, preorder
    kind: np.ndarray  # int8
    player: np.ndarray  # int8, acting player at decision nodes else -1
    nact: np.ndarray  # int32 child count
    child_off: np.ndarray  # int32 (N+1,) CSR offsets into children
    children: np.ndarray  # int32
    off_e: np.ndarray  # int64 element offset of each decision node's table block
    term_slot: np.ndarray  # int32, -1 for non-terminals
    leaf_slot: np.ndarray  # int32, -1 for non-leaves
    legal: np.ndarray  # float64 (table_size,) 0/1 mask
    valid0: np.ndarray  # uint8 (N, n0) assignment-reachable mask
    valid1: np.ndarray  # uint8 (N, n1)
    WU: np.ndarray  # (n_terminals, n0, n1) weight * p0 utility
    LW: np.ndarray  # (n_leaves, n0, n1) leaf weight matrices
    leaf_nodes: np.ndarray  # int32 node index per leaf slot
    C0: np.ndarray  # (n0, n1) root compatibility weights
    table_size: int
    edges: list  # per node, list of GameAction aligned with children
    pubkeys: list  # per node PublicStateKey
    rounds: np.ndarray  # int8 betting round per node
    cache: dict = field(default_factory=dict)

    @property
    def n0(self) -> int:
        return len(self.cards0)

    @property
    def n1(self) -> int:
        return len(self.cards1)

    @property
    def node_count(self) -> int:
        return int(self.kind.shape[0])

    @property
    def leaf_count(self) -> int:
        return int(self.leaf_nodes.shape[0])

    def decision_nodes(self):
        return np.nonzero(self.kind == KIND_DECISION)[0]

    def root_denominators(self):
        """Counterfactual normalizers d_p(card) under the root beliefs."""
        b0, b1 = self.root.beliefs
        return self.C0 @ b1, self.C0.T @ b0

    def joint_normalizer(self) -> float:
        b0, b1 = self.root.beliefs
        return float(b0 @ self.C0 @ b1)


def build_subgame(
    game: Game,
    root: PublicBeliefState,
    root_abstraction,
    nonroot_policy=None,
    depth_rounds: int | None = 1,
) -> SubgameTree:
    """Expand the public tree below `root`.

    `root_abstraction` is the action list used at the root. Interior
    decision nodes use `nonroot_policy(game, state)` (a representative
    concrete state) or the full legal set when no policy is given.
    Expansion stops at terminals, and at the first node of a betting
    round more than `depth_rounds - 1` rounds past the root; those become
    leaf nodes. depth_rounds=None expands the full game.
    """
    cards0 = tuple(root.cards[0])
    cards1 = tuple(root.cards[1])
    n0, n1 = len(cards0), len(cards1)
    C0 = np.zeros((n0, n1))
    root_states = {}
    for i0, i in enumerate(cards0):
        for j1, j in enumerate(cards1):
            w = game.joint_deal_weight(i, j)
            if w > 0.0:
                C0[i0, j1] = w
                root_states[(i0, j1)] = game.state_from_public(root.public, i, j)
    if not root_states:
        raise EmptyAbstractionError("root pbs has no compatible private assignment")
    rep0 = next(iter(root_states.values()))
    if rep0.acting not in (0, 1):
        raise IllegalAbstractionError("subgame root must be a player decision node")
    root_round = rep0.round

    if not root_abstraction:
        raise EmptyAbstractionError("root abstraction is empty")

    kind, player, nact = [], [], []
    child_lists, off_e, term_slot, leaf_slot = [], [], [], []
    legal_chunks, valid0_rows, valid1_rows = [], [], []
    WU_list, LW_list, leaf_nodes = [], [], []
    edges, pubkeys, rounds = [], [], []
    table_size = 0

    def new_node(k, pl, pubkey, rnd, v0, v1):
        kind.append(k)
        player.append(pl)
        nact.append(0)
        child_lists.append([])
        off_e.append(0)
        term_slot.append(-1)
        leaf_slot.append(-1)
        valid0_rows.append(v0)
        valid1_rows.append(v1)
        edges.append([])
        pubkeys.append(pubkey)
        rounds.append(rnd)
        return len(kind) - 1

    def assignment_masks(states, weights):
        v0 = np.zeros(n0, dtype=np.uint8)
        v1 = np.zeros(n1, dtype=np.uint8)
        for (i0, j1), s in states.items():
            if s is not None and weights[i0, j1] > 0.0:
                v0[i0] = 1
                v1[j1] = 1
        return v0, v1

    def expand(states, weights, is_root):
        nonlocal table_size
        rep = next(s for s in states.values() if s is not None)
        v0, v1 = assignment_masks(states, weights)
        pubkey = game.public_key(rep)

        if rep.is_terminal():
            u = np.zeros((n0, n1))
            for (i0, j1), s in states.items():
                if s is not None and weights[i0, j1] > 0.0:
                    u[i0, j1] = game.terminal_utility(s, 0)
            node = new_node(KIND_TERMINAL, -2, pubkey, rep.round, v0, v1)
            term_slot[node] = len(WU_list)
            WU_list.append(weights * u)
            return node

        if (
            depth_rounds is not None
            and rep.round - root_round >= depth_rounds
            and not is_root
        ):
            node = new_node(KIND_LEAF, -2, pubkey, rep.round, v0, v1)
            leaf_slot[node] = len(LW_list)
            LW_list.append(weights.copy())
            leaf_nodes.append(node)
            return node

        if rep.is_chance():
            node = new_node(KIND_CHANCE, -1, pubkey, rep.round, v0, v1)
            outcome_ids = set()
            for s in states.values():
                if s is not None:
                    outcome_ids.update(a.outcome_id for a, _ in game.chance_outcomes(s))
            for oid in sorted(outcome_ids):
                act = GameAction(kind=4, outcome_id=oid)
                cs, cw = {}, np.zeros((n0, n1))
                for (i0, j1), s in states.items():
                    if s is None or weights[i0, j1] <= 0.0:
                        cs[(i0, j1)] = None
                        continue
                    q = dict((a.outcome_id, pr) for a, pr in game.chance_outcomes(s))
                    if oid in q and q[oid] > 0.0:
                        cs[(i0, j1)] = game.apply(s, act)
                        cw[i0, j1] = weights[i0, j1] * q[oid]
                    else:
                        cs[(i0, j1)] = None
                edges[node].append(act)
                child_lists[node].append(expand(cs, cw, False))
            nact[node] = len(child_lists[node])
            return node

        # player decision node
        p = rep.acting
        legal_by_card = {}
        for (i0, j1), s in states.items():
            if s is None:
                continue
            row = i0 if p == 0 else j1
            if row not in legal_by_card:
                legal_by_card[row] = set(game.legal_actions(s))
        if is_root:
            actions = list(root_abstraction)
        elif nonroot_policy is not None:
            actions = list(nonroot_policy(game, rep))
        else:
            union = set()
            for acts in legal_by_card.values():
                union.update(acts)
            actions = sorted_actions(union)
        if not actions:
            raise EmptyAbstractionError("empty action set at %s" % pubkey.text())
        node = new_node(KIND_DECISION, p, pubkey, rep.round, v0, v1)
        na = len(actions)
        nrows = n0 if p == 0 else n1
        off_e[node] = table_size
        table_size += nrows * na
        mask = np.zeros((nrows, na))
        any_legal = [False] * na
        for row in range(nrows):
            if row in legal_by_card:
                for ai, a in enumerate(actions):
                    if a in legal_by_card[row]:
                        mask[row, ai] = 1.0
                        any_legal[ai] = True
                if not mask[row].any():
                    raise EmptyAbstractionError(
                        "abstraction leaves no legal action for a live infostate at %s"
                        % pubkey.text()
                    )
            else:
                mask[row, :] = 1.0  # unreachable row, filler
        for ai, a in enumerate(actions):
            if not any_legal[ai]:
                raise IllegalAbstractionError(
                    "action %s illegal for every infostate at %s"
                    % (a.token(), pubkey.text())
                )
        legal_chunks.append(mask.ravel())
        for ai, a in enumerate(actions):
            cs = {}
            for (i0, j1), s in states.items():
                if s is None:
                    cs[(i0, j1)] = None
                    continue
                row = i0 if p == 0 else j1
                cs[(i0, j1)] = game.apply(s, a) if mask[row, ai] > 0.0 else None
            edges[node].append(a)
            child_lists[node].append(expand(cs, weights, False))
        nact[node] = na
        return node

    full_states = {
        (i0, j1): root_states.get((i0, j1))
        for i0 in range(n0)
        for j1 in range(n1)
    }
    expand(full_states, C0.copy(), True)

    nnodes = len(kind)
    child_off = np.zeros(nnodes + 1, dtype=np.int32)
    for u in range(nnodes):
        child_off[u + 1] = child_off[u] + len(child_lists[u])
    children = np.array(
        [c for lst in child_lists for c in lst], dtype=np.int32
    ) if child_off[-1] else np.zeros(0, dtype=np.int32)
    legal = np.concatenate(legal_chunks) if legal_chunks else np.zeros(0)

    return SubgameTree(
        game=game,
        root=root,
        cards0=cards0,
        cards1=cards1,
        depth_rounds=depth_rounds,
        kind=np.array(kind, dtype=np.int8),
        player=np.array(player, dtype=np.int8),
        nact=np.array(nact, dtype=np.int32),
        child_off=child_off,
        children=children,
        off_e=np.array(off_e, dtype=np.int64),
        term_slot=np.array(term_slot, dtype=np.int32),
        leaf_slot=np.array(leaf_slot, dtype=np.int32),
        legal=legal,
        valid0=np.array(valid0_rows, dtype=np.uint8),
        valid1=np.array(valid1_rows, dtype=np.uint8),
        WU=np.array(WU_list) if WU_list else np.zeros((0, n0, n1)),
        LW=np.array(LW_list) if LW_list else np.zeros((0, n0, n1)),
        leaf_nodes=np.array(leaf_nodes, dtype=np.int32),
        C0=C0,
        table_size=table_size,
        edges=edges,
        pubkeys=pubkeys,
        rounds=np.array(rounds, dtype=np.int8),
    )


def leaf_pbs(tree: SubgameTree, slot: int, beliefs0, beliefs1) -> PublicBeliefState:
    """Materialize the pbs at a leaf from per-root-card belief vectors."""
    node = int(tree.leaf_nodes[slot])
    public = tree.pubkeys[node]
    lc0 = live_cards(tree.game, public, 0)
    lc1 = live_cards(tree.game, public, 1)
    idx0 = [tree.cards0.index(c) for c in lc0]
    idx1 = [tree.cards1.index(c) for c in lc1]
    b0 = np.asarray(beliefs0, dtype=np.float64)[idx0]
    b1 = np.asarray(beliefs1, dtype=np.float64)[idx1]
    s0, s1 = b0.sum(), b1.sum()
    b0 = b0 / s0 if s0 > 0.0 else np.full(len(idx0), 1.0 / max(len(idx0), 1))
    b1 = b1 / s1 if s1 > 0.0 else np.full(len(idx1), 1.0 / max(len(idx1), 1))
    return PublicBeliefState(public=public, cards=(tuple(lc0), tuple(lc1)), beliefs=(b0, b1))
