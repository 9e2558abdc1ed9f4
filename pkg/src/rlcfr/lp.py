"""Sequence-form linear programming oracle over flattened subgame trees.

Solves max_x min_y x'Ay with realization-plan polytopes via scipy's
HiGHS backend, one LP per player, and extracts behavioral strategies.
Used as an independent equilibrium oracle in tests and as the exact-Nash
agent in matches. Depth-limited trees are rejected: leaf value vectors
do not reduce to a single zero-sum payoff matrix.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .cfr import StrategyProfile
from .errors import LeafEvalFailedError
from .games.base import InfoStateKey
from .tree import KIND_DECISION, SubgameTree


def _sequence_layout(tree: SubgameTree, p: int):
    """Sequence ids and per-(node, card) parent sequences for player p.

    Returns (n_seq, seq_at: (N, n_p) parent-sequence array, infostates:
    list of (node, card_idx, parent_seq, [(action_idx, seq_id), ...])).
    """
    n = tree.n0 if p == 0 else tree.n1
    N = tree.node_count
    seq_at = np.zeros((N, n), dtype=np.int64)
    infostates = []
    n_seq = 1  # 0 is the empty sequence
    for u in range(N):
        if tree.kind[u] == KIND_DECISION and tree.player[u] == p:
            na = int(tree.nact[u])
            base = int(tree.off_e[u])
            co = int(tree.child_off[u])
            valid = tree.valid0[u] if p == 0 else tree.valid1[u]
            for c in range(n):
                if not valid[c]:
                    for ai in range(na):
                        ch = int(tree.children[co + ai])
                        seq_at[ch, c] = seq_at[u, c]
                    continue
                moves = []
                for ai in range(na):
                    ch = int(tree.children[co + ai])
                    if tree.legal[base + c * na + ai] != 0.0:
                        moves.append((ai, n_seq))
                        seq_at[ch, c] = n_seq
                        n_seq += 1
                    else:
                        seq_at[ch, c] = seq_at[u, c]
                infostates.append((u, c, int(seq_at[u, c]), moves))
        else:
            for ci in range(int(tree.child_off[u]), int(tree.child_off[u + 1])):
                ch = int(tree.children[ci])
                seq_at[ch, :] = seq_at[u, :]
    return n_seq, seq_at, infostates


def _flow_matrix(n_seq, infostates):
    """Realization-plan constraints E x = e (root row plus one per infostate)."""
    rows, cols, vals = [0], [0], [1.0]
    for k, (_, _, parent, moves) in enumerate(infostates):
        r = k + 1
        rows.append(r)
        cols.append(parent)
        vals.append(-1.0)
        for _, sid in moves:
            rows.append(r)
            cols.append(sid)
            vals.append(1.0)
    m = len(infostates) + 1
    E = sparse.coo_matrix((vals, (rows, cols)), shape=(m, n_seq)).tocsr()
    e = np.zeros(m)
    e[0] = 1.0
    return E, e


def _payoff_matrix(tree: SubgameTree, seq0, seq1, sign: float):
    """A[s0, s1] = sum of belief-weighted terminal utilities, p0 perspective × sign."""
    b0, b1 = tree.root.beliefs
    z = tree.joint_normalizer()
    rows, cols, vals = [], [], []
    term_nodes = np.nonzero(tree.kind == 2)[0]
    for u in term_nodes:
        t = int(tree.term_slot[u])
        wu = tree.WU[t]
        nz = np.nonzero(wu)
        for i, j in zip(*nz):
            rows.append(seq0[u, i])
            cols.append(seq1[u, j])
            vals.append(sign * b0[i] * b1[j] * wu[i, j] / z)
    n0s = int(seq0.max()) + 1
    n1s = int(seq1.max()) + 1
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n0s, n1s)).tocsr()


def _solve_one_side(A, E_own, e_own, E_opp, e_opp):
    """LP for the row player of A: maximize the guaranteed value.

    Variables are [x (own plan), v (opponent dual)]; returns (x, value).
    """
    n_own = E_own.shape[1]
    n_v = E_opp.shape[0]
    # F' v <= A' x  for every opponent sequence
    G = sparse.hstack([-A.T.tocsr(), E_opp.T.tocsr()]).tocsr()
    h = np.zeros(G.shape[0])
    A_eq = sparse.hstack([E_own, sparse.csr_matrix((E_own.shape[0], n_v))]).tocsr()
    c = np.zeros(n_own + n_v)
    c[n_own:] = -e_opp  # maximize f'v
    bounds = [(0.0, 1.0)] * n_own + [(None, None)] * n_v
    res = linprog(c, A_ub=G, b_ub=h, A_eq=A_eq, b_eq=e_own,
                  bounds=bounds, method="highs")
    if not res.success:
        raise LeafEvalFailedError("sequence-form LP failed: %s" % res.message)
    x = np.maximum(res.x[:n_own], 0.0)
    value = -res.fun
    return x, value


def _behavioral(tree: SubgameTree, p: int, x, infostates, profile: StrategyProfile):
    cards = tree.cards0 if p == 0 else tree.cards1
    for u, c, parent, moves in infostates:
        na = int(tree.nact[u])
        base = int(tree.off_e[u])
        mask = tree.legal[base + c * na: base + (c + 1) * na]
        probs = np.zeros(na)
        parent_mass = x[parent]
        if parent_mass > 1e-12:
            for ai, sid in moves:
                probs[ai] = max(x[sid], 0.0) / parent_mass
            total = probs.sum()
            if total > 0.0:
                probs /= total
            else:
                probs = mask / mask.sum()
        else:
            probs = mask / mask.sum()
        key = InfoStateKey(
            player=p, private_cards=(cards[c],), public=tree.pubkeys[u]
        ).text()
        profile.set(key, tuple(tree.edges[u]), probs)


def lp_solve(tree: SubgameTree):
    """Equilibrium profile and the game value (p0 chips) via two LPs."""
    if tree.leaf_count:
        raise LeafEvalFailedError("LP oracle requires a depth-unlimited tree")
    ns0, seq0, info0 = _sequence_layout(tree, 0)
    ns1, seq1, info1 = _sequence_layout(tree, 1)
    E0, e0 = _flow_matrix(ns0, info0)
    E1, e1 = _flow_matrix(ns1, info1)
    A = _payoff_matrix(tree, seq0, seq1, 1.0)
    x0, v0 = _solve_one_side(A, E0, e0, E1, e1)
    x1, v1 = _solve_one_side(-A.T, E1, e1, E0, e0)
    profile = StrategyProfile()
    _behavioral(tree, 0, x0, info0, profile)
    _behavioral(tree, 1, x1, info1, profile)
    return profile, v0, v1


def lp_game_value(tree: SubgameTree) -> float:
    """Game value for p0 under optimal play, chips."""
    return lp_solve(tree)[1]
