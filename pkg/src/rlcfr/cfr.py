"""Discounted CFR over flattened public subgame trees.

The solver sweeps the preorder node arrays with numba-compiled kernels:
a down pass regret-matches every decision table and propagates per-card
reach vectors, an up pass folds counterfactual values back to the root
and applies regret / average-strategy updates. Leaf values are
re-estimated once per iteration from the current iterate's reaches and
held fixed for that iteration's player updates and value pass.

Averaging follows two clocks on purpose: strategy tables are discounted
with the gamma weighting (average strategy), while reported root value
vectors keep the (t-1)/(t+1), 2/(t+1) running average. Both are updated
inside the same iteration loop, so depth-limited drivers built on
Solver see identical arithmetic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    EmptyActionsError,
    IncompleteProfileError,
    LeafEvalFailedError,
)
from .games.base import InfoStateKey
from .tree import KIND_DECISION, SubgameTree

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


UPDATE_MODES = ("alternating", "simultaneous")


@dataclass
class DcfrParams:
    alpha: float = 1.5
    beta: float = 0.0
    gamma: float = 2.0
    iterations: int = 250
    updates: str = "alternating"

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.updates not in UPDATE_MODES:
            raise ConfigError("updates must be one of %s" % (UPDATE_MODES,))


def regret_match(regrets) -> np.ndarray:
    r = np.asarray(regrets, dtype=np.float64)
    if r.size == 0:
        raise EmptyActionsError("regret_match on empty action set")
    pos = np.maximum(r, 0.0)
    total = pos.sum()
    if total > 0.0:
        return pos / total
    return np.full(r.size, 1.0 / r.size)


def dcfr_discount(t: int, value: float, params: DcfrParams, kind: str = "regret") -> float:
    """Scale a cumulative quantity after iteration t per the discount rule."""
    if t < 1:
        raise ConfigError("discount iteration must be >= 1")
    if kind == "strategy":
        return value * (t / (t + 1.0)) ** params.gamma
    ta = t ** params.alpha
    tb = t ** params.beta
    if value > 0.0:
        return value * (ta / (ta + 1.0))
    if value < 0.0:
        return value * (tb / (tb + 1.0))
    return 0.0


class StrategyProfile:
    """Ordered map from infostate key text to (actions, probability vector).

    Rows loaded from text carry actions=None; action lists are resolved
    against a tree when the profile is replayed.
    """

    def __init__(self):
        self.rows = {}

    def set(self, key_text: str, actions, probs):
        self.rows[key_text] = (actions, np.asarray(probs, dtype=np.float64))

    def get(self, key_text: str):
        return self.rows.get(key_text)

    def probs(self, key_text: str) -> np.ndarray:
        row = self.rows.get(key_text)
        if row is None:
            raise IncompleteProfileError("profile missing infostate %s" % key_text)
        return row[1]

    def action_prob(self, key_text: str, action) -> float:
        actions, p = self.rows[key_text] if key_text in self.rows else (None, None)
        if p is None:
            raise IncompleteProfileError("profile missing infostate %s" % key_text)
        if actions is None or action not in actions:
            return 0.0
        return float(p[actions.index(action)])

    def __len__(self):
        return len(self.rows)

    def __contains__(self, key_text):
        return key_text in self.rows

    def items(self):
        return self.rows.items()

    def save_text(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for key, (_, p) in self.rows.items():
                fh.write("%s\t%s\n" % (key, ",".join("%.12g" % x for x in p)))

    @classmethod
    def load_text(cls, path):
        prof = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                key, _, body = line.partition("\t")
                if not body:
                    raise ConfigError("malformed profile line: %r" % line)
                probs = np.array([float(x) for x in body.split(",")])
                prof.rows[key] = (None, probs)
        return prof


class LeafEvaluator:
    """Maps leaf beliefs to per-card values for both players.

    evaluate receives the tree plus row-normalized belief matrices over
    the root card spaces, one row per leaf slot, and returns (V0, V1) of
    shapes (L, n0), (L, n1) in chips.
    """

    def evaluate(self, tree: SubgameTree, B0: np.ndarray, B1: np.ndarray):
        raise NotImplementedError


class TerminalOnlyEvaluator(LeafEvaluator):
    """For depth-unlimited trees; fails loudly if any leaf exists."""

    def evaluate(self, tree, B0, B1):
        raise LeafEvalFailedError("tree has leaf nodes but no leaf evaluator was given")


@njit(cache=True)
def _down(kind, player, nact, child_off, children, off_e, legal,
          regrets, sigma, reach0, reach1, b0, b1, use_regrets):
    N = kind.shape[0]
    n0 = reach0.shape[1]
    n1 = reach1.shape[1]
    for i in range(n0):
        reach0[0, i] = b0[i]
    for j in range(n1):
        reach1[0, j] = b1[j]
    for u in range(N):
        k = kind[u]
        if k == 0:
            p = player[u]
            na = nact[u]
            base = off_e[u]
            nrows = n0 if p == 0 else n1
            if use_regrets:
                for c in range(nrows):
                    rowb = base + c * na
                    s = 0.0
                    for a in range(na):
                        if legal[rowb + a] != 0.0 and regrets[rowb + a] > 0.0:
                            s += regrets[rowb + a]
                    if s > 0.0:
                        for a in range(na):
                            if legal[rowb + a] != 0.0 and regrets[rowb + a] > 0.0:
                                sigma[rowb + a] = regrets[rowb + a] / s
                            else:
                                sigma[rowb + a] = 0.0
                    else:
                        nl = 0
                        for a in range(na):
                            if legal[rowb + a] != 0.0:
                                nl += 1
                        inv = 1.0 / nl
                        for a in range(na):
                            if legal[rowb + a] != 0.0:
                                sigma[rowb + a] = inv
                            else:
                                sigma[rowb + a] = 0.0
            co = child_off[u]
            if p == 0:
                for a in range(na):
                    ch = children[co + a]
                    for i in range(n0):
                        reach0[ch, i] = reach0[u, i] * sigma[base + i * na + a]
                    for j in range(n1):
                        reach1[ch, j] = reach1[u, j]
            else:
                for a in range(na):
                    ch = children[co + a]
                    for i in range(n0):
                        reach0[ch, i] = reach0[u, i]
                    for j in range(n1):
                        reach1[ch, j] = reach1[u, j] * sigma[base + j * na + a]
        elif k == 1:
            for ci in range(child_off[u], child_off[u + 1]):
                ch = children[ci]
                for i in range(n0):
                    reach0[ch, i] = reach0[u, i]
                for j in range(n1):
                    reach1[ch, j] = reach1[u, j]


@njit(cache=True)
def _up(kind, player, nact, child_off, children, off_e, legal,
        term_slot, WU, leaf_slot, LW, V0, V1,
        sigma, reach0, reach1, cfv0, cfv1,
        regrets, ssum, upd0, upd1, acc0, acc1):
    N = kind.shape[0]
    n0 = cfv0.shape[1]
    n1 = cfv1.shape[1]
    for u in range(N - 1, -1, -1):
        k = kind[u]
        if k == 2:
            t = term_slot[u]
            for i in range(n0):
                s = 0.0
                for j in range(n1):
                    s += WU[t, i, j] * reach1[u, j]
                cfv0[u, i] = s
            for j in range(n1):
                s = 0.0
                for i in range(n0):
                    s += WU[t, i, j] * reach0[u, i]
                cfv1[u, j] = -s
        elif k == 3:
            l = leaf_slot[u]
            for i in range(n0):
                m = 0.0
                for j in range(n1):
                    m += LW[l, i, j] * reach1[u, j]
                cfv0[u, i] = V0[l, i] * m
            for j in range(n1):
                m = 0.0
                for i in range(n0):
                    m += LW[l, i, j] * reach0[u, i]
                cfv1[u, j] = V1[l, j] * m
        elif k == 1:
            for i in range(n0):
                cfv0[u, i] = 0.0
            for j in range(n1):
                cfv1[u, j] = 0.0
            for ci in range(child_off[u], child_off[u + 1]):
                ch = children[ci]
                for i in range(n0):
                    cfv0[u, i] += cfv0[ch, i]
                for j in range(n1):
                    cfv1[u, j] += cfv1[ch, j]
        else:
            p = player[u]
            na = nact[u]
            base = off_e[u]
            co = child_off[u]
            if p == 0:
                for i in range(n0):
                    s = 0.0
                    for a in range(na):
                        s += sigma[base + i * na + a] * cfv0[children[co + a], i]
                    cfv0[u, i] = s
                for j in range(n1):
                    s = 0.0
                    for a in range(na):
                        s += cfv1[children[co + a], j]
                    cfv1[u, j] = s
                if upd0:
                    for i in range(n0):
                        rowb = base + i * na
                        for a in range(na):
                            if legal[rowb + a] != 0.0:
                                regrets[rowb + a] += cfv0[children[co + a], i] - cfv0[u, i]
                if acc0:
                    for i in range(n0):
                        rowb = base + i * na
                        for a in range(na):
                            ssum[rowb + a] += reach0[u, i] * sigma[rowb + a]
            else:
                for j in range(n1):
                    s = 0.0
                    for a in range(na):
                        s += sigma[base + j * na + a] * cfv1[children[co + a], j]
                    cfv1[u, j] = s
                for i in range(n0):
                    s = 0.0
                    for a in range(na):
                        s += cfv0[children[co + a], i]
                    cfv0[u, i] = s
                if upd1:
                    for j in range(n1):
                        rowb = base + j * na
                        for a in range(na):
                            if legal[rowb + a] != 0.0:
                                regrets[rowb + a] += cfv1[children[co + a], j] - cfv1[u, j]
                if acc1:
                    for j in range(n1):
                        rowb = base + j * na
                        for a in range(na):
                            ssum[rowb + a] += reach1[u, j] * sigma[rowb + a]


@njit(cache=True)
def _apply_discount(regrets, ssum, fpos, fneg, fgamma):
    for e in range(regrets.shape[0]):
        r = regrets[e]
        if r > 0.0:
            regrets[e] = r * fpos
        elif r < 0.0:
            regrets[e] = r * fneg
        ssum[e] *= fgamma


@njit(cache=True)
def _br_up(kind, player, nact, child_off, children, off_e, legal,
           term_slot, WU, leaf_slot, LW, V0, V1,
           reach0, reach1, br0, br1):
    N = kind.shape[0]
    n0 = br0.shape[1]
    n1 = br1.shape[1]
    for u in range(N - 1, -1, -1):
        k = kind[u]
        if k == 2:
            t = term_slot[u]
            for i in range(n0):
                s = 0.0
                for j in range(n1):
                    s += WU[t, i, j] * reach1[u, j]
                br0[u, i] = s
            for j in range(n1):
                s = 0.0
                for i in range(n0):
                    s += WU[t, i, j] * reach0[u, i]
                br1[u, j] = -s
        elif k == 3:
            l = leaf_slot[u]
            for i in range(n0):
                m = 0.0
                for j in range(n1):
                    m += LW[l, i, j] * reach1[u, j]
                br0[u, i] = V0[l, i] * m
            for j in range(n1):
                m = 0.0
                for i in range(n0):
                    m += LW[l, i, j] * reach0[u, i]
                br1[u, j] = V1[l, j] * m
        elif k == 1:
            for i in range(n0):
                br0[u, i] = 0.0
            for j in range(n1):
                br1[u, j] = 0.0
            for ci in range(child_off[u], child_off[u + 1]):
                ch = children[ci]
                for i in range(n0):
                    br0[u, i] += br0[ch, i]
                for j in range(n1):
                    br1[u, j] += br1[ch, j]
        else:
            p = player[u]
            na = nact[u]
            base = off_e[u]
            co = child_off[u]
            if p == 0:
                for i in range(n0):
                    best = -1.0e300
                    for a in range(na):
                        if legal[base + i * na + a] != 0.0:
                            v = br0[children[co + a], i]
                            if v > best:
                                best = v
                    br0[u, i] = best
                for j in range(n1):
                    s = 0.0
                    for a in range(na):
                        s += br1[children[co + a], j]
                    br1[u, j] = s
            else:
                for j in range(n1):
                    best = -1.0e300
                    for a in range(na):
                        if legal[base + j * na + a] != 0.0:
                            v = br1[children[co + a], j]
                            if v > best:
                                best = v
                    br1[u, j] = best
                for i in range(n0):
                    s = 0.0
                    for a in range(na):
                        s += br0[children[co + a], i]
                    br0[u, i] = s


@dataclass
class SubgameSolveResult:
    profile: StrategyProfile
    root_value: float
    values: tuple  # (v0, v1) running-average per-card value arrays, chips
    cards: tuple
    root_player: int
    iterations: int
    node_count: int
    table_size: int
    elapsed_ms: float
    tree: SubgameTree = field(repr=False, default=None)

    def player_value(self, p: int) -> float:
        b = self.tree.root.beliefs[p]
        return float(b @ self.values[p])

    def value_map(self, p: int) -> dict:
        pub = self.tree.root.public
        cards = self.cards[p]
        return {
            InfoStateKey(player=p, private_cards=(c,), public=pub).text(): float(v)
            for c, v in zip(cards, self.values[p])
        }


class Solver:
    """One CFR run over a fixed tree; reusable across driver front ends."""

    def __init__(self, tree: SubgameTree, params: DcfrParams, leaf_eval: LeafEvaluator = None):
        self.tree = tree
        self.params = params
        self.leaf_eval = leaf_eval if leaf_eval is not None else TerminalOnlyEvaluator()
        E = tree.table_size
        N = tree.node_count
        self.regrets = np.zeros(E)
        self.ssum = np.zeros(E)
        self.sigma = np.zeros(E)
        self.reach0 = np.zeros((N, tree.n0))
        self.reach1 = np.zeros((N, tree.n1))
        self.cfv0 = np.zeros((N, tree.n0))
        self.cfv1 = np.zeros((N, tree.n1))
        L = tree.leaf_count
        self.V0 = np.zeros((L, tree.n0))
        self.V1 = np.zeros((L, tree.n1))
        self.vbar0 = np.zeros(tree.n0)
        self.vbar1 = np.zeros(tree.n1)
        self.d0, self.d1 = tree.root_denominators()
        self.t = 0
        self.root_player = int(tree.player[0])

    # --- passes -----------------------------------------------------------

    def _run_down(self, use_regrets=True):
        t = self.tree
        _down(t.kind, t.player, t.nact, t.child_off, t.children, t.off_e, t.legal,
              self.regrets, self.sigma, self.reach0, self.reach1,
              t.root.beliefs[0], t.root.beliefs[1], use_regrets)

    def _run_up(self, upd0=False, upd1=False, acc0=False, acc1=False):
        t = self.tree
        _up(t.kind, t.player, t.nact, t.child_off, t.children, t.off_e, t.legal,
            t.term_slot, t.WU, t.leaf_slot, t.LW, self.V0, self.V1,
            self.sigma, self.reach0, self.reach1, self.cfv0, self.cfv1,
            self.regrets, self.ssum, upd0, upd1, acc0, acc1)

    def leaf_beliefs(self):
        """Row-normalized reach-based beliefs at every leaf, root card space."""
        t = self.tree
        ln = t.leaf_nodes
        B0 = self.reach0[ln] * t.valid0[ln]
        B1 = self.reach1[ln] * t.valid1[ln]
        for B, valid in ((B0, t.valid0[ln]), (B1, t.valid1[ln])):
            totals = B.sum(axis=1)
            dead = totals <= 0.0
            if dead.any():
                live_counts = valid[dead].sum(axis=1)
                B[dead] = valid[dead] / np.maximum(live_counts, 1)[:, None]
                totals = B.sum(axis=1)
            B /= np.maximum(totals, 1e-300)[:, None]
        return B0, B1

    def _evaluate_leaves(self):
        if self.tree.leaf_count == 0:
            return
        B0, B1 = self.leaf_beliefs()
        try:
            V0, V1 = self.leaf_eval.evaluate(self.tree, B0, B1)
        except LeafEvalFailedError:
            raise
        except Exception as exc:
            raise LeafEvalFailedError("leaf evaluator failed: %s" % exc) from exc
        V0 = np.asarray(V0, dtype=np.float64)
        V1 = np.asarray(V1, dtype=np.float64)
        if V0.shape != self.V0.shape or V1.shape != self.V1.shape:
            raise LeafEvalFailedError(
                "leaf evaluator returned shapes %s/%s, expected %s/%s"
                % (V0.shape, V1.shape, self.V0.shape, self.V1.shape)
            )
        if not (np.isfinite(V0).all() and np.isfinite(V1).all()):
            raise LeafEvalFailedError("leaf evaluator returned non-finite values")
        self.V0[...] = V0
        self.V1[...] = V1

    # --- iteration --------------------------------------------------------

    def iterate(self):
        p = self.params
        t = self.t + 1
        self._run_down()
        self._evaluate_leaves()
        if p.updates == "alternating":
            self._run_up(upd0=True, acc0=True)
            self._run_down()
            self._run_up(upd1=True, acc1=True)
        else:
            self._run_up(upd0=True, upd1=True, acc0=True, acc1=True)
        ta = t ** p.alpha
        tb = t ** p.beta
        _apply_discount(self.regrets, self.ssum,
                        ta / (ta + 1.0), tb / (tb + 1.0),
                        (t / (t + 1.0)) ** p.gamma)
        # value pass under the updated strategy, leaf values held fixed
        self._run_down()
        self._run_up()
        v0 = np.where(self.d0 > 0.0, self.cfv0[0] / np.maximum(self.d0, 1e-300), 0.0)
        v1 = np.where(self.d1 > 0.0, self.cfv1[0] / np.maximum(self.d1, 1e-300), 0.0)
        w_old = (t - 1.0) / (t + 1.0)
        w_new = 2.0 / (t + 1.0)
        self.vbar0 = w_old * self.vbar0 + w_new * v0
        self.vbar1 = w_old * self.vbar1 + w_new * v1
        self.t = t

    def run(self, on_iteration=None):
        start = time.perf_counter()
        for _ in range(self.params.iterations):
            self.iterate()
            if on_iteration is not None:
                on_iteration(self)
        self.elapsed_ms = (time.perf_counter() - start) * 1e3
        return self

    # --- extraction -------------------------------------------------------

    def average_profile(self) -> StrategyProfile:
        t = self.tree
        prof = StrategyProfile()
        for u in t.decision_nodes():
            p = int(t.player[u])
            na = int(t.nact[u])
            base = int(t.off_e[u])
            cards = t.cards0 if p == 0 else t.cards1
            valid = t.valid0[u] if p == 0 else t.valid1[u]
            actions = tuple(t.edges[u])
            for ci, card in enumerate(cards):
                if not valid[ci]:
                    continue
                row = self.ssum[base + ci * na: base + (ci + 1) * na]
                mask = t.legal[base + ci * na: base + (ci + 1) * na]
                total = row.sum()
                if total > 0.0:
                    probs = row / total
                else:
                    probs = mask / mask.sum()
                key = InfoStateKey(player=p, private_cards=(card,), public=t.pubkeys[u])
                prof.set(key.text(), actions, probs)
        return prof

    def root_value_vectors(self):
        return self.vbar0.copy(), self.vbar1.copy()

    def acting_root_value(self) -> float:
        b = self.tree.root.beliefs[self.root_player]
        v = self.vbar0 if self.root_player == 0 else self.vbar1
        return float(b @ v)

    def result(self) -> SubgameSolveResult:
        return SubgameSolveResult(
            profile=self.average_profile(),
            root_value=self.acting_root_value(),
            values=self.root_value_vectors(),
            cards=(self.tree.cards0, self.tree.cards1),
            root_player=self.root_player,
            iterations=self.t,
            node_count=self.tree.node_count,
            table_size=self.tree.table_size,
            elapsed_ms=getattr(self, "elapsed_ms", 0.0),
            tree=self.tree,
        )


def solve(tree: SubgameTree, params: DcfrParams, leaf_eval: LeafEvaluator = None) -> SubgameSolveResult:
    return Solver(tree, params, leaf_eval).run().result()


# --- fixed-profile evaluation ---------------------------------------------


def _fill_sigma_from_profile(tree: SubgameTree, profile: StrategyProfile,
                             players=(0, 1)) -> np.ndarray:
    """Sigma table for the given players' nodes; others get uniform-legal."""
    sigma = np.zeros(tree.table_size)
    for u in tree.decision_nodes():
        p = int(tree.player[u])
        na = int(tree.nact[u])
        base = int(tree.off_e[u])
        cards = tree.cards0 if p == 0 else tree.cards1
        valid = tree.valid0[u] if p == 0 else tree.valid1[u]
        actions = tuple(tree.edges[u])
        for ci, card in enumerate(cards):
            mask = tree.legal[base + ci * na: base + (ci + 1) * na]
            sl = slice(base + ci * na, base + (ci + 1) * na)
            if p not in players or not valid[ci]:
                sigma[sl] = mask / mask.sum()
                continue
            key = InfoStateKey(player=p, private_cards=(card,), public=tree.pubkeys[u]).text()
            row = profile.get(key)
            if row is None:
                raise IncompleteProfileError("profile missing infostate %s" % key)
            acts, probs = row
            if acts is not None and acts != actions:
                raise IncompleteProfileError(
                    "profile actions %s do not match tree actions at %s"
                    % ([a.token() for a in acts], key)
                )
            if len(probs) != na:
                raise IncompleteProfileError(
                    "profile row length %d does not match %d actions at %s"
                    % (len(probs), na, key)
                )
            sigma[sl] = probs * (mask > 0.0)
            tot = sigma[sl].sum()
            if tot > 0.0:
                sigma[sl] /= tot
            else:
                sigma[sl] = mask / mask.sum()
    return sigma


def _profile_pass(tree, sigma, leaf_values=None):
    N = tree.node_count
    reach0 = np.zeros((N, tree.n0))
    reach1 = np.zeros((N, tree.n1))
    regrets = np.zeros(tree.table_size)
    _down(tree.kind, tree.player, tree.nact, tree.child_off, tree.children,
          tree.off_e, tree.legal, regrets, sigma, reach0, reach1,
          tree.root.beliefs[0], tree.root.beliefs[1], False)
    if leaf_values is None:
        L = tree.leaf_count
        if L:
            raise LeafEvalFailedError("fixed-profile evaluation on a depth-limited tree needs leaf values")
        V0 = np.zeros((0, tree.n0))
        V1 = np.zeros((0, tree.n1))
    else:
        V0, V1 = leaf_values
    return reach0, reach1, V0, V1


def expected_values(tree: SubgameTree, profile: StrategyProfile, leaf_values=None):
    """(u0, u1) of the profile under the root joint distribution, chips."""
    sigma = _fill_sigma_from_profile(tree, profile)
    reach0, reach1, V0, V1 = _profile_pass(tree, sigma, leaf_values)
    N = tree.node_count
    cfv0 = np.zeros((N, tree.n0))
    cfv1 = np.zeros((N, tree.n1))
    _up(tree.kind, tree.player, tree.nact, tree.child_off, tree.children,
        tree.off_e, tree.legal, tree.term_slot, tree.WU, tree.leaf_slot,
        tree.LW, V0, V1, sigma, reach0, reach1, cfv0, cfv1,
        np.zeros(0), np.zeros(0), False, False, False, False)
    z = tree.joint_normalizer()
    b0, b1 = tree.root.beliefs
    u0 = float(b0 @ cfv0[0]) / z
    u1 = float(b1 @ cfv1[0]) / z
    return u0, u1


def best_response_value(tree: SubgameTree, profile: StrategyProfile,
                        responder: int, leaf_values=None) -> float:
    """Exact best-response value for `responder` against the fixed profile."""
    sigma = _fill_sigma_from_profile(tree, profile, players=(1 - responder,))
    reach0, reach1, V0, V1 = _profile_pass(tree, sigma, leaf_values)
    N = tree.node_count
    br0 = np.zeros((N, tree.n0))
    br1 = np.zeros((N, tree.n1))
    _br_up(tree.kind, tree.player, tree.nact, tree.child_off, tree.children,
           tree.off_e, tree.legal, tree.term_slot, tree.WU, tree.leaf_slot,
           tree.LW, V0, V1, reach0, reach1, br0, br1)
    z = tree.joint_normalizer()
    b = tree.root.beliefs[responder]
    br = br0[0] if responder == 0 else br1[0]
    return float(b @ br) / z


def exploitability(tree: SubgameTree, profile: StrategyProfile, leaf_values=None):
    """Per-player exploitability (chips); both approach 0 at equilibrium."""
    u0, u1 = expected_values(tree, profile, leaf_values)
    br1 = best_response_value(tree, profile, 1, leaf_values)
    br0 = best_response_value(tree, profile, 0, leaf_values)
    return u0 + br1, u1 + br0


def warm_kernels():
    """Force JIT compilation with a tiny workload; returns compile seconds."""
    from .belief import initial_pbs
    from .games.base import sorted_actions
    from .games.toy import ToyPoker
    from .tree import build_subgame

    start = time.perf_counter()
    game = ToyPoker()
    pbs = initial_pbs(game)
    root_actions = sorted_actions(
        game.legal_actions(game.state_from_public(pbs.public, 0, 1)))
    tree = build_subgame(game, pbs, root_actions, depth_rounds=None)
    prof = solve(tree, DcfrParams(iterations=2)).profile
    exploitability(tree, prof)
    return time.perf_counter() - start
