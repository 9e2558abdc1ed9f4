"""Self-play data generation and the staged training loop.

sample_epoch walks one hand of self-play. Chance nodes resolve by a
belief-weighted draw. Each decision pbs contributes one transition
sample: the base abstraction and the decoded actor abstraction are both
solved at that root, and the reward is their acting-player root-value
gap in antes. An eta-coin then decides which solved line drives play
and an epsilon-coin picks a uniform action over that line's abstraction
versus a draw from its solved average strategy.

The value net is trained on round-limit pbs reached by depth-limited
dives: the dive's leaf pbs (pot-perturbed) is re-solved to the end of
the game, which labels it exactly, while the dive itself prices leaves
with the net being trained. Training and sampling therefore bootstrap
each other without an outer exact solver.

Stages: 1 trains the value net, 2 runs the actor-critic loop (non-root
abstractions per cfg.stage), 3 optionally regenerates value-net data
under the learned abstractions. Single-worker runs are deterministic
and resumable; multi-worker sampling is supported but not
reproducible across worker counts.
"""

from __future__ import annotations

import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import logs, mdp
from .belief import (
    PbsSample,
    PublicBeliefState,
    acting_player,
    chance_outcome_probs,
    initial_pbs,
    pbs_chance_transition,
    pbs_transition,
    perturb_pbs,
    representative_state,
)
from .cfr import DcfrParams, StrategyProfile, TerminalOnlyEvaluator
from .errors import EngineError, NonFiniteGradError
from .games import make_game
from .nets import (
    AdamState,
    Net,
    NetworkSpec,
    adam_init,
    adam_step,
    huber_loss,
    load_checkpoint,
    save_checkpoint,
)
from .rebel import NetLeafEvaluator, full_legal_abstraction, rebel_solve
from .tree import leaf_pbs

RL_BUFFER_CAPACITY = 200_000
PBS_BUFFER_CAPACITY = 500_000
STAGES = ("BASE_NONROOT", "LEARNED_NONROOT")
METRICS_COLUMNS = ("epoch", "n_samples", "mean_reward", "critic_mse",
                   "actor_loss", "wall_ms")


@dataclass(frozen=True)
class ExploreParams:
    noise_sigma: float = 0.15
    eta: float = 0.33
    epsilon: float = 0.25

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        for name in ("eta", "epsilon"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError("%s must lie in [0, 1]" % name)


class ReplayBuffer:
    """Bounded ring with uniform sampling; safe for append + snapshot."""

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._data = []
        self._pos = 0
        self._lock = threading.Lock()

    def append(self, item):
        with self._lock:
            if len(self._data) < self.capacity:
                self._data.append(item)
            else:
                self._data[self._pos] = item
                self._pos = (self._pos + 1) % self.capacity

    def extend(self, items):
        for it in items:
            self.append(it)

    def __len__(self):
        with self._lock:
            return len(self._data)

    def sample(self, rng, k: int) -> list:
        with self._lock:
            n = len(self._data)
            if n == 0:
                raise ValueError("cannot sample from an empty buffer")
            idx = rng.integers(0, n, size=k)
            return [self._data[int(i)] for i in idx]

    def snapshot(self) -> list:
        with self._lock:
            return list(self._data)

    def state(self):
        with self._lock:
            return list(self._data), self._pos

    def restore(self, data, pos):
        with self._lock:
            self._data = list(data)[: self.capacity]
            self._pos = pos % self.capacity if self._data else 0


@dataclass
class TrainConfig:
    game: str = "nl-leduc"
    stack: int = 5
    epochs: int = 20_000
    stage1_epochs: int = 400
    stage3_epochs: int = 0
    rl_batch: int = 1024
    pbs_batch: int = 512
    lr: float = 1e-5
    value_lr: float = 1e-3
    seed: int = 0
    stage: str = "BASE_NONROOT"
    iterations: int = 120
    depth_rounds: int = 1
    value_mode: str = "net"  # "net" or "exact" stage-2 leaf values
    noise_sigma: float = 0.15
    eta: float = 0.33
    epsilon: float = 0.25
    actor_hidden: tuple = (64, 64)
    critic_hidden: tuple = (64, 64)
    value_hidden: tuple = (64, 64)
    value_steps: int = 4
    rl_steps: int = 1
    dives_per_epoch: int = 4
    checkpoint_every: int = 1000
    workers: int = 1
    out_dir: str = "runs/train"

    def __post_init__(self):
        for name in ("epochs", "rl_batch", "pbs_batch", "iterations",
                     "value_steps", "rl_steps", "dives_per_epoch",
                     "checkpoint_every", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError("%s must be positive" % name)
        for name in ("stage1_epochs", "stage3_epochs"):
            if getattr(self, name) < 0:
                raise ValueError("%s must be >= 0" % name)
        if self.stage not in STAGES:
            raise ValueError("stage must be one of %s" % (STAGES,))
        if self.value_mode not in ("net", "exact"):
            raise ValueError("value_mode must be 'net' or 'exact'")

    def explore(self) -> ExploreParams:
        return ExploreParams(noise_sigma=self.noise_sigma, eta=self.eta,
                             epsilon=self.epsilon)

    def solver_params(self) -> DcfrParams:
        return DcfrParams(iterations=self.iterations)


# --- value-net featurization ---------------------------------------------

def pbs_value_features(game, pbs: PublicBeliefState) -> np.ndarray:
    """Public features for value inputs: board, pot, stacks, round, actor."""
    public = pbs.public
    board = np.zeros(game.num_cards)
    for c in public.board_cards:
        board[c] = 1.0
    ante = float(game.ante)
    scalars = np.array([
        public.pot / ante,
        public.stacks[0] / ante,
        public.stacks[1] / ante,
        float(public.round),
        float(acting_player(game, pbs)),
    ])
    return np.concatenate([board, scalars])


def value_feature_length(game) -> int:
    return game.num_cards + 5


def value_net_spec(game, hidden=(64, 64)) -> NetworkSpec:
    d0 = len(game.deal_cards(0))
    d1 = len(game.deal_cards(1))
    sizes = (value_feature_length(game) + d0 + d1,) + tuple(hidden) + (d0 + d1,)
    return NetworkSpec(layer_sizes=sizes, output_act="identity")


def actor_spec(game, hidden=(64, 64)) -> NetworkSpec:
    sizes = (mdp.feature_length(game),) + tuple(hidden) + (2 * mdp.ACTION_PAIRS,)
    return NetworkSpec(layer_sizes=sizes, output_act="tanh")


def critic_spec(game, hidden=(64, 64)) -> NetworkSpec:
    sizes = (mdp.feature_length(game) + 2 * mdp.ACTION_PAIRS,) + tuple(hidden) + (1,)
    return NetworkSpec(layer_sizes=sizes, output_act="identity")


def featurize_pbs_sample(game, sample: PbsSample):
    """Deck-padded (features, beliefs, targets, mask) training row."""
    feat = pbs_value_features(game, sample.pbs)
    ante = float(game.ante)
    rows = []
    for p in (0, 1):
        deck = list(game.deal_cards(p))
        b = np.zeros(len(deck))
        y = np.zeros(len(deck))
        m = np.zeros(len(deck))
        for c, bv, yv in zip(sample.pbs.cards[p], sample.pbs.beliefs[p],
                             sample.values[p]):
            k = deck.index(c)
            b[k] = bv
            y[k] = yv / ante
            m[k] = 1.0
        rows.append((b, y, m))
    (b0, y0, m0), (b1, y1, m1) = rows
    return feat, b0, b1, y0, y1, m0, m1


def make_value_evaluator(game, net: Net, adjust: bool = True) -> NetLeafEvaluator:
    return NetLeafEvaluator(game, net, pbs_value_features, adjust=adjust)


# --- gradient steps -------------------------------------------------------

def train_value_net(buffer: ReplayBuffer, net: Net, opt: AdamState, rng,
                    batch_size: int, steps: int = 1) -> list:
    """Masked-Huber regression steps on deck-padded value rows."""
    losses = []
    for step in range(steps):
        batch = buffer.sample(rng, batch_size)
        x = np.stack([np.concatenate([f, b0, b1]) for f, b0, b1, _, _, _, _ in batch])
        y = np.stack([np.concatenate([y0, y1]) for _, _, _, y0, y1, _, _ in batch])
        m = np.stack([np.concatenate([m0, m1]) for _, _, _, _, _, m0, m1 in batch])
        live = m.sum()
        if live == 0:
            raise ValueError("batch has no live entries")
        pred, cache = net.forward_cache(x)
        loss_e, grad_e = huber_loss(pred, y)
        loss = float((loss_e * m).sum() / live)
        grads, _ = net.backward(cache, grad_e * m / live)
        try:
            adam_step(net.params, grads, opt)
        except NonFiniteGradError as e:
            raise NonFiniteGradError("value step %d: %s" % (step, e))
        losses.append(loss)
    return losses


def train_actor_critic(buffer: ReplayBuffer, actor: Net, critic: Net,
                       actor_opt: AdamState, critic_opt: AdamState, rng,
                       batch_size: int, steps: int = 1):
    """One or more paired critic/actor updates; returns final losses.

    The critic regresses recorded rewards (squared error); the actor
    ascends the frozen critic's estimate at its own output, gradients
    reaching it through the critic's input.
    """
    critic_mse = actor_loss = float("nan")
    for step in range(steps):
        batch = buffer.sample(rng, batch_size)
        s = np.stack([t.s for t in batch])
        a = np.stack([t.a for t in batch])
        r = np.array([t.r for t in batch])[:, None]

        pred, cache = critic.forward_cache(np.concatenate([s, a], axis=1))
        diff = pred - r
        critic_mse = float(np.mean(diff ** 2))
        grads, _ = critic.backward(cache, 2.0 * diff / diff.size)
        try:
            adam_step(critic.params, grads, critic_opt)
        except NonFiniteGradError as e:
            raise NonFiniteGradError("critic step %d: %s" % (step, e))

        a_out, a_cache = actor.forward_cache(s)
        pred, c_cache = critic.forward_cache(np.concatenate([s, a_out], axis=1))
        actor_loss = float(-np.mean(pred))
        _, gx = critic.backward(c_cache, np.full_like(pred, -1.0 / pred.size))
        a_grads, _ = actor.backward(a_cache, gx[:, s.shape[1]:])
        try:
            adam_step(actor.params, a_grads, actor_opt)
        except NonFiniteGradError as e:
            raise NonFiniteGradError("actor step %d: %s" % (step, e))
    return critic_mse, actor_loss


# --- inference-time gate ---------------------------------------------------

def critic_estimate(critic: Net, s, a) -> float:
    return float(critic.forward(np.concatenate([s, a]))[0])


def gated_abstraction(game, pbs, actor: Net, critic: Net, gate: bool = True):
    """(abstraction, action or None, critic estimate) at a decision pbs.

    With the gate on, a negative critic estimate falls back to the base
    abstraction (action None).
    """
    s = mdp.encode_state(game, pbs)
    a = np.asarray(actor.forward(s))
    rhat = critic_estimate(critic, s, a)
    if gate and rhat < 0.0:
        return mdp.base_abstraction(game, pbs), None, rhat
    return mdp.decode_abstraction(game, pbs, a), a, rhat


# --- self-play walks -------------------------------------------------------

def _uniform_profile(game, pbs) -> StrategyProfile:
    """Uniform-over-legal rows for the acting player's live cards."""
    p = acting_player(game, pbs)
    prof = StrategyProfile()
    for i, key in enumerate(pbs.infostate_keys(p)):
        card = pbs.cards[p][i]
        opp = next(
            c for c in pbs.cards[1 - p]
            if game.joint_deal_weight(*( (card, c) if p == 0 else (c, card) )) > 0
        )
        c0, c1 = (card, opp) if p == 0 else (opp, card)
        state = game.state_from_public(pbs.public, c0, c1)
        legal = game.legal_actions(state)
        prof.set(key.text(), legal, np.full(len(legal), 1.0 / len(legal)))
    return prof


def _draw_chance(game, pbs, rng):
    outs = chance_outcome_probs(game, pbs)
    ps = np.array([q for _, q in outs])
    k = int(rng.choice(len(outs), p=ps / ps.sum()))
    return pbs_chance_transition(game, pbs, outs[k][0])


def _root_action_distribution(game, pbs, profile: StrategyProfile, actions):
    """Belief-weighted marginal of the acting player's root strategy."""
    p = acting_player(game, pbs)
    tokens = [a.token() for a in actions]
    agg = np.zeros(len(actions))
    for i, key in enumerate(pbs.infostate_keys(p)):
        b = pbs.beliefs[p][i]
        if b <= 0.0:
            continue
        row = profile.get(key.text())
        if row is None:
            continue
        acts, probs = row
        for act, q in zip(acts, probs):
            agg[tokens.index(act.token())] += b * q
    total = agg.sum()
    if total <= 0.0:
        return np.full(len(actions), 1.0 / len(actions))
    return agg / total


def sample_decision_states(game, rng, n: int, round_filter=None,
                           max_walks: int = 100_000) -> list:
    """Decision pbs reached by uniform-random legal play from the deal."""
    out = []
    walks = 0
    while len(out) < n and walks < max_walks:
        walks += 1
        pbs = initial_pbs(game)
        guard = 0
        while guard < 64:
            guard += 1
            rep = representative_state(game, pbs)
            if rep.is_terminal():
                break
            if rep.is_chance():
                pbs = _draw_chance(game, pbs, rng)
                continue
            if round_filter is None or rep.round == round_filter:
                out.append(pbs)
                if len(out) >= n:
                    break
            prof = _uniform_profile(game, pbs)
            actions = full_legal_abstraction(game, pbs)
            probs = _root_action_distribution(game, pbs, prof, actions)
            k = int(rng.choice(len(actions), p=probs))
            pbs = pbs_transition(game, pbs, prof, actions[k], strict=False)
    return out


def sample_epoch(game, actor: Net, value_fn, explore: ExploreParams,
                 params: DcfrParams, rng, nonroot_policy=None,
                 depth_rounds: int | None = 1, tree_cache=None,
                 max_steps: int = 64) -> list:
    """One hand of self-play; one TransitionSample per decision pbs."""
    samples = []
    pbs = initial_pbs(game)
    for _ in range(max_steps):
        rep = representative_state(game, pbs)
        if rep.is_terminal():
            return samples
        if rep.is_chance():
            pbs = _draw_chance(game, pbs, rng)
            continue

        aa_base = mdp.base_abstraction(game, pbs)
        s = mdp.encode_state(game, pbs)
        noise = rng.normal(0.0, explore.noise_sigma, size=2 * mdp.ACTION_PAIRS)
        a = np.clip(np.asarray(actor.forward(s)) + noise, -1.0, 1.0)
        aa_mdp = mdp.decode_abstraction(game, pbs, a)
        r, res_mdp, res_base = mdp.abstraction_reward(
            game, pbs, aa_mdp, aa_base, value_fn, params,
            nonroot_policy=nonroot_policy, depth_rounds=depth_rounds,
            tree_cache=tree_cache)
        samples.append(mdp.TransitionSample(s=s, a=a, r=r))

        if rng.random() < explore.eta:
            res, aa = res_base, aa_base
        else:
            res, aa = res_mdp, aa_mdp
        if rng.random() < explore.epsilon:
            k = int(rng.integers(0, len(aa)))
        else:
            probs = _root_action_distribution(game, pbs, res.profile, aa)
            k = int(rng.choice(len(aa), p=probs))
        pbs = pbs_transition(game, pbs, res.profile, aa[k], strict=False)
    return samples


def value_dive(game, value_net: Net, explore: ExploreParams,
               params: DcfrParams, rng, nonroot_policy=None,
               root_abstraction_fn=None, depth_rounds: int = 1,
               tree_cache=None, max_depth: int = 8) -> list:
    """Depth-limited dive from the deal; exact-labeled pbs per segment.

    Each segment solves with the current net at the leaves and hands off
    to the sampled (perturbed) leaf pbs. Only the final segment, whose
    subgame reaches the end of the game and therefore has no leaves, is
    kept as a training row: its running-average values are exact.
    """
    evaluator = make_value_evaluator(game, value_net)
    out = []
    pbs = initial_pbs(game)
    if root_abstraction_fn is None:
        root_abstraction_fn = mdp.base_abstraction
    for _ in range(max_depth):
        rep = representative_state(game, pbs)
        if rep.is_terminal():
            break
        if rep.is_chance():
            pbs = _draw_chance(game, pbs, rng)
            continue
        res = rebel_solve(game, pbs, root_abstraction_fn(game, pbs), evaluator,
                          params, explore=explore, rng=rng,
                          nonroot_policy=nonroot_policy,
                          depth_rounds=depth_rounds, tree_cache=tree_cache)
        tree = res.solver.tree
        if tree.leaf_count == 0:
            out.append(res.pbs_sample)
        nxt = res.next_pbs
        if nxt is None and tree.leaf_count > 0:
            # the sampled trajectory folded out; keep the dive alive with a
            # uniform leaf so every dive labels at least one deep pbs
            slot = int(rng.integers(0, tree.leaf_count))
            B0, B1 = res.solver.leaf_beliefs()
            nxt = perturb_pbs(game, leaf_pbs(tree, slot, B0[slot], B1[slot]), rng)
        if nxt is None:
            break
        pbs = nxt
    return out


# --- orchestration ---------------------------------------------------------

@dataclass
class TrainResult:
    out_dir: Path
    metrics_path: Path
    value_net: Net
    actor: Net
    critic: Net
    global_epoch: int
    checkpoints: list = field(default_factory=list)


class _Run:
    """Mutable training state: nets, optimizers, buffers, rng, epoch."""

    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.game = make_game(cfg.game, stack=cfg.stack)
        self.rng = np.random.default_rng(cfg.seed)
        self.value_net = Net(value_net_spec(self.game, cfg.value_hidden),
                             rng=self.rng)
        self.actor = Net(actor_spec(self.game, cfg.actor_hidden), rng=self.rng)
        self.critic = Net(critic_spec(self.game, cfg.critic_hidden), rng=self.rng)
        self.value_opt = adam_init(self.value_net.params, lr=cfg.value_lr)
        self.actor_opt = adam_init(self.actor.params, lr=cfg.lr)
        self.critic_opt = adam_init(self.critic.params, lr=cfg.lr)
        self.pbs_buffer = ReplayBuffer(PBS_BUFFER_CAPACITY)
        self.rl_buffer = ReplayBuffer(RL_BUFFER_CAPACITY)
        self.global_epoch = 0
        self.stage_done = {"1": 0, "2": 0, "3": 0}
        self.checkpoints = []

    # persistence ----------------------------------------------------

    def save(self, out: Path):
        for role, net, opt in (("value", self.value_net, self.value_opt),
                               ("actor", self.actor, self.actor_opt),
                               ("critic", self.critic, self.critic_opt)):
            save_checkpoint(out / ("%s.ckpt" % role), role, net.spec,
                            net.params, opt_state=opt)
        rows, pos = self.pbs_buffer.state()
        num_cards = self.game.num_cards
        n = len(rows)
        feat_len = value_feature_length(self.game)
        feats = np.zeros((n, feat_len))
        bel = np.zeros((n, 2, num_cards))
        val = np.zeros((n, 2, num_cards))
        msk = np.zeros((n, 2, num_cards), dtype=np.uint8)
        for i, (f, b0, b1, y0, y1, m0, m1) in enumerate(rows):
            feats[i] = f
            bel[i, 0, : b0.size], bel[i, 1, : b1.size] = b0, b1
            val[i, 0, : y0.size], val[i, 1, : y1.size] = y0, y1
            msk[i, 0, : m0.size], msk[i, 1, : m1.size] = m0, m1
        logs.save_pbs_log(out / "pbs_buffer.bin", feats, bel, val, msk)
        rows, rl_pos = self.rl_buffer.state()
        if rows:
            s = np.stack([t.s for t in rows])
            a = np.stack([t.a for t in rows])
            r = np.array([t.r for t in rows])
        else:
            s = np.zeros((0, mdp.feature_length(self.game)))
            a = np.zeros((0, 2 * mdp.ACTION_PAIRS))
            r = np.zeros(0)
        logs.save_rl_log(out / "rl_buffer.bin", s, a, r)
        state = {
            "schema": 1,
            "global_epoch": self.global_epoch,
            "stage_done": self.stage_done,
            "pbs_pos": pos,
            "rl_pos": rl_pos,
            "rng_state": self.rng.bit_generator.state,
        }
        (out / "train_state.json").write_text(json.dumps(state))

    def load(self, out: Path):
        for role, net, opt_attr in (("value", self.value_net, "value_opt"),
                                    ("actor", self.actor, "actor_opt"),
                                    ("critic", self.critic, "critic_opt")):
            _, _, params, opt, _ = load_checkpoint(
                out / ("%s.ckpt" % role), expected_spec=net.spec,
                expected_role=role)
            net.params = params
            lr = getattr(self, opt_attr).lr
            if opt is None:
                opt = adam_init(params, lr=lr)
            setattr(self, opt_attr, opt)
        state = json.loads((out / "train_state.json").read_text())
        feats, bel, val, msk = logs.load_pbs_log(out / "pbs_buffer.bin")
        d0 = len(self.game.deal_cards(0))
        d1 = len(self.game.deal_cards(1))
        rows = [
            (feats[i], bel[i, 0, :d0], bel[i, 1, :d1], val[i, 0, :d0],
             val[i, 1, :d1], msk[i, 0, :d0].astype(float),
             msk[i, 1, :d1].astype(float))
            for i in range(feats.shape[0])
        ]
        self.pbs_buffer.restore(rows, state["pbs_pos"])
        s, a, r = logs.load_rl_log(out / "rl_buffer.bin")
        self.rl_buffer.restore(
            [mdp.TransitionSample(s=s[i], a=a[i], r=float(r[i]))
             for i in range(s.shape[0])], state["rl_pos"])
        self.global_epoch = state["global_epoch"]
        self.stage_done = state["stage_done"]
        self.rng.bit_generator.state = state["rng_state"]


def _metrics_line(fh, epoch, n_samples, mean_reward, critic_mse, actor_loss,
                  wall_ms):
    fh.write("%d\t%d\t%.10g\t%.10g\t%.10g\t%.1f\n"
             % (epoch, n_samples, mean_reward, critic_mse, actor_loss, wall_ms))
    fh.flush()


def run_training(cfg: TrainConfig, resume: bool = False,
                 on_epoch=None) -> TrainResult:
    """Execute the staged curriculum; artifacts land in cfg.out_dir.

    Writes metrics.tsv (per-epoch line: epoch, n_samples, mean_reward,
    critic_mse, actor_loss, wall_ms; stage-1/3 lines report the value
    loss in the critic_mse column), role_stage_epoch checkpoints, and a
    resumable snapshot after every epoch.
    """
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = _Run(cfg)
    metrics_path = out / "metrics.tsv"
    if resume:
        run.load(out)
        fh = open(metrics_path, "a")
    else:
        fh = open(metrics_path, "w")
        fh.write("# " + "\t".join(METRICS_COLUMNS) + "\n")

    explore = cfg.explore()
    params = cfg.solver_params()
    stages = [("1", cfg.stage1_epochs), ("2", cfg.epochs),
              ("3", cfg.stage3_epochs)]

    def checkpoint_roles(stage, epoch, roles):
        for role, net, opt in roles:
            path = out / ("%s_%s_%d.ckpt" % (role, stage, epoch))
            save_checkpoint(path, role, net.spec, net.params, opt_state=opt)
            run.checkpoints.append(path)

    try:
        for stage_name, stage_epochs in stages:
            epoch = run.stage_done[stage_name]
            while epoch < stage_epochs:
                t0 = time.perf_counter()
                if stage_name in ("1", "3"):
                    n_new, vloss = _value_epoch(run, cfg, explore, params,
                                                stage_name)
                    mean_r, cmse, aloss = 0.0, vloss, 0.0
                else:
                    n_new, mean_r, cmse, aloss = _rl_epoch(run, cfg, explore,
                                                           params)
                epoch += 1
                run.stage_done[stage_name] = epoch
                run.global_epoch += 1
                wall = (time.perf_counter() - t0) * 1000.0
                _metrics_line(fh, run.global_epoch, n_new, mean_r, cmse,
                              aloss, wall)
                if epoch % cfg.checkpoint_every == 0 or epoch == stage_epochs:
                    roles = ([("value", run.value_net, run.value_opt)]
                             if stage_name in ("1", "3") else
                             [("actor", run.actor, run.actor_opt),
                              ("critic", run.critic, run.critic_opt)])
                    checkpoint_roles(stage_name, epoch, roles)
                    run.save(out)
                if on_epoch is not None:
                    on_epoch(run)
    finally:
        fh.close()
    run.save(out)
    return TrainResult(out_dir=out, metrics_path=metrics_path,
                       value_net=run.value_net, actor=run.actor,
                       critic=run.critic, global_epoch=run.global_epoch,
                       checkpoints=run.checkpoints)


def _stage_caches(run):
    # tree caches persist across epochs; keyed per run object
    if not hasattr(run, "_caches"):
        run._caches = {}
    return run._caches


def _value_epoch(run, cfg, explore, params, stage_name):
    """One dive plus value-net steps; returns (new samples, loss)."""
    caches = _stage_caches(run)
    if stage_name == "3":
        # fresh trees every epoch: the learned root/interior abstractions
        # move with the actor
        cache = {}
        nonroot = mdp.learned_nonroot_policy(run.actor)

        def root_fn(game, pbs):
            aa, _, _ = gated_abstraction(game, pbs, run.actor, run.critic)
            return aa
    else:
        cache = caches.setdefault("stage1", {})
        nonroot = mdp.nonroot_base_policy
        root_fn = None
    new = []
    for _ in range(cfg.dives_per_epoch):
        try:
            new += value_dive(run.game, run.value_net, explore, params,
                              run.rng, nonroot_policy=nonroot,
                              root_abstraction_fn=root_fn,
                              depth_rounds=cfg.depth_rounds, tree_cache=cache)
        except EngineError:
            pass
    for sample in new:
        run.pbs_buffer.append(featurize_pbs_sample(run.game, sample))
    loss = 0.0
    if len(run.pbs_buffer) >= cfg.pbs_batch:
        losses = train_value_net(run.pbs_buffer, run.value_net, run.value_opt,
                                 run.rng, cfg.pbs_batch, steps=cfg.value_steps)
        loss = float(np.mean(losses))
    return len(new), loss


def _rl_epoch(run, cfg, explore, params):
    """Stage-2 epoch: sample_epoch walks plus actor-critic steps."""
    caches = _stage_caches(run)
    if cfg.stage == "LEARNED_NONROOT":
        cache = {}
        nonroot = mdp.learned_nonroot_policy(run.actor.copy())
    else:
        cache = caches.setdefault("stage2", {})
        nonroot = mdp.nonroot_base_policy
    if cfg.value_mode == "net":
        value_fn = make_value_evaluator(run.game, run.value_net.copy())
        depth = cfg.depth_rounds
    else:
        value_fn = TerminalOnlyEvaluator()
        depth = None

    def one_epoch(rng):
        return sample_epoch(run.game, run.actor, value_fn, explore, params,
                            rng, nonroot_policy=nonroot, depth_rounds=depth,
                            tree_cache=cache)

    samples = []
    if cfg.workers == 1:
        try:
            samples = one_epoch(run.rng)
        except EngineError:
            samples = []
    else:
        rngs = run.rng.spawn(cfg.workers)
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for got in pool.map(one_epoch, rngs):
                samples.extend(got)
    run.rl_buffer.extend(samples)
    mean_r = float(np.mean([t.r for t in samples])) if samples else 0.0
    cmse = aloss = 0.0
    if len(run.rl_buffer) >= cfg.rl_batch:
        cmse, aloss = train_actor_critic(run.rl_buffer, run.actor, run.critic,
                                         run.actor_opt, run.critic_opt,
                                         run.rng, cfg.rl_batch,
                                         steps=cfg.rl_steps)
    return len(samples), mean_r, cmse, aloss


def evaluate_actor(game, actor: Net, critic: Net, states, value_fn,
                   params: DcfrParams, gate: bool = True, nonroot_policy=None,
                   depth_rounds: int | None = 1, tree_cache=None):
    """Mean decoded-abstraction reward over decision states.

    With the gate on, states where the critic predicts a negative edge
    fall back to the base abstraction and contribute exactly 0.
    """
    rewards = []
    for pbs in states:
        aa, a, _ = gated_abstraction(game, pbs, actor, critic, gate=gate)
        if a is None:
            rewards.append(0.0)
            continue
        r, _, _ = mdp.abstraction_reward(
            game, pbs, aa, mdp.base_abstraction(game, pbs), value_fn, params,
            nonroot_policy=nonroot_policy, depth_rounds=depth_rounds,
            tree_cache=tree_cache)
        rewards.append(r)
    rewards = np.array(rewards)
    se = float(rewards.std(ddof=1) / np.sqrt(len(rewards))) if len(rewards) > 1 else float("nan")
    return float(rewards.mean()), se, rewards
