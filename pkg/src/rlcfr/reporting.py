"""Report rendering: delimited tables plus matplotlib figures next to them.

Each report writes a TSV and a PNG with the same stem into `out_dir` and
returns the list of paths it created. Figures use the Agg backend so the
report path works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first
import numpy as np  # noqa: E402

from .cfr import DcfrParams, Solver, exploitability  # noqa: E402
from .errors import ConfigError  # noqa: E402
from .match import MatchResult  # noqa: E402
from .rebel import full_legal_abstraction  # noqa: E402
from .belief import initial_pbs  # noqa: E402
from .training import METRICS_COLUMNS  # noqa: E402
from .tree import build_subgame  # noqa: E402


def load_metrics(path) -> np.ndarray:
    """metrics.tsv rows as a float array, one row per epoch."""
    p = Path(path)
    if not p.exists():
        raise ConfigError("metrics file not found: %s" % p)
    rows = []
    for line in p.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(x) for x in line.split("\t")])
    if not rows:
        raise ConfigError("metrics file has no data rows: %s" % p)
    width = len(METRICS_COLUMNS)
    for r in rows:
        if len(r) != width:
            raise ConfigError("metrics row has %d columns, expected %d"
                              % (len(r), width))
    return np.array(rows)


def training_report(metrics_path, out_dir) -> list:
    """Loss and reward curves from a training run's metrics.tsv."""
    data = load_metrics(metrics_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    epoch = data[:, 0]
    mean_reward = data[:, 2]
    critic_mse = data[:, 3]
    actor_loss = data[:, 4]

    tsv = out / "training_curves.tsv"
    with open(tsv, "w") as fh:
        fh.write("# " + "\t".join(METRICS_COLUMNS) + "\n")
        for row in data:
            fh.write("%d\t%d\t%.10g\t%.10g\t%.10g\t%.1f\n" % tuple(row))

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    axes[0].plot(epoch, mean_reward, lw=0.9)
    axes[0].set_xlabel("epoch")
    axes[0].set_ylabel("mean reward (antes)")
    axes[0].set_title("abstraction reward")
    axes[1].semilogy(epoch, np.maximum(critic_mse, 1e-12), lw=0.9)
    axes[1].set_xlabel("epoch")
    axes[1].set_ylabel("loss")
    axes[1].set_title("critic / value loss")
    axes[2].plot(epoch, actor_loss, lw=0.9)
    axes[2].set_xlabel("epoch")
    axes[2].set_ylabel("actor loss")
    axes[2].set_title("actor objective")
    fig.tight_layout()
    png = out / "training_curves.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return [tsv, png]


def convergence_report(game, out_dir, iteration_grid=(10, 20, 40, 80, 160, 250),
                       params: DcfrParams | None = None) -> list:
    """Full-game exploitability of the running average vs iteration count."""
    base = params or DcfrParams()
    pbs = initial_pbs(game)
    aa = full_legal_abstraction(game, pbs)
    tree = build_subgame(game, pbs, aa, nonroot_policy=None, depth_rounds=None)
    rows = []
    for t in iteration_grid:
        solver = Solver(tree, DcfrParams(alpha=base.alpha, beta=base.beta,
                                         gamma=base.gamma, iterations=int(t),
                                         updates=base.updates))
        solver.run()
        prof = solver.average_profile()
        e0, e1 = exploitability(tree, prof)
        rows.append((int(t), (e0 + e1) / game.ante))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tsv = out / "convergence.tsv"
    with open(tsv, "w") as fh:
        fh.write("# iterations\texploitability_antes\n")
        for t, e in rows:
            fh.write("%d\t%.10g\n" % (t, e))

    arr = np.array(rows)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(arr[:, 0], np.maximum(arr[:, 1], 1e-16), marker="o")
    ax.set_xlabel("iterations")
    ax.set_ylabel("exploitability (antes)")
    ax.set_title("discounted regret matching, full game")
    fig.tight_layout()
    png = out / "convergence.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return [tsv, png]


def match_report(result: MatchResult, out_dir, ante: float = 1.0) -> list:
    """Hand ledger plus running mean winnings with a 2-sigma band."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tsv = out / "match_ledger.tsv"
    with open(tsv, "w") as fh:
        fh.write("# hand records, net_a in chips\n")
        for line in result.ledger:
            fh.write(line + "\n")

    paths = [tsv]
    if result.n_hands > 0:
        ma = result.net_chips / ante * 1000.0
        n = np.arange(1, len(ma) + 1)
        running = np.cumsum(ma) / n
        sd = np.array([ma[: i + 1].std(ddof=1) if i > 0 else 0.0
                       for i in range(len(ma))])
        band = 2.0 * sd / np.sqrt(n)
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        ax.plot(n, running, lw=1.0, label="running mean")
        ax.fill_between(n, running - band, running + band, alpha=0.25,
                        label="2 s.e.")
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_xlabel("hands")
        ax.set_ylabel("mA per hand")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        png = out / "match_running.png"
        fig.savefig(png, dpi=120)
        plt.close(fig)
        paths.append(png)
    return paths
