"""Command-line front end.

Subcommands: solve, train, eval, exploit, bench, report. Exit codes:
0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .belief import initial_pbs
from .cfr import DcfrParams, Solver, expected_values, exploitability
from .config import Config, load_config
from .errors import EngineError
from .games import make_game
from .rebel import full_legal_abstraction
from .tree import build_subgame

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; our contract reserves 2 for
    # runtime failures, so usage errors leave with 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        sys.exit(EXIT_USAGE)


def _game_from(args, cfg: Config | None):
    kw = cfg.game_args() if cfg else {}
    if getattr(args, "game", None):
        kw["name"] = args.game
        if args.game != "nl-leduc":
            kw.pop("stack", None)
    if getattr(args, "stack", None) is not None:
        kw["stack"] = args.stack
    return make_game(**kw)


def _load_cfg(args) -> Config | None:
    path = getattr(args, "config", None)
    if not path:
        return None
    return load_config(path)


def cmd_solve(args):
    cfg = _load_cfg(args)
    game = _game_from(args, cfg)
    params = cfg.solver_params() if cfg else DcfrParams()
    if args.iters:
        params = DcfrParams(alpha=params.alpha, beta=params.beta,
                            gamma=params.gamma, iterations=args.iters,
                            updates=params.updates)
    pbs = initial_pbs(game)
    aa = full_legal_abstraction(game, pbs)
    tree = build_subgame(game, pbs, aa, nonroot_policy=None, depth_rounds=None)
    t0 = time.perf_counter()
    solver = Solver(tree, params)
    solver.run()
    wall = time.perf_counter() - t0
    prof = solver.average_profile()
    u0, u1 = expected_values(tree, prof)
    e0, e1 = exploitability(tree, prof)
    print("game=%s iterations=%d wall=%.2fs" % (game.game_id, params.iterations, wall))
    print("root value p1=%.6f p2=%.6f (chips)" % (u0, u1))
    print("exploitability p1=%.3g p2=%.3g total=%.3g (antes)"
          % (e0 / game.ante, e1 / game.ante, (e0 + e1) / game.ante))
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            fh.write("# infostate\tactions\tprobs\n")
            for key in sorted(prof.rows):
                acts, probs = prof.rows[key]
                fh.write("%s\t%s\t%s\n" % (
                    key, "/".join(a.token() for a in acts),
                    "/".join("%.10g" % p for p in probs)))
        print("strategy written to %s" % out)
    return EXIT_OK


def cmd_train(args):
    from .training import TrainConfig, run_training

    cfg = _load_cfg(args)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["out_dir"] = args.out
    if args.epochs:
        overrides["epochs"] = args.epochs
    if args.game:
        overrides["game"] = args.game
    tc = cfg.train_config(**overrides) if cfg else TrainConfig(**overrides)
    res = run_training(tc, resume=args.resume)
    print("trained %d epochs; artifacts in %s" % (res.global_epoch, res.out_dir))
    print("metrics: %s" % res.metrics_path)
    for p in res.checkpoints:
        print("checkpoint: %s" % p)
    return EXIT_OK


def _agent_pair(args, cfg: Config | None, game):
    from .agents import Agent, AgentSpec

    def one(section, kind_flag, name):
        if cfg and cfg.section(section):
            spec = cfg.agent_spec(section)
        else:
            kind = kind_flag or "BASE_FIXED"
            spec = AgentSpec(kind=kind,
                             params=cfg.solver_params() if cfg else DcfrParams())
        return Agent(game, spec, name=name)

    return (one("agent_a", args.agent_a, "A"), one("agent_b", args.agent_b, "B"))


def cmd_eval(args):
    from .match import play_match
    from .reporting import match_report

    cfg = _load_cfg(args)
    game = _game_from(args, cfg)
    n_hands = args.hands if args.hands is not None else \
        (cfg.get("match", "n_hands", 1000) if cfg else 1000)
    if n_hands == 0:
        sys.stderr.write("warning: 0 hands requested, nothing to play\n")
        return EXIT_OK
    seed = args.seed if args.seed is not None else \
        (cfg.get("match", "seed", 0) if cfg else 0)
    mirror = cfg.get("match", "mirror", True) if cfg else True
    agent_a, agent_b = _agent_pair(args, cfg, game)
    res = play_match(game, agent_a, agent_b, n_hands=n_hands, seed=seed,
                     mirror=mirror)
    print("hands=%d  mean=%.2f mA/hand  se=%.2f  (%s vs %s)"
          % (res.n_hands, res.mean_ma, res.se_ma, agent_a.name, agent_b.name))
    if args.out:
        paths = match_report(res, args.out, ante=game.ante)
        for p in paths:
            print("wrote %s" % p)
    return EXIT_OK


def cmd_exploit(args):
    from .agents import Agent, AgentSpec
    from .match import evaluate_exploitability

    cfg = _load_cfg(args)
    game = _game_from(args, cfg)
    if cfg and cfg.section("agent_a"):
        spec = cfg.agent_spec("agent_a")
    else:
        from .cfr import DcfrParams as _P
        spec = AgentSpec(kind=args.agent_a or "BASE_FIXED",
                         params=cfg.solver_params() if cfg else _P())
    agent = Agent(game, spec, name=spec.kind)
    n_states = args.states or (cfg.get("exploit", "n_states", 20) if cfg else 20)
    seed = args.seed if args.seed is not None else \
        (cfg.get("exploit", "seed", 0) if cfg else 0)
    rf = cfg.get("exploit", "round", 2) if cfg else 2
    mean, se, vals = evaluate_exploitability(game, agent, n_states=n_states,
                                             seed=seed, round_filter=rf)
    print("agent=%s states=%d round=%s" % (agent.name, len(vals), rf))
    print("exploitability mean=%.6g se=%.3g (antes)" % (mean, se))
    return EXIT_OK


def cmd_bench(args):
    cfg = _load_cfg(args)
    game = _game_from(args, cfg)
    params = DcfrParams(iterations=args.iters or 250)
    pbs = initial_pbs(game)
    aa = full_legal_abstraction(game, pbs)
    t0 = time.perf_counter()
    tree = build_subgame(game, pbs, aa, nonroot_policy=None, depth_rounds=None)
    t_build = time.perf_counter() - t0
    solver = Solver(tree, params)
    t0 = time.perf_counter()
    solver.run()
    t_run = time.perf_counter() - t0
    per_iter = t_run / params.iterations
    print("game=%s nodes=%d infosets/player=(%d,%d)"
          % (game.game_id, tree.node_count, tree.n0, tree.n1))
    print("build=%.3fs run=%.3fs (%d iters, %.3f ms/iter)"
          % (t_build, t_run, params.iterations, per_iter * 1e3))
    return EXIT_OK


def cmd_report(args):
    from .reporting import convergence_report, training_report

    cfg = _load_cfg(args)
    out = args.out or "reports"
    wrote = []
    if args.metrics:
        wrote += training_report(args.metrics, out)
    if args.convergence:
        game = _game_from(args, cfg)
        wrote += convergence_report(game, out)
    if not wrote:
        sys.stderr.write("nothing to report: pass --metrics and/or --convergence\n")
        return EXIT_USAGE
    for p in wrote:
        print("wrote %s" % p)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="rlcfr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="INI config file")
        p.add_argument("--game", help="toy, kuhn, or nl-leduc")
        p.add_argument("--stack", type=int, help="starting stack in antes")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="output file or directory")

    p = sub.add_parser("solve", help="solve a full game with discounted CFR")
    common(p)
    p.add_argument("--iters", type=int, default=0, help="CFR iterations")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("train", help="run the abstraction-learning curriculum")
    common(p)
    p.add_argument("--epochs", type=int, default=0)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="head-to-head match between two agents")
    common(p)
    p.add_argument("--agent-a", help="agent kind when no config is given")
    p.add_argument("--agent-b", help="agent kind when no config is given")
    p.add_argument("--hands", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("exploit", help="exploitability of an agent's solves")
    common(p)
    p.add_argument("--agent-a", help="agent kind when no config is given")
    p.add_argument("--states", type=int, default=0)
    p.set_defaults(func=cmd_exploit)

    p = sub.add_parser("bench", help="time tree building and solving")
    common(p)
    p.add_argument("--iters", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="render figures from run artifacts")
    common(p)
    p.add_argument("--metrics", help="metrics.tsv from a training run")
    p.add_argument("--convergence", action="store_true",
                   help="also compute a solver convergence curve")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as e:
        sys.stderr.write("error [%s]: %s\n" % (e.code, e))
        return EXIT_RUNTIME
    except (OSError, ValueError) as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
