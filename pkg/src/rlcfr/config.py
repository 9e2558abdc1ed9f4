"""Experiment configuration: one INI file, strict schema.

Sections and keys are whitelisted below; an unknown section or key is a
CONFIG_ERROR, as is a value that fails to parse. Every key is optional,
falling back to the library defaults.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .agents import AgentSpec
from .cfr import DcfrParams
from .errors import ConfigError
from .training import ExploreParams, TrainConfig


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean: %r" % s)


def _parse_depth(s: str):
    v = s.strip().lower()
    if v in ("full", "none", ""):
        return None
    return int(s)


def _parse_hidden(s: str) -> tuple:
    return tuple(int(x) for x in s.replace(" ", "").split(",") if x)


SCHEMA = {
    "game": {"name": str, "stack": int},
    "solver": {"iterations": int, "alpha": float, "beta": float,
               "gamma": float, "updates": str, "depth_rounds": _parse_depth},
    "explore": {"noise_sigma": float, "eta": float, "epsilon": float},
    "train": {"epochs": int, "stage1_epochs": int, "stage3_epochs": int,
              "rl_batch": int, "pbs_batch": int, "lr": float,
              "value_lr": float, "seed": int, "stage": str,
              "iterations": int, "depth_rounds": int, "value_mode": str,
              "actor_hidden": _parse_hidden, "critic_hidden": _parse_hidden,
              "value_hidden": _parse_hidden, "value_steps": int,
              "rl_steps": int, "dives_per_epoch": int,
              "checkpoint_every": int, "workers": int, "out_dir": str},
    "match": {"n_hands": int, "seed": int, "mirror": _parse_bool,
              "workers": int},
    "exploit": {"n_states": int, "seed": int, "round": _parse_depth},
    "agent_a": {"kind": str, "actor_ckpt": str, "critic_ckpt": str,
                "value_ckpt": str, "gate": _parse_bool, "iterations": int,
                "depth_rounds": _parse_depth},
    "agent_b": {"kind": str, "actor_ckpt": str, "critic_ckpt": str,
                "value_ckpt": str, "gate": _parse_bool, "iterations": int,
                "depth_rounds": _parse_depth},
}


class Config:
    """Typed view over the parsed INI sections."""

    def __init__(self, values: dict):
        self.values = values

    def section(self, name: str) -> dict:
        return self.values.get(name, {})

    def get(self, section: str, key: str, default=None):
        return self.section(section).get(key, default)

    # builders ---------------------------------------------------------

    def game_args(self) -> dict:
        sec = self.section("game")
        out = {"name": sec.get("name", "nl-leduc")}
        if "stack" in sec:
            out["stack"] = sec["stack"]
        return out

    def solver_params(self, **overrides) -> DcfrParams:
        sec = dict(self.section("solver"))
        sec.pop("depth_rounds", None)
        sec.update(overrides)
        return _build(DcfrParams, sec, "[solver]")

    def depth_rounds(self, default=None):
        return self.section("solver").get("depth_rounds", default)

    def explore(self) -> ExploreParams:
        return _build(ExploreParams, self.section("explore"), "[explore]")

    def train_config(self, **overrides) -> TrainConfig:
        kw = dict(self.section("train"))
        for key, val in self.section("explore").items():
            kw.setdefault(key, val)
        if "name" in self.section("game"):
            kw.setdefault("game", self.section("game")["name"])
        if "stack" in self.section("game"):
            kw.setdefault("stack", self.section("game")["stack"])
        kw.update(overrides)
        return _build(TrainConfig, kw, "[train]")

    def agent_spec(self, section: str) -> AgentSpec:
        sec = dict(self.section(section))
        iters = sec.pop("iterations", None)
        if iters is not None:
            sec["params"] = self.solver_params(iterations=iters)
        else:
            sec["params"] = self.solver_params()
        if "depth_rounds" not in sec:
            sec["depth_rounds"] = self.depth_rounds(None)
        return _build(AgentSpec, sec, "[%s]" % section)


def _build(cls, kwargs: dict, where: str):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        raise ConfigError("invalid %s config: %s" % (where, e))


def load_config(path) -> Config:
    p = Path(path)
    if not p.exists():
        raise ConfigError("config file not found: %s" % p)
    parser = configparser.ConfigParser()
    try:
        parser.read_string(p.read_text())
    except configparser.Error as e:
        raise ConfigError("malformed config %s: %s" % (p, e))
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError("unknown config section [%s]" % section)
        known = SCHEMA[section]
        out = {}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError("unknown key %r in section [%s]" % (key, section))
            try:
                out[key] = known[key](raw)
            except (ValueError, TypeError) as e:
                raise ConfigError("bad value for %s.%s: %s" % (section, key, e))
        values[section] = out
    return Config(values)
