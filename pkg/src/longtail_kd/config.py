"""Flat key=value experiment configuration.

One ``key = value`` per line, ``#`` starts a comment, blank lines are
ignored. Unknown or duplicate keys are rejected. Every key has a default, so
an empty file is a complete configuration. The resolved configuration is
echoed into each output directory for provenance.
"""

from __future__ import annotations

import os

from .data import ImbalanceProfile
from .losses import BKDConfig, KDConfig
from .mlp import LrSchedule
from .pipeline import TrainConfig


class ConfigError(ValueError):
    """Malformed configuration file or value."""


def _parse_int(s):
    return int(s, 10)


def _parse_float(s):
    return float(s)


def _parse_str(allowed=None):
    def parse(s):
        if allowed is not None and s not in allowed:
            raise ConfigError(f"expected one of {sorted(allowed)}, got {s!r}")
        return s

    return parse


def _parse_dims(s):
    if s.strip() == "":
        return ()
    try:
        return tuple(int(part, 10) for part in s.split(","))
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {s!r}") from None


def _parse_lr_steps(s):
    if s.strip() == "":
        return ()
    steps = []
    for part in s.split(","):
        try:
            epoch, factor = part.split(":")
            steps.append((int(epoch, 10), float(factor)))
        except ValueError:
            raise ConfigError(f"expected epoch:factor pairs, got {s!r}") from None
    return tuple(steps)


def _parse_optional_int(s):
    if s.strip() in ("", "none"):
        return None
    return int(s, 10)


# key -> (default, parser, description)
KEY_SPECS = {
    # dataset
    "kind": ("gaussian", _parse_str({"gaussian"}), "dataset family (gaussian mixture synthesis)"),
    "C": (10, _parse_int, "number of classes"),
    "d": (20, _parse_int, "feature dimension"),
    "rho": (100.0, _parse_float, "imbalance ratio: max class count over min"),
    "n_max": (500, _parse_int, "training samples in the most frequent class"),
    "profile": ("exponential", _parse_str({"exponential", "step"}), "count decay profile"),
    "separation": (3.0, _parse_float, "radius of the class-mean sphere"),
    "per_class_test": (100, _parse_int, "balanced test samples per class"),
    "data_seed": (1, _parse_int, "seed for dataset synthesis"),
    # model
    "hidden_dims": ((64, 64), _parse_dims, "hidden layer widths, comma-separated"),
    # training
    "loss": ("bkd", _parse_str({"ce", "cb", "kd", "bkd"}), "student training loss"),
    "epochs": (100, _parse_int, "training epochs"),
    "batch_size": (64, _parse_int, "minibatch size"),
    "lr": (0.02, _parse_float, "base learning rate"),
    "schedule": ("cosine", _parse_str({"constant", "step", "cosine"}), "learning-rate schedule"),
    "lr_steps": (((160, 0.01), (180, 0.01)), _parse_lr_steps, "epoch:factor decay points for schedule=step"),
    "momentum": (0.9, _parse_float, "SGD momentum coefficient"),
    "weight_decay": (0.0, _parse_float, "L2 penalty coefficient (0 disables)"),
    "seed": (0, _parse_int, "seed for model init and shuffling"),
    "alpha": (0.5, _parse_float, "cross-entropy weight in the plain distillation blend"),
    "beta": (0.9999, _parse_float, "effective-number hyperparameter for class weights"),
    "temperature": (2.0, _parse_float, "distillation temperature"),
    "weight_mode": ("raw", _parse_str({"raw", "mean-one"}), "class weight normalization"),
    "defer_epoch": (None, _parse_optional_int, "switch plain->balanced distillation at this epoch (empty = off)"),
    # evaluation
    "many_thresh": (100, _parse_int, "class counts above this are many-shot"),
    "few_thresh": (20, _parse_int, "class counts below this are few-shot"),
    # paths
    "data_dir": ("data", str, "directory holding train.csv/test.csv"),
    "out_dir": ("out", str, "directory for run outputs"),
}


def default_config():
    return {key: spec[0] for key, spec in KEY_SPECS.items()}


def parse_config(path):
    """Read a config file and resolve it against the defaults."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    resolved = default_config()
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in KEY_SPECS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            seen.add(key)
            parser = KEY_SPECS[key][1]
            try:
                resolved[key] = parser(value)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    return resolved


def render_config(cfg):
    """Canonical text form of a resolved config (sorted, one key per line)."""
    lines = []
    for key in sorted(cfg):
        value = cfg[key]
        if key == "hidden_dims":
            text = ",".join(str(v) for v in value)
        elif key == "lr_steps":
            text = ",".join(f"{e}:{f!r}" for e, f in value)
        elif value is None:
            text = ""
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def imbalance_profile(cfg):
    return ImbalanceProfile(
        kind=cfg["profile"], rho=cfg["rho"], n_max=cfg["n_max"], num_classes=cfg["C"]
    )


def train_config(cfg, loss=None):
    """TrainConfig assembled from the flat keys; ``loss`` overrides cfg[loss]."""
    schedule = LrSchedule(
        kind=cfg["schedule"],
        base_lr=cfg["lr"],
        steps=cfg["lr_steps"] if cfg["schedule"] == "step" else (),
    )
    return TrainConfig(
        loss=cfg["loss"] if loss is None else loss,
        epochs=cfg["epochs"],
        batch_size=cfg["batch_size"],
        hidden_dims=cfg["hidden_dims"],
        schedule=schedule,
        momentum=cfg["momentum"],
        weight_decay=cfg["weight_decay"],
        seed=cfg["seed"],
        kd=KDConfig(alpha=cfg["alpha"], temperature=cfg["temperature"]),
        bkd=BKDConfig(beta=cfg["beta"], temperature=cfg["temperature"], weight_mode=cfg["weight_mode"]),
        defer_epoch=cfg["defer_epoch"],
        many_thresh=cfg["many_thresh"],
        few_thresh=cfg["few_thresh"],
    )
