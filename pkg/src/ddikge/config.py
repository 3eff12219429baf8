"""Run configuration: flat KEY = VALUE files, presets, overrides.

A config file holds one `key = value` per line; blank lines and
#-comments are ignored. Unknown keys are rejected. Precedence, lowest
to highest: built-in defaults, preset, config file, --set overrides.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .errors import ConfigError
from .training import TrainConfig

# Tuned settings for the two dataset scales in the original evaluation
# (drug pairs with typed interactions; polypharmacy side effects), one
# per scorer, plus small synthetic-graph presets for quick runs.
PRESETS: dict[str, dict] = {
    "deepddi-complex": {"sampler": "aae", "scorer": "complex", "lr_gen": 0.001,
                        "lr_disc": 0.05, "dim": 200, "batch_size": 512,
                        "n_dis": 1, "epochs": 300},
    "deepddi-simple": {"sampler": "aae", "scorer": "simple", "lr_gen": 0.001,
                       "lr_disc": 0.1, "dim": 200, "batch_size": 512,
                       "n_dis": 1, "epochs": 300},
    "deepddi-rotate": {"sampler": "aae", "scorer": "rotate", "lr_gen": 0.001,
                       "lr_disc": 0.5, "dim": 200, "batch_size": 512,
                       "n_dis": 2, "epochs": 500},
    "decagon-complex": {"sampler": "aae", "scorer": "complex", "lr_gen": 0.005,
                        "lr_disc": 0.5, "dim": 200, "batch_size": 1024,
                        "n_dis": 1, "epochs": 1000},
    "decagon-simple": {"sampler": "aae", "scorer": "simple", "lr_gen": 0.005,
                       "lr_disc": 0.5, "dim": 200, "batch_size": 512,
                       "n_dis": 2, "epochs": 1000},
    "decagon-rotate": {"sampler": "aae", "scorer": "rotate", "lr_gen": 0.005,
                       "lr_disc": 0.5, "dim": 200, "batch_size": 512,
                       "n_dis": 5, "epochs": 1000},
    "synth-small": {"sampler": "aae", "scorer": "complex", "lr_gen": 0.05,
                    "lr_disc": 0.05, "dim": 8, "batch_size": 32,
                    "n_dis": 1, "epochs": 50, "tau": 1.0},
    "synth-medium": {"sampler": "aae", "scorer": "complex", "lr_gen": 0.05,
                     "lr_disc": 0.5, "dim": 16, "batch_size": 64, "clip": 3.0,
                     "n_dis": 1, "epochs": 40, "tau": 1.0},
}


def _cast_bool(s: str) -> bool:
    if s in ("true", "True", "1"):
        return True
    if s in ("false", "False", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _cast_ratios(s: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 3:
        raise ValueError(f"need 3 comma-separated ratios, got {s!r}")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


_TRAIN_FIELDS = {f.name: f.type for f in dataclasses.fields(TrainConfig)}

_SCHEMA: dict[str, object] = {
    # run-level keys
    "preset": str,
    "data": str,
    "out": str,
    "split_ratios": _cast_ratios,
    "split_seed": int,
    "split_by_pair": _cast_bool,
}
for _name, _type in _TRAIN_FIELDS.items():
    _SCHEMA[_name] = {"int": int, "float": float, "str": str}[_type]


@dataclass
class RunConfig:
    """Training-run settings: the TrainConfig plus data and split options."""

    train: TrainConfig
    data: str = ""
    out: str = ""
    preset: str = ""
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    split_seed: int | None = None
    split_by_pair: bool = False

    def effective_split_seed(self) -> int:
        return self.train.seed if self.split_seed is None else self.split_seed

    def resolved_text(self) -> str:
        """Canonical text of every setting after precedence is applied."""
        lines = []
        if self.preset:
            lines.append(f"preset = {self.preset}")
        lines.append(f"data = {self.data}")
        lines.append(f"out = {self.out}")
        lines.append(f"split_ratios = {','.join(repr(r) for r in self.split_ratios)}")
        lines.append(f"split_seed = {self.effective_split_seed()}")
        lines.append(f"split_by_pair = {'true' if self.split_by_pair else 'false'}")
        for f in dataclasses.fields(TrainConfig):
            lines.append(f"{f.name} = {getattr(self.train, f.name)}")
        return "\n".join(lines) + "\n"


def parse_kv_text(text: str, origin: str = "config") -> dict[str, str]:
    """Parse `key = value` lines; duplicates and malformed lines are errors."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{origin} line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{origin} line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"{origin} line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _cast_all(raw: dict[str, str], origin: str) -> dict:
    typed: dict = {}
    for key, value in raw.items():
        if key not in _SCHEMA:
            known = ", ".join(sorted(_SCHEMA))
            raise ConfigError(f"{origin}: unknown key {key!r}; valid keys: {known}")
        try:
            typed[key] = _SCHEMA[key](value)  # type: ignore[operator]
        except (ValueError, TypeError) as err:
            raise ConfigError(f"{origin}: bad value for {key!r}: {err}")
    return typed


def build_run_config(
    config_path: str | None = None,
    set_args: list[str] | None = None,
) -> RunConfig:
    """Assemble a RunConfig from a file and repeated --set key=value args."""
    file_kv: dict[str, str] = {}
    if config_path is not None:
        if not os.path.exists(config_path):
            raise ConfigError(f"config file not found: {config_path}")
        with open(config_path, "r", encoding="utf-8") as fh:
            file_kv = parse_kv_text(fh.read(), origin=config_path)
    set_kv: dict[str, str] = {}
    for item in set_args or []:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, _, value = item.partition("=")
        if key.strip() in set_kv:
            raise ConfigError(f"--set: duplicate key {key.strip()!r}")
        set_kv[key.strip()] = value.strip()

    preset_name = set_kv.get("preset", file_kv.get("preset", ""))
    merged_raw: dict[str, str] = {}
    if preset_name:
        if preset_name not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset_name!r}; available: {', '.join(sorted(PRESETS))}"
            )
        merged_raw.update({k: str(v) for k, v in PRESETS[preset_name].items()})
    merged_raw.update({k: v for k, v in file_kv.items() if k != "preset"})
    merged_raw.update({k: v for k, v in set_kv.items() if k != "preset"})
    typed = _cast_all(merged_raw, "config")

    train_kwargs = {k: v for k, v in typed.items() if k in _TRAIN_FIELDS}
    train = TrainConfig(**train_kwargs)
    train.validate()
    run = RunConfig(
        train=train,
        data=typed.get("data", ""),
        out=typed.get("out", ""),
        preset=preset_name,
        split_ratios=typed.get("split_ratios", (0.8, 0.1, 0.1)),
        split_seed=typed.get("split_seed"),
        split_by_pair=typed.get("split_by_pair", False),
    )
    return run
