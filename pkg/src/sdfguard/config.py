"""Flat INI run configuration mapped onto the dataclass configs.

Sections and keys mirror the dataclass field names.  ``[attack]`` is the
evaluation attack; training reuses its budget with ``[train]`` overrides
``attack_steps`` and ``attack_random_init``.  ``[train] beta`` falls back to
``[sem] beta``.  Unknown sections or keys raise :class:`ConfigError`.
"""

from __future__ import annotations

import configparser
import dataclasses
import types
import typing
from dataclasses import dataclass, field, replace
from pathlib import Path

from .adversary import AttackConfig
from .classifier import ModelConfig
from .gad import GadConfig
from .shape_encoding import SemConfig
from .synth_data import DataConfig
from .training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    sem: SemConfig = field(default_factory=SemConfig)
    gad: GadConfig = field(default_factory=GadConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def with_seed(self, seed: int) -> "RunConfig":
        """Override every seed in the run."""
        return replace(
            self,
            data=replace(self.data, seed=seed),
            attack=replace(self.attack, seed=seed),
            train=replace(self.train, seed=seed, attack=replace(self.train.attack, seed=seed)),
        )


_TRAIN_EXTRA = {"attack_steps": int, "attack_random_init": bool}
_SECTIONS = {"data": DataConfig, "sem": SemConfig, "gad": GadConfig, "model": ModelConfig,
             "attack": AttackConfig, "train": TrainConfig}
_NESTED = {"attack", "sem", "gad"}


def _field_types(cls) -> dict[str, object]:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        value = float(text)  # accepts forms like 1e3
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _parse_float(text: str) -> float:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _convert(text: str, kind) -> object:
    origin = typing.get_origin(kind)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(kind) if a is not type(None)]
        if text.strip().lower() in ("", "none", "auto"):
            return None
        return _convert(text, args[0])
    if kind is bool:
        return _parse_bool(text)
    if kind is int:
        return _parse_int(text.strip())
    if kind is float:
        return _parse_float(text)
    if kind is str:
        return text.strip()
    if kind is tuple:
        return tuple(part.strip() for part in text.split(",") if part.strip())
    raise ConfigError(f"unsupported field type {kind!r}")


def _section_values(section: str, items: dict[str, str]) -> dict[str, object]:
    cls = _SECTIONS[section]
    kinds = {k: v for k, v in _field_types(cls).items() if not (section == "train" and k in _NESTED)}
    if section == "train":
        kinds.update(_TRAIN_EXTRA)
    out = {}
    for key, text in items.items():
        if key not in kinds:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        try:
            out[key] = _convert(text, kinds[key])
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from None
    return out


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str  # keep keys case-sensitive so typos surface
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
    values = {name: _section_values(name, dict(parser[name])) if parser.has_section(name) else {}
              for name in _SECTIONS}
    try:
        data = DataConfig(**values["data"])
        sem = SemConfig(**values["sem"])
        gad = GadConfig(**values["gad"])
        model = ModelConfig(**values["model"])
        attack = AttackConfig(**values["attack"])
        train_vals = dict(values["train"])
        steps = train_vals.pop("attack_steps", 10)
        random_init = train_vals.pop("attack_random_init", True)
        train_vals.setdefault("beta", sem.beta)
        train = TrainConfig(**train_vals, sem=sem, gad=gad,
                            attack=replace(attack, steps=steps, random_init=random_init,
                                           targeted=False))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(data, sem, gad, model, attack, train)


def load_config(path) -> RunConfig:
    """Parse an INI file; a missing path is an ``OSError`` left to the caller."""
    return parse_config(Path(path).read_text())
