"""
Named, versioned experiment recipes.

A recipe is a complete ExperimentConfig minus its output directory. Any key
can be overridden: dotted keys reach nested sections (``dataset.n``), and a
bare key is accepted when exactly one section holds it.
"""

from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError

from cayley_learn.core.errors import ConfigError, UnknownRecipeError
from cayley_learn.core.schema import ExperimentConfig

logger = logging.getLogger(__name__)

SECTIONS = ("dataset", "trainer", "evaluation")

# gamma and train_size are exclusive; overriding one drops the other
TRAINING_SIZE_KEYS = {"gamma": "train_size", "train_size": "gamma"}

ORDER_8_GROUPS = ["C8", "C4xC2", "D8", "Q8", "C2xC2xC2"]


class Recipe(BaseModel):
    name: str
    version: int = Field(default=1, ge=1)
    description: str
    config: dict[str, Any]

    def experiment_config(self) -> dict[str, Any]:
        return {"recipe": self.name, "version": self.version, **copy.deepcopy(self.config)}


def _mlp(encoding: str = "one-hot", epochs: int = 20, hidden: list[int] | None = None) -> dict[str, Any]:
    return {
        "model": "mlp",
        "encoding": encoding,
        "hidden": hidden or [64],
        "epochs": epochs,
        "learning_rate": 0.5,
        "momentum": 0.9,
        "batch_size": 32,
        "loss": "mse",
        "seed": 0,
    }


def _unseen(S: list[int], description: str) -> dict[str, Any]:
    return {
        "description": description,
        "config": {
            "builder": "unseen-groups",
            "dataset": {"n": 8, "S": S, "names": ORDER_8_GROUPS, "k_perms": 30, "num_latin": 15000, "seed": 8},
            "trainer": _mlp(),
            "evaluation": {"protocol": "fixed", "train_size": 2000, "repeats": 10, "seed": 8},
        },
    }


_DEFINITIONS: dict[str, dict[str, Any]] = {
    "cayley-n8": {
        "description": "Cayley tables vs random Latin squares, n=8, 5000 training records",
        "config": {
            "builder": "cayley-vs-latin",
            "dataset": {"n": 8, "k_perms": 40, "num_latin": 15000, "seed": 8},
            "trainer": _mlp(),
            "evaluation": {
                "protocol": "split",
                "train_size": 5000,
                "repeats": 5,
                "curve_sizes": list(range(500, 6001, 500)),
                "seed": 8,
            },
        },
    },
    "cayley-n12": {
        "description": "Cayley tables vs random Latin squares, n=12, 25% training",
        "config": {
            "builder": "cayley-vs-latin",
            "dataset": {"n": 12, "k_perms": 50, "num_latin": 20000, "seed": 12},
            "trainer": _mlp(),
            "evaluation": {"protocol": "split", "gamma": 0.25, "repeats": 5, "seed": 12},
        },
    },
    "unseen-n8-124": _unseen([1, 2, 4], "Train on C8, C4xC2, Q8; validate on the unseen D8 and C2xC2xC2"),
    "unseen-n8-12": _unseen([1, 2], "Train on C8, C4xC2; validate on the three unseen groups of order 8"),
    "unseen-n8-345": _unseen([3, 4, 5], "Train on D8, Q8, C2xC2xC2; validate on the unseen C8 and C4xC2"),
    "entry-shift-12": {
        "description": "Cayley tables with entries shifted per permutation vs one shifted non-group square, n=12",
        "config": {
            "builder": "entry-shift",
            "dataset": {"n": 12, "perms_per_group": 2500, "num_negative": 12500, "seed": 12},
            "trainer": _mlp(encoding="scaled-integer"),
            "evaluation": {"protocol": "split", "train_size": 10000, "repeats": 5, "seed": 12},
        },
    },
    "simplicity-desk": {
        "description": "Simple vs non-simple groups over catalog(32) plus A5 and A6, padded to 360",
        "config": {
            "builder": "simplicity",
            "dataset": {
                "corpus": {"catalog": 32, "names": ["A5", "A6"]},
                "perms_simple": 20,
                "perms_nonsimple": 5,
                "seed": 32,
            },
            "trainer": {"model": "linear", "encoding": "scaled-integer", "lam": 1e-4, "epochs": 10, "seed": 0},
            "evaluation": {
                "protocol": "split",
                "gamma": 0.2,
                "repeats": 5,
                "curve_gammas": [0.05, 0.1, 0.15, 0.2],
                "seed": 32,
            },
        },
    },
    "subgroups-desk": {
        "description": "Three subgroup-count classes (<30, 30..99, >=100) over catalog(32)",
        "config": {
            "builder": "subgroup-classes",
            "dataset": {"corpus": {"catalog": 32}, "thresholds": [30, 100], "perms": 5, "count_kind": "total", "seed": 32},
            "trainer": _mlp(encoding="scaled-integer"),
            "evaluation": {"protocol": "split", "gamma": 0.5, "repeats": 5, "seed": 32},
        },
    },
    "group-iso-12": {
        "description": "Isomorphic vs non-isomorphic pairs of shifted order-12 tables, disjoint train/valid groups",
        "config": {
            "builder": "group-iso-pairs",
            "dataset": {"S1": ["Dic12", "C12", "A4"], "S2": ["D12", "C6xC2"], "pairs_per_class": 10000, "seed": 12},
            "trainer": _mlp(encoding="scaled-integer", epochs=10),
            "evaluation": {"protocol": "fixed", "gamma": 1.0, "repeats": 5, "seed": 12},
        },
    },
    "ring-partitions-6": {
        "description": "Matched vs mismatched (mult, add) pairs over the rings of every partition of 6",
        "config": {
            "builder": "ring-partitions",
            "dataset": {"N": 6, "k_correct": 400, "k_incorrect": 909, "seed": 6},
            "trainer": _mlp(encoding="scaled-integer", epochs=10),
            "evaluation": {"protocol": "split", "train_size": 5000, "repeats": 5, "seed": 6},
        },
    },
    "ring-single-12": {
        "description": "Matched vs mismatched (mult, add) pairs of Z2xZ2xZ3",
        "config": {
            "builder": "ring-match",
            "dataset": {"rings": [[2, 2, 3]], "k_correct": 2500, "k_incorrect": 10000, "seed": 12},
            "trainer": _mlp(),
            "evaluation": {"protocol": "split", "train_size": 4000, "repeats": 5, "seed": 12},
        },
    },
    "ring-collection-10": {
        "description": "Ring matching trained on the rings of orders 2..8, validated on orders 9 and 10",
        "config": {
            "builder": "ring-collection",
            "dataset": {"N": 10, "F": 7, "k_correct": 2083, "k_incorrect": 2084, "seed": 10},
            "trainer": _mlp(epochs=10),
            "evaluation": {"protocol": "fixed", "gamma": 1.0, "repeats": 5, "seed": 10},
        },
    },
}

RECIPES: dict[str, Recipe] = {name: Recipe(name=name, **spec) for name, spec in _DEFINITIONS.items()}


def get_recipe(name: str) -> Recipe:
    """
    Raises:
        UnknownRecipeError: if no recipe has this name
    """
    try:
        return RECIPES[name]
    except KeyError:
        raise UnknownRecipeError(f"unknown recipe {name!r}; available: {', '.join(sorted(RECIPES))}") from None


def parse_value(text: str) -> Any:
    """Command-line values are YAML scalars or flow collections (12, 0.25, [1,2,4], mlp)."""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value {text!r}: {e}") from e


def parse_overrides(args: list[str]) -> dict[str, Any]:
    """
    Turn ``--key value`` / ``--key=value`` pairs into a mapping.

    Raises:
        ConfigError: for a dangling flag or a stray positional value
    """
    overrides: dict[str, Any] = {}
    i = 0
    while i < len(args):
        arg = args[i]
        if not arg.startswith("--") or len(arg) == 2:
            raise ConfigError(f"expected --key value, got {arg!r}")
        key = arg[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(args):
                raise ConfigError(f"flag --{key} needs a value")
            raw = args[i + 1]
            i += 2
        overrides[key.replace("-", "_")] = parse_value(raw)
    return overrides


def _assign(config: dict[str, Any], path: list[str], value: Any) -> None:
    node = config
    for part in path[:-1]:
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        if not isinstance(child, dict):
            raise ConfigError(f"cannot set {'.'.join(path)}: {part} is not a mapping")
        node = child
    node[path[-1]] = value


def _clear_other_size(config: dict[str, Any], key: str) -> None:
    evaluation = config.get("evaluation")
    if isinstance(evaluation, dict):
        evaluation.pop(TRAINING_SIZE_KEYS[key], None)


def apply_overrides(config: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """
    Return a copy of ``config`` with every override applied.

    Raises:
        ConfigError: for a bare key that is unknown or held by several sections
    """
    out = copy.deepcopy(config)
    for key, value in overrides.items():
        if key in TRAINING_SIZE_KEYS:
            key = f"evaluation.{key}"
        if key in ("evaluation.gamma", "evaluation.train_size"):
            _clear_other_size(out, key.split(".")[-1])
        if "." in key:
            _assign(out, key.split("."), value)
            continue
        if key in ExperimentConfig.model_fields:
            out[key] = value
            continue
        holders = [s for s in SECTIONS if isinstance(out.get(s), dict) and key in out[s]]
        if len(holders) == 1:
            out[holders[0]][key] = value
        elif not holders:
            raise ConfigError(f"unknown config key {key!r}; use a dotted key such as dataset.{key}")
        else:
            raise ConfigError(f"key {key!r} is ambiguous between {holders}; use e.g. {holders[0]}.{key}")
    return out


def load_config_file(path: Path | str) -> dict[str, Any]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return data


def resolve_config(
    recipe: str | None = None,
    config_file: Path | str | None = None,
    overrides: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """
    Build a validated ExperimentConfig from a recipe and/or a YAML file plus overrides.

    The file is laid over the recipe, the overrides over both.

    Raises:
        UnknownRecipeError: for an unknown recipe name
        ConfigError: if nothing is given or validation fails
    """
    base: dict[str, Any] = {}
    if config_file is not None:
        file_config = load_config_file(config_file)
        recipe = recipe or file_config.get("recipe")
        if recipe in RECIPES:
            base = get_recipe(recipe).experiment_config()
        for key, value in file_config.items():
            if key in SECTIONS and isinstance(value, dict) and isinstance(base.get(key), dict):
                base[key] = {**base[key], **value}
            else:
                base[key] = value
    elif recipe is not None:
        base = get_recipe(recipe).experiment_config()
    else:
        raise ConfigError("give a recipe name or --config FILE")

    merged = apply_overrides(base, overrides or {})
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {e}") from e
