"""Recipe registry, experiment runner and report bundles."""

from cayley_learn.experiments.base import Experiment
from cayley_learn.experiments.recipes import RECIPES, Recipe, get_recipe, parse_overrides, resolve_config
from cayley_learn.experiments.report import check_targets, load_result, write_bundle
from cayley_learn.experiments.runner import RecipeExperiment

__all__ = [
    "Experiment",
    "RECIPES",
    "Recipe",
    "RecipeExperiment",
    "check_targets",
    "get_recipe",
    "load_result",
    "parse_overrides",
    "resolve_config",
    "write_bundle",
]
