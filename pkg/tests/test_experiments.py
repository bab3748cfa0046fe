from pathlib import Path
from tempfile import TemporaryDirectory
import json
import logging
import unittest

import pandas as pd
import yaml

from cayley_learn.config import Settings
from cayley_learn.core.errors import ConfigError, UnknownRecipeError
from cayley_learn.core.schema import ExperimentConfig
from cayley_learn.experiments.recipes import RECIPES, apply_overrides, get_recipe, parse_overrides, resolve_config
from cayley_learn.experiments.report import check_targets, load_result, load_targets, monotone_check, render_markdown
from cayley_learn.experiments.runner import RecipeExperiment
from cayley_learn.metrics.curves import LearningCurvePoint

TINY_TRAINER = {"trainer.hidden": [4], "trainer.epochs": 2, "trainer.batch_size": 4}


def _point(gamma: float, accuracy: float, std: float) -> LearningCurvePoint:
    return LearningCurvePoint(gamma=gamma, repeats=3, mean={"accuracy": accuracy}, std={"accuracy": std})


class RecipeTests(unittest.TestCase):
    def test_every_recipe_validates(self) -> None:
        self.assertEqual(len(RECIPES), 12)
        for name, recipe in RECIPES.items():
            config = ExperimentConfig.model_validate(recipe.experiment_config())
            self.assertEqual(config.recipe, name)

    def test_unseen_group_recipes_use_thirty_squared_permutations(self) -> None:
        for name in ("unseen-n8-124", "unseen-n8-12", "unseen-n8-345"):
            config = get_recipe(name).experiment_config()
            self.assertEqual(config["dataset"]["k_perms"], 30, name)
            self.assertEqual(config["evaluation"]["train_size"], 2000, name)
            self.assertNotIn("gamma", config["evaluation"])

    def test_targets_name_known_recipes(self) -> None:
        self.assertLessEqual(set(load_targets()), set(RECIPES))

    def test_unknown_recipe(self) -> None:
        with self.assertRaises(UnknownRecipeError):
            get_recipe("cayley-n99")

    def test_parse_overrides(self) -> None:
        parsed = parse_overrides(["--dataset.n", "6", "--S=[1,2]", "--trainer.hidden", "[8, 4]", "--num-latin", "5"])
        self.assertEqual(parsed, {"dataset.n": 6, "S": [1, 2], "trainer.hidden": [8, 4], "num_latin": 5})
        with self.assertRaises(ConfigError):
            parse_overrides(["--dataset.n"])
        with self.assertRaises(ConfigError):
            parse_overrides(["six"])

    def test_bare_keys_resolve_to_their_section(self) -> None:
        base = get_recipe("cayley-n8").experiment_config()
        out = apply_overrides(base, {"n": 9, "gamma": 0.3})
        self.assertEqual(out["dataset"]["n"], 9)
        self.assertEqual(out["evaluation"]["gamma"], 0.3)
        self.assertNotIn("train_size", out["evaluation"])
        self.assertEqual(base["dataset"]["n"], 8)
        with self.assertRaises(ConfigError):
            apply_overrides(base, {"seed": 1})
        with self.assertRaises(ConfigError):
            apply_overrides(base, {"colour": "red"})

    def test_resolve_config_layers(self) -> None:
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "run.yaml"
            path.write_text(yaml.safe_dump({"recipe": "cayley-n12", "dataset": {"n": 6}}))
            config = resolve_config(config_file=path, overrides={"dataset.num_latin": 10})
        self.assertEqual(config.recipe, "cayley-n12")
        self.assertEqual(config.dataset, {"n": 6, "k_perms": 50, "num_latin": 10, "seed": 12})
        with self.assertRaises(ConfigError):
            resolve_config()
        with self.assertRaises(ConfigError):
            resolve_config("cayley-n8", overrides={"evaluation.gamma": 0.0})
        with self.assertRaises(ConfigError):
            resolve_config("cayley-n8", overrides={"trainer.optimizer": "adam"})


class TargetTests(unittest.TestCase):
    def test_bands_and_chance_margin(self) -> None:
        table = {
            "demo": {
                "citation": "demo run",
                "targets": [
                    {"metric": "accuracy", "mean": 0.95, "lower": 0.9},
                    {"metric": "phi", "mean": 0.5},
                ],
            },
            "chance": {"targets": [{"metric": "accuracy", "above_chance_sigmas": 2}]},
        }
        checks, citation = check_targets("demo", _point(0.5, 0.92, 0.01), [], targets=table)
        self.assertEqual(citation, "demo run")
        self.assertEqual([c.passed for c in checks], [True, None])
        self.assertEqual(checks[0].published_mean, 0.95)
        (chance,), _ = check_targets("chance", _point(0.5, 0.6, 0.02), [], targets=table)
        self.assertTrue(chance.passed)
        self.assertAlmostEqual(chance.lower, 0.54)
        self.assertEqual(check_targets("other", _point(0.5, 0.6, 0.02), [], targets=table), ([], None))

    def test_unknown_metric_is_a_config_error(self) -> None:
        with self.assertRaises(ConfigError):
            check_targets("x", _point(0.5, 0.6, 0.0), [], targets={"x": {"targets": [{"metric": "auc"}]}})

    def test_monotone_curve(self) -> None:
        rising = [_point(0.1, 0.7, 0.02), _point(0.2, 0.69, 0.02), _point(0.3, 0.8, 0.02)]
        self.assertTrue(monotone_check(rising, "accuracy").passed)
        falling = [_point(0.1, 0.9, 0.01), _point(0.2, 0.7, 0.01)]
        self.assertFalse(monotone_check(falling, "accuracy").passed)
        self.assertIsNone(monotone_check(falling[:1], "accuracy"))


class RecipeExperimentTests(unittest.TestCase):
    def tearDown(self) -> None:
        logging.getLogger().handlers.clear()

    def _run(self, recipe: str, output_dir: Path, overrides: dict) -> tuple:
        config = resolve_config(recipe, overrides={**overrides, "output_dir": str(output_dir)})
        settings = Settings(output_root=output_dir.parent)
        return RecipeExperiment(config, settings).run(), config

    def test_split_protocol_bundle_is_reproducible(self) -> None:
        overrides = {
            **TINY_TRAINER,
            "dataset.n": 5,
            "dataset.k_perms": 3,
            "dataset.num_latin": 12,
            "train_size": 10,
            "evaluation.curve_sizes": [6, 14],
            "evaluation.repeats": 2,
        }
        with TemporaryDirectory() as tmpdir:
            first_dir, second_dir = Path(tmpdir) / "a", Path(tmpdir) / "b"
            result, config = self._run("cayley-n8", first_dir, overrides)
            self._run("cayley-n8", second_dir, overrides)

            self.assertTrue(result.success, result.errors)
            self.assertEqual(result.records, 21)
            self.assertEqual(result.corpus, ["C5"])
            self.assertNotIn("output_dir", result.config)
            for name in ("manifest.json", "runs.csv", "aggregate.csv", "curve.svg", "summary.json", "summary.md", "model.json"):
                self.assertTrue((first_dir / name).exists(), name)
            for name in ("runs.csv", "aggregate.csv", "curve.svg", "summary.json"):
                self.assertEqual((first_dir / name).read_bytes(), (second_dir / name).read_bytes(), name)

            runs = pd.read_csv(first_dir / "runs.csv")
            self.assertEqual(sorted(set(runs["train_size"])), [6, 10, 14])
            self.assertEqual(len(runs), 6)
            manifest = json.loads((first_dir / "manifest.json").read_text())
            self.assertEqual(manifest["dataset"]["content_hash"], result.manifest_hash)
            self.assertEqual(load_result(first_dir).manifest_hash, result.manifest_hash)
            self.assertIn("cayley-n8", render_markdown(result))

    def test_fixed_protocol_keeps_validation_groups_unseen(self) -> None:
        overrides = {
            **TINY_TRAINER,
            "dataset.S1": ["C4", "C2xC2"],
            "dataset.S2": ["C6", "D6"],
            "dataset.pairs_per_class": 4,
            "evaluation.repeats": 2,
        }
        with TemporaryDirectory() as tmpdir:
            out = Path(tmpdir) / "iso"
            result, _ = self._run("group-iso-12", out, overrides)
            self.assertTrue(result.success, result.errors)
            self.assertEqual(result.corpus, ["C2xC2", "C4", "C6", "D6"])
            manifest = json.loads((out / "manifest.json").read_text())
            self.assertEqual(set(manifest), {"train", "valid"})
            self.assertEqual(manifest["valid"]["corpus"], ["C6", "D6"])
            runs = pd.read_csv(out / "runs.csv")
            self.assertEqual(list(runs["valid_size"]), [8, 8])
            self.assertFalse((out / "curve.svg").exists())

    def test_prerequisite_failures_become_failed_results(self) -> None:
        with TemporaryDirectory() as tmpdir:
            result, _ = self._run("cayley-n8", Path(tmpdir) / "x", {"evaluation.protocol": "fixed"})
            self.assertFalse(result.success)
            self.assertIn("protocol=split", result.errors[0])
            result, _ = self._run("subgroups-desk", Path(tmpdir) / "y", {"trainer": {"model": "linear"}})
            self.assertFalse(result.success)
            self.assertTrue(any("multiclass" in e for e in result.errors))

    def test_builder_errors_become_failed_results(self) -> None:
        with TemporaryDirectory() as tmpdir:
            result, _ = self._run("cayley-n8", Path(tmpdir) / "z", {"dataset.n": 4, "dataset.num_latin": 3})
        self.assertFalse(result.success)
        self.assertTrue(result.errors[0].startswith("DomainError"))


if __name__ == "__main__":
    unittest.main()
