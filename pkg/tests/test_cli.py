from pathlib import Path
from tempfile import TemporaryDirectory
import json
import logging
import unittest

from click.testing import CliRunner

from cayley_learn.config import reload_settings
from cayley_learn.core.schema import ExperimentResult, TargetCheck
from cayley_learn.core.storage import MANIFEST_PREFIX
from cayley_learn.experiments.recipes import RECIPES
from cayley_learn.experiments.report import write_summary
from cayley_learn.main import cli


class CliTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = TemporaryDirectory()
        self.root = Path(self._tmp.name)
        self.runner = CliRunner()
        self.env = {"CAYLEY_LEARN_OUTPUT_ROOT": str(self.root / "bundles")}

    def tearDown(self) -> None:
        logging.getLogger().handlers.clear()
        self._tmp.cleanup()
        reload_settings()

    def invoke(self, *args: str):
        return self.runner.invoke(cli, list(args), env=self.env)

    def _gen(self) -> Path:
        path = self.root / "cayley5.ndjson"
        result = self.invoke(
            "gen", "cayley-vs-latin", "--out", str(path), "--n", "5", "--k_perms", "2", "--num_latin", "4", "--seed", "1"
        )
        self.assertEqual(result.exit_code, 0, result.output)
        return path

    def test_recipes_lists_every_name(self) -> None:
        result = self.invoke("recipes")
        self.assertEqual(result.exit_code, 0)
        for name in RECIPES:
            self.assertIn(name, result.output)

    def test_unknown_recipe_and_bad_keys_exit_1(self) -> None:
        result = self.invoke("run", "cayley-n99")
        self.assertEqual(result.exit_code, 1)
        self.assertIn("unknown recipe", result.output)
        self.assertEqual(self.invoke("run", "cayley-n8", "--colour", "red").exit_code, 1)
        self.assertEqual(self.invoke("run").exit_code, 1)

    def test_gen_writes_manifest_and_records(self) -> None:
        path = self._gen()
        lines = path.read_text().splitlines()
        self.assertTrue(lines[0].startswith(MANIFEST_PREFIX))
        manifest = json.loads(lines[0][len(MANIFEST_PREFIX):])
        self.assertEqual(manifest["task"], "cayley")
        self.assertEqual(manifest["count"], 8)
        self.assertEqual(len(lines), 9)

    def test_unknown_builder_is_a_usage_error(self) -> None:
        result = self.invoke("gen", "latin-squares", "--out", str(self.root / "x.ndjson"))
        self.assertEqual(result.exit_code, 1)

    def test_quadrangle_oracle_agrees_with_generated_labels(self) -> None:
        path = self._gen()
        verdicts = self.root / "verdicts.ndjson"
        result = self.invoke("oracle", "quadrangle", str(path), "--out", str(verdicts))
        self.assertEqual(result.exit_code, 0, result.output)
        rows = [json.loads(line) for line in verdicts.read_text().splitlines()]
        self.assertEqual(len(rows), 8)
        self.assertTrue(all(row["agrees"] for row in rows))
        self.assertEqual(sum(row["verdict"] for row in rows), 4)

    def test_oracle_reports_malformed_lines(self) -> None:
        path = self.root / "tables.ndjson"
        path.write_text('{"n": 2, "table": [1, 2, 2, 1]}\n{"n": 2}\n')
        verdicts = self.root / "verdicts.ndjson"
        result = self.invoke("oracle", "quadrangle", str(path), "--out", str(verdicts))
        self.assertEqual(result.exit_code, 2)
        first, second = (json.loads(line) for line in verdicts.read_text().splitlines())
        self.assertEqual(first, {"line": 1, "latin": True, "verdict": True})
        self.assertEqual(second["line"], 2)
        self.assertIn("error", second)

    def test_curve_needs_a_grid(self) -> None:
        path = self._gen()
        result = self.invoke("curve", str(path), "--out", str(self.root / "curve"))
        self.assertEqual(result.exit_code, 1)

    def test_curve_writes_rows(self) -> None:
        path = self._gen()
        out = self.root / "curve"
        result = self.invoke(
            "curve", str(path), "--gammas", "0.5", "--repeats", "2", "--out", str(out),
            "--trainer.model", "linear", "--trainer.epochs", "2",
        )
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(len((out / "runs.csv").read_text().splitlines()), 3)
        self.assertTrue((out / "aggregate.csv").exists())

    def test_failed_run_still_writes_summary(self) -> None:
        out = self.root / "failed"
        result = self.invoke("run", "cayley-n8", "--out", str(out), "--evaluation.protocol", "fixed")
        self.assertEqual(result.exit_code, 2)
        summary = json.loads((out / "summary.json").read_text())
        self.assertFalse(summary["success"])
        self.assertTrue((out / "run_info.json").exists())

    def test_report_without_summary_exits_1(self) -> None:
        empty = self.root / "empty"
        empty.mkdir()
        self.assertEqual(self.invoke("report", str(empty)).exit_code, 1)

    def test_strict_report_exits_3_on_a_missed_band(self) -> None:
        bundle = self.root / "bundle"
        bundle.mkdir()
        missed = TargetCheck(metric="accuracy", achieved=0.6, achieved_std=0.01, lower=0.9, passed=False)
        write_summary(bundle, ExperimentResult(recipe="cayley-n8", version=1, success=True, config={}, checks=[missed]))
        self.assertEqual(self.invoke("report", str(bundle)).exit_code, 0)
        result = self.invoke("report", str(bundle), "--strict")
        self.assertEqual(result.exit_code, 3)
        self.assertIn("missed accuracy", result.output)


if __name__ == "__main__":
    unittest.main()
