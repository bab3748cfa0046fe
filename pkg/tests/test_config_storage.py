from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import mock
import json
import logging
import os
import sys
import unittest

from pydantic import ValidationError

from cayley_learn.config import Settings, get_settings, reload_settings
from cayley_learn.core.errors import AcceptanceMiss, CayleyLearnError, ConfigError, DomainError, RecordParseError, UnknownRecipeError
from cayley_learn.core.logging import JsonFormatter, get_experiment_logger, setup_logging
from cayley_learn.core.storage import MANIFEST_PREFIX, NDJSONStore, atomic_write, content_hash, dumps_line


class SettingsTests(unittest.TestCase):
    def tearDown(self) -> None:
        reload_settings()

    def test_environment_overrides_defaults(self) -> None:
        with TemporaryDirectory() as tmpdir:
            env = {
                "CAYLEY_LEARN_OUTPUT_ROOT": tmpdir,
                "CAYLEY_LEARN_MAX_WORKERS": "2",
                "CAYLEY_LEARN_ORACLE_SAMPLE_RATE": "0.5",
            }
            with mock.patch.dict(os.environ, env):
                settings = reload_settings()
                self.assertIs(get_settings(), settings)
                self.assertEqual(settings.output_root, Path(tmpdir).resolve())
                self.assertEqual(settings.max_workers, 2)
                self.assertEqual(settings.oracle_sample_rate, 0.5)
                self.assertEqual(settings.ring_size_bound, 256)

    def test_out_of_range_values_are_rejected(self) -> None:
        with mock.patch.dict(os.environ, {"CAYLEY_LEARN_ORACLE_SAMPLE_RATE": "2"}):
            with self.assertRaises(ValidationError):
                Settings()

    def test_relative_output_root_is_resolved(self) -> None:
        self.assertTrue(Settings(output_root=Path("bundles")).output_root.is_absolute())


class ErrorTests(unittest.TestCase):
    def test_exit_codes(self) -> None:
        self.assertEqual(DomainError("x").exit_code, 2)
        self.assertEqual(ConfigError("x").exit_code, 1)
        self.assertEqual(UnknownRecipeError("no recipe 'x'").exit_code, 1)
        self.assertEqual(str(UnknownRecipeError("no recipe 'x'")), "no recipe 'x'")
        self.assertEqual(AcceptanceMiss("x").exit_code, 3)
        self.assertIsInstance(RecordParseError("bad", line=3), CayleyLearnError)
        self.assertEqual(RecordParseError("bad", line=3).line, 3)


class StorageTests(unittest.TestCase):
    def test_atomic_write_replaces_content(self) -> None:
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "nested" / "file.txt"
            atomic_write(path, "first")
            atomic_write(path, "second")
            self.assertEqual(path.read_text(), "second")
            self.assertEqual(list(path.parent.iterdir()), [path])

    def test_lines_are_key_ordered(self) -> None:
        self.assertEqual(dumps_line({"b": 1, "a": [1, 2]}), '{"a":[1,2],"b":1}')
        self.assertEqual(content_hash([]), content_hash(iter([])))
        self.assertNotEqual(content_hash(["a"]), content_hash(["a", ""]))

    def test_store_writes_manifest_and_skips_it_when_reading(self) -> None:
        with TemporaryDirectory() as tmpdir:
            store = NDJSONStore(Path(tmpdir))
            digest = store.write("items.ndjson", [{"x": 1}, {"x": 2}], manifest={"kind": "demo"})
            text = (Path(tmpdir) / "items.ndjson").read_text()
            self.assertTrue(text.startswith(MANIFEST_PREFIX))
            self.assertEqual(store.read_manifest("items.ndjson"), {"kind": "demo", "content_hash": digest})
            self.assertEqual([line for line, _ in store.iter_lines("items.ndjson")], [2, 3])
            self.assertEqual(store.read_all("items.ndjson"), [{"x": 1}, {"x": 2}])
            self.assertEqual(store.read_all("missing.ndjson"), [])

    def test_invalid_json_reports_line(self) -> None:
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "broken.ndjson"
            path.write_text('{"x": 1}\n\n{"x": \n')
            store = NDJSONStore(Path(tmpdir))
            with self.assertRaises(RecordParseError) as ctx:
                list(store.iter_lines(path.name))
            self.assertEqual(ctx.exception.line, 3)

    def test_malformed_lines_can_be_collected(self) -> None:
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "broken.ndjson"
            path.write_text('{"x": 1}\n{"x": \n[2]\n{"x": 3}\n')
            problems: list[RecordParseError] = []
            records = list(NDJSONStore(Path(tmpdir)).iter_lines(path.name, problems=problems))
        self.assertEqual(records, [(1, {"x": 1}), (4, {"x": 3})])
        self.assertEqual([e.line for e in problems], [2, 3])


class LoggingTests(unittest.TestCase):
    def tearDown(self) -> None:
        logging.getLogger().handlers.clear()

    def test_setup_logging_writes_json_lines(self) -> None:
        with TemporaryDirectory() as tmpdir:
            log_file = setup_logging(Settings(output_root=Path(tmpdir)))
            logging.getLogger("cayley_learn.test").info("hello", extra={"extra_data": {"k": 1}})
            for handler in logging.getLogger().handlers:
                handler.flush()
            entries = [json.loads(line) for line in log_file.read_text().splitlines()]
            logging.getLogger().handlers.clear()
        self.assertEqual(log_file.parent, Path(tmpdir).resolve() / "logs")
        hello = [e for e in entries if e["message"] == "hello"]
        self.assertEqual(hello[0]["extra"], {"k": 1})
        self.assertEqual(hello[0]["logger"], "cayley_learn.test")

    def test_json_formatter_includes_exceptions(self) -> None:
        try:
            raise ValueError("boom")
        except ValueError:
            record = logging.LogRecord("x", logging.ERROR, __file__, 1, "failed", None, sys.exc_info())
        data = json.loads(JsonFormatter().format(record))
        self.assertIn("ValueError: boom", data["exception"])

    def test_recipe_loggers_tag_their_records(self) -> None:
        name = get_experiment_logger("cayley-n8").name
        record = logging.LogRecord(name, logging.INFO, __file__, 1, "started", None, None)
        data = json.loads(JsonFormatter().format(record))
        self.assertEqual(data["recipe"], "cayley-n8")
        self.assertNotIn("extra", data)


if __name__ == "__main__":
    unittest.main()
