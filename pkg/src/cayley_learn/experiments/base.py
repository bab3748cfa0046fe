"""
Abstract base class for experiments.

An experiment validates its prerequisites, executes, and always cleans up.
Failures surface as a failed ExperimentResult rather than an exception.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

from cayley_learn.config import Settings
from cayley_learn.core.logging import get_experiment_logger
from cayley_learn.core.schema import ExperimentResult


class Experiment(ABC):
    """
    Base class for every recipe run.

    Subclasses implement validate_prerequisites() and execute(); run() wraps
    them with logging, error capture and cleanup.
    """

    def __init__(self, name: str, version: int, settings: Settings, output_dir: Path, config: dict[str, Any]):
        """
        Args:
            name: Recipe name, also the logger suffix
            version: Recipe version
            settings: Application settings
            output_dir: Directory owned by this run
            config: Exact configuration, embedded in every result
        """
        self.name = name
        self.version = version
        self.settings = settings
        self.output_dir = Path(output_dir)
        self.config = config
        self.logger = get_experiment_logger(name)
        self.problems: list[str] = []

    @abstractmethod
    def validate_prerequisites(self) -> bool:
        """
        Check that the run can start.

        Problems found are appended to ``self.problems``.

        Returns:
            True if the experiment can run
        """

    @abstractmethod
    def execute(self) -> ExperimentResult:
        """Build data, train, evaluate and write the bundle."""

    def cleanup(self) -> None:
        """Called after execute() regardless of outcome (override if needed)."""

    def failed(self, errors: list[str]) -> ExperimentResult:
        return ExperimentResult(
            recipe=self.name,
            version=self.version,
            success=False,
            config=self.config,
            errors=errors,
        )

    def run(self) -> ExperimentResult:
        """Validate, execute and clean up."""
        self.logger.info(f"Starting experiment: {self.name} v{self.version}")

        if not self.validate_prerequisites():
            self.logger.error(f"Prerequisites failed for {self.name}: {self.problems}")
            return self.failed(self.problems or ["Prerequisites validation failed"])

        try:
            result = self.execute()
            self.logger.info(
                f"Experiment {self.name} completed: success={result.success}, records={result.records}"
            )
            return result
        except Exception as e:
            self.logger.exception(f"Experiment {self.name} failed with exception")
            return self.failed([f"{type(e).__name__}: {e}"])
        finally:
            try:
                self.cleanup()
            except Exception as e:
                self.logger.error(f"Cleanup failed: {e}")
