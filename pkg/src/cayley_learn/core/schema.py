"""
Pydantic schema definitions for records, manifests, configs and reports.

Every NDJSON line and every YAML config passes through one of these models.
"""

from datetime import datetime
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TaskName = Literal[
    "cayley",
    "simplicity",
    "subgroups",
    "group-iso",
    "ring-match",
]


# === Table Records ===


class TableRecord(BaseModel):
    """One line of a group table / Latin square NDJSON file."""

    n: int = Field(..., ge=1, description="Table order")
    table: list[int] = Field(..., description="Row-major n*n entries over 1..n")
    name: Optional[str] = Field(default=None, description="Human-readable group name")

    @model_validator(mode="after")
    def validate_length(self) -> "TableRecord":
        """Ensure the flat table holds exactly n*n entries."""
        if len(self.table) != self.n * self.n:
            raise ValueError(f"table has {len(self.table)} entries, expected {self.n * self.n}")
        return self


class RingRecord(BaseModel):
    """One line of a ring NDJSON file."""

    n: int = Field(..., ge=1, description="Ring size")
    moduli: list[int] = Field(..., min_length=1, description="Cyclic factors n_1..n_k")
    mult: list[int] = Field(..., description="Row-major multiplication table")
    add: list[int] = Field(..., description="Row-major addition table")

    @model_validator(mode="after")
    def validate_shapes(self) -> "RingRecord":
        """Check table lengths and that the moduli multiply to n."""
        size = self.n * self.n
        if len(self.mult) != size or len(self.add) != size:
            raise ValueError(f"mult/add must each hold {size} entries")
        product = 1
        for m in self.moduli:
            if m < 1:
                raise ValueError("moduli must be >= 1")
            product *= m
        if product != self.n:
            raise ValueError(f"moduli multiply to {product}, not n={self.n}")
        return self


# === Dataset Records ===


class RecordMetaModel(BaseModel):
    source: str = Field(..., description="Name of the source structure")
    seed: int = Field(..., description="Seed that produced the record")
    delta: int = Field(default=0, ge=0, description="Entry shift applied to the live block")
    perm_id: int = Field(default=0, ge=0, description="Index of the permutation within its source")
    extra: dict[str, Any] = Field(default_factory=dict, description="Builder-specific metadata")


class DatasetRecordModel(BaseModel):
    """One labelled record: a live table (or a pair of them) and its label."""

    id: int = Field(..., ge=0, description="Position in the builder's output")
    x: list = Field(..., description="m x m table, or [mult, add] pair of m x m tables")
    n: int = Field(..., ge=1, description="Live (unpadded) size m")
    label: int = Field(..., ge=0, description="Class label in 0..K")
    meta: RecordMetaModel


class DatasetManifest(BaseModel):
    """First line of a dataset file, written after the ``#!manifest`` marker."""

    format_version: int = Field(default=1, description="Dataset file format version")
    builder: str = Field(..., description="Builder that produced the records")
    task: TaskName = Field(..., description="Labelling task")
    part: Literal["all", "train", "valid"] = Field(default="all", description="Which half of a split")
    config: dict[str, Any] = Field(default_factory=dict, description="Full builder configuration")
    n_max: int = Field(..., ge=1, description="Padded dimension")
    K: int = Field(..., ge=1, description="Largest label")
    pair: bool = Field(default=False, description="Records hold (mult, add) pairs")
    count: int = Field(..., ge=0, description="Number of records")
    label_counts: dict[str, int] = Field(default_factory=dict, description="Records per label")
    oracle_sample_rate: float = Field(default=0.01, ge=0.0, le=1.0, description="Oracle re-check rate")
    corpus: list[str] = Field(default_factory=list, description="Source structures used")
    content_hash: Optional[str] = Field(default=None, description="sha256 of the record lines")


# === Experiment Configuration ===


class TrainerConfig(BaseModel):
    """Classifier choice and hyperparameters."""

    model_config = ConfigDict(extra="forbid")

    model: Literal["linear", "mlp"] = Field(default="linear", description="Classifier family")
    encoding: Literal["one-hot", "scaled-integer"] = Field(default="one-hot", description="Feature scheme")
    max_symbol: Optional[int] = Field(default=None, ge=1, description="Largest table entry (default: from data)")
    lam: float = Field(default=1e-4, gt=0, description="L2 regularisation strength")
    epochs: int = Field(default=10, ge=0, description="Passes over the training set")
    project: bool = Field(default=True, description="Project linear weights onto the 1/sqrt(lam) ball")
    hidden: list[int] = Field(default_factory=lambda: [64], description="MLP hidden layer sizes")
    learning_rate: float = Field(default=0.5, gt=0, description="MLP step size")
    momentum: float = Field(default=0.9, ge=0, lt=1, description="MLP momentum")
    batch_size: int = Field(default=32, ge=1, description="MLP mini-batch size")
    loss: Literal["mse", "cross-entropy"] = Field(default="mse", description="MLP loss")
    seed: int = Field(default=0, description="Initialisation and shuffling seed")

    @field_validator("hidden")
    @classmethod
    def validate_hidden(cls, v: list[int]) -> list[int]:
        """Every hidden layer needs at least one unit."""
        if any(size < 1 for size in v):
            raise ValueError("hidden layer sizes must be >= 1")
        return v


class EvaluationConfig(BaseModel):
    """How training/validation sets are drawn and how often."""

    model_config = ConfigDict(extra="forbid")

    protocol: Literal["split", "fixed"] = Field(
        default="split", description="split: random gamma-splits of one dataset; fixed: fixed validation set"
    )
    gamma: Optional[float] = Field(default=None, gt=0, le=1, description="Training fraction")
    train_size: Optional[int] = Field(default=None, ge=1, description="Absolute training size")
    repeats: int = Field(default=5, ge=1, description="Seeded repeats per setting")
    curve_gammas: list[float] = Field(default_factory=list, description="Learning-curve gamma grid")
    curve_sizes: list[int] = Field(default_factory=list, description="Learning-curve training sizes")
    seed: int = Field(default=0, description="Base seed for splits")

    @model_validator(mode="after")
    def validate_size(self) -> "EvaluationConfig":
        """Exactly one of gamma / train_size sets the main training size."""
        if self.gamma is None and self.train_size is None:
            raise ValueError("one of gamma or train_size is required")
        if self.gamma is not None and self.train_size is not None:
            raise ValueError("gamma and train_size are mutually exclusive")
        for g in self.curve_gammas:
            if not 0 < g < 1:
                raise ValueError(f"curve gamma {g} outside (0, 1)")
        return self


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce one recipe run."""

    model_config = ConfigDict(extra="forbid")

    recipe: str = Field(..., min_length=1, description="Registered recipe name")
    version: int = Field(default=1, ge=1, description="Recipe version")
    builder: str = Field(..., description="Dataset builder name")
    dataset: dict[str, Any] = Field(default_factory=dict, description="Builder parameters")
    trainer: TrainerConfig = Field(default_factory=TrainerConfig)
    evaluation: EvaluationConfig
    output_dir: Optional[Path] = Field(default=None, description="Bundle directory")


# === Reports ===


class RunRow(BaseModel):
    """One (task, gamma, repeat) cell of a run."""

    task: str
    gamma: float = Field(..., gt=0, le=1)
    repeat: int = Field(..., ge=0)
    seed: int
    train_size: int = Field(..., ge=0)
    valid_size: int = Field(..., ge=0)
    accuracy: Optional[float] = None
    phi: Optional[float] = None
    f1: Optional[float] = None
    predicted_one: Optional[float] = Field(default=None, description="Fraction of validation predicted 1")


class CurveSummary(BaseModel):
    """Mean and sample standard deviation of each metric at one gamma."""

    task: str
    gamma: float
    repeats: int = Field(..., ge=1)
    accuracy_mean: Optional[float] = None
    accuracy_std: Optional[float] = None
    phi_mean: Optional[float] = None
    phi_std: Optional[float] = None
    f1_mean: Optional[float] = None
    f1_std: Optional[float] = None
    predicted_one_mean: Optional[float] = None
    predicted_one_std: Optional[float] = None


class TargetCheck(BaseModel):
    """Achieved value of one metric against its published number and acceptance band."""

    metric: str
    achieved: Optional[float]
    achieved_std: Optional[float] = None
    published_mean: Optional[float] = None
    published_std: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    passed: Optional[bool] = Field(default=None, description="None when no band applies or value undefined")


class ExperimentResult(BaseModel):
    """Summary written to summary.json."""

    recipe: str
    version: int
    success: bool
    config: dict[str, Any]
    manifest_hash: Optional[str] = None
    records: int = 0
    corpus: list[str] = Field(default_factory=list)
    checks: list[TargetCheck] = Field(default_factory=list)
    citation: Optional[str] = None
    errors: list[str] = Field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.success and all(c.passed is not False for c in self.checks)


class RunInfo(BaseModel):
    """Sidecar holding the only non-deterministic facts of a run."""

    recipe: str
    started_at: datetime
    finished_at: datetime
    duration_seconds: float = Field(..., ge=0)
    log_file: Optional[str] = None
    package_version: str
