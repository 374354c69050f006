"""Experiment configuration (JSON, versioned, unknown keys rejected)."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

SCHEMA_VERSION = 1
DEFAULT_GAMMA_GRID = [math.pi / 12, math.pi / 6, math.pi / 4, math.pi / 3, 5 * math.pi / 12]


class ConfigError(ValueError):
    """Configuration is malformed; the message names the offending field paths."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class BlobsSpec(_Strict):
    kind: Literal["blobs"] = "blobs"
    n_per_class: int = Field(1000, gt=0)
    n_classes: int = Field(3, gt=1)
    n_features: int = Field(2, gt=0)
    spread: float = Field(0.35, ge=0)
    seed: int = Field(0, ge=0)
    test_n_per_class: int = Field(300, gt=0)
    test_seed: int = Field(10_001, ge=0)

    @model_validator(mode="after")
    def _distinct_seeds(self):
        if self.seed == self.test_seed:
            raise ValueError("test_seed must differ from seed so test data is an independent draw")
        return self


class CsvSpec(_Strict):
    kind: Literal["csv"]
    train_path: str
    test_path: str
    header: bool = False


class ArchSpec(_Strict):
    layer_widths: list[int] = [2, 32, 3]
    activation: Literal["relu", "tanh"] = "relu"

    @field_validator("layer_widths")
    @classmethod
    def _widths(cls, v):
        if len(v) < 2 or any(w <= 0 for w in v):
            raise ValueError("need at least two positive widths")
        return v


class TrainSpec(_Strict):
    eta: float = Field(0.1, gt=0)
    epochs: int = Field(100, ge=1)
    batch_size: int = Field(32, ge=1)


class RandomScenario(_Strict):
    kind: Literal["random"] = "random"
    fraction: float = Field(0.1, gt=0, lt=1)


class ClasswiseScenario(_Strict):
    kind: Literal["classwise"]
    class_index: int = Field(0, ge=0)


class UnlearnSpec(_Strict):
    eta: float = Field(0.01, gt=0)
    epochs: int = Field(10, ge=1)
    gamma: float = Field(math.pi / 3, ge=0, le=math.pi / 2)
    batch_size: int = Field(32, ge=1)


class GaSpec(_Strict):
    eta: float = Field(0.1, gt=0)
    epochs: int = Field(5, ge=1)
    batch_size: int = Field(32, ge=1)


class CurriculumSpec(_Strict):
    measure: Literal["confidence", "loss"] = "confidence"
    strategy: Literal["equal_size", "quantile"] = "equal_size"
    n_criteria: int = Field(2, ge=1)
    histogram_bins: int = Field(20, ge=1)


class AttackSpec(_Strict):
    eta: float = Field(0.1, gt=0)
    epochs: int = Field(30, ge=1)


class SweepSpec(_Strict):
    parameter: Literal["gamma", "n_criteria", "forget_fraction"]
    values: list[float] = Field(min_length=1)


Method = Literal["retrain", "ft", "ga", "ufg", "cufg"]


class ExperimentConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    dataset: Annotated[Union[BlobsSpec, CsvSpec], Field(discriminator="kind")] = BlobsSpec()
    architecture: ArchSpec = ArchSpec()
    train: TrainSpec = TrainSpec()
    scenario: Annotated[Union[RandomScenario, ClasswiseScenario], Field(discriminator="kind")] = RandomScenario()
    methods: list[Method] = Field(default_factory=lambda: ["ft", "ga", "ufg", "cufg"], min_length=1)
    unlearn: UnlearnSpec = UnlearnSpec()
    ga: GaSpec = GaSpec()
    curriculum: CurriculumSpec = CurriculumSpec()
    attack: AttackSpec = AttackSpec()
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    output_dir: str = "out"
    sweep: Optional[SweepSpec] = None

    @field_validator("methods")
    @classmethod
    def _unique_methods(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("methods must not repeat")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, v):
        if any(s < 0 for s in v) or len(set(v)) != len(v):
            raise ValueError("seeds must be distinct non-negative integers")
        return v

    @model_validator(mode="after")
    def _consistency(self):
        if "cufg" in self.methods and self.unlearn.epochs % self.curriculum.n_criteria:
            raise ValueError(
                f"unlearn.epochs ({self.unlearn.epochs}) must be divisible by "
                f"curriculum.n_criteria ({self.curriculum.n_criteria})"
            )
        return self

    @property
    def unlearning_methods(self) -> list[str]:
        """Requested methods in run order, without the implicit Retrain reference."""
        return [m for m in self.methods if m != "retrain"]

    def with_updates(self, **changes) -> "ExperimentConfig":
        """Copy with dotted-path overrides, revalidated (``{"unlearn.gamma": 0.5}`` style)."""
        data = self.model_dump()
        for path, value in changes.items():
            node = data
            keys = path.split(".")
            for k in keys[:-1]:
                node = node[k]
            node[keys[-1]] = value
        return parse_config(data)


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return parse_config(data)
