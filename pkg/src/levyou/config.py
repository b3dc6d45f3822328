"""Experiment configuration: one TOML file per run, validated strictly.

Unknown keys are rejected and numeric ranges are checked at parse time.
Command-line overrides are dotted ``key=value`` pairs whose values are read as
TOML literals (falling back to plain strings).
"""
from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigurationError
from .measures import load_table
from .model import DiagonalModel, coefficients_from_dict

SCHEMA_VERSION = 1


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SequenceCfg(Strict):
    kind: Literal["power", "geometric", "table"]
    coef: float = 1.0
    power: Optional[float] = None
    ratio: Optional[float] = Field(default=None, gt=0)
    values: Optional[list[float]] = None
    fill: Optional[float] = 0.0

    @model_validator(mode="after")
    def _fields(self):
        need = {"power": "power", "geometric": "ratio", "table": "values"}[self.kind]
        if getattr(self, need) is None:
            raise ValueError(f"kind={self.kind!r} needs {need!r}")
        return self

    def build(self):
        d = self.model_dump(exclude_none=False)
        return coefficients_from_dict(d)


class ModelCfg(Strict):
    alpha: Optional[float] = Field(default=None, gt=0, lt=2)
    measure_table: Optional[str] = None
    gamma: SequenceCfg
    sigma: SequenceCfg
    z: SequenceCfg
    horizon: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _one_measure(self):
        if (self.alpha is None) == (self.measure_table is None):
            raise ValueError("give exactly one of alpha or measure_table")
        return self

    def build(self, base: Path | None = None) -> DiagonalModel:
        from .measures import StableMeasure
        if self.alpha is not None:
            measure = StableMeasure(self.alpha)
        else:
            p = Path(self.measure_table)
            measure = load_table(p if p.is_absolute() or base is None else base / p)
        return DiagonalModel(self.gamma.build(), self.sigma.build(), self.z.build(), measure,
                             self.horizon, "config")


class GridCfg(Strict):
    start: Optional[float] = Field(default=None, ge=0)
    stop: Optional[float] = Field(default=None, gt=0)
    num: Optional[int] = Field(default=None, ge=1, le=100_000)
    points: Optional[list[float]] = None

    @model_validator(mode="after")
    def _shape(self):
        ranged = None not in (self.start, self.stop, self.num)
        if ranged == (self.points is not None):
            raise ValueError("give either start/stop/num or points")
        return self

    def build(self):
        import numpy as np
        if self.points is not None:
            return np.asarray(self.points, dtype=float)
        return np.linspace(self.start, self.stop, self.num)


class SimulateCfg(Strict):
    delta: float = Field(gt=0)
    n_max: int = Field(ge=1, le=10**6)
    epsilon: Optional[float] = Field(default=None, gt=0)
    reps: int = Field(ge=1, le=10**6)
    grid: GridCfg
    ecf_thetas: list[float] = [0.5, 1.0, 2.0]
    write_paths: bool = True


class CriteriaCfg(Strict):
    epsilon: float = Field(default=1.0, gt=0)


class MaxJumpCfg(Strict):
    b: float = Field(default=1.0, gt=0)
    u_grid: GridCfg
    reps: int = Field(default=10**4, ge=1000)
    delta: Optional[float] = Field(default=None, gt=0)


class LargeCountCfg(Strict):
    epsilon: float = Field(default=1.0, gt=0)
    n_max_grid: list[int]
    reps: int = Field(default=10**4, ge=1000)


class VerifyJumpsCfg(Strict):
    max_jump: Optional[MaxJumpCfg] = None
    large_count: Optional[LargeCountCfg] = None


class VerifySupCfg(Strict):
    epsilon: float = Field(default=1.0, gt=0)
    windows: list[tuple[int, int]]
    reps: int = Field(default=10**4, ge=1000)
    delta: Optional[float] = Field(default=None, gt=0)
    c_cal: Optional[float] = Field(default=None, gt=0)
    grid_size: int = Field(default=1025, ge=2, le=100_000)


class VerifyMarginalCfg(Strict):
    alphas: list[float]
    t: float = Field(default=1.0, gt=0)
    delta: Optional[float] = Field(default=None, gt=0)
    reps: int = Field(default=10**4, ge=10**4)
    small_jumps: Literal["discard", "gaussian"] = "discard"


class DensityCfg(Strict):
    kind: Literal["power"] = "power"
    k: float = Field(default=0.0, gt=-1)


class IntervalCfg(Strict):
    kind: Literal["interval"]
    lo: float
    hi: float
    density: Optional[DensityCfg] = None


class DiscreteCfg(Strict):
    kind: Literal["discrete"]
    points: list[float]
    weights: list[float]


class KernelCfg(Strict):
    name: str
    params: dict[str, float] = {}


class StableIntegralCfg(Strict):
    alpha: float = Field(gt=0, lt=2)
    domain: Union[IntervalCfg, DiscreteCfg] = Field(discriminator="kind")
    kernel: KernelCfg
    delta: float = Field(gt=0)
    reps: int = Field(ge=1, le=10**6)
    grid: GridCfg
    subdomain: Optional[tuple[float, float]] = None
    threshold: float = Field(default=1.0, gt=0)
    write_paths: bool = True
    levy_suite: bool = False
    refinement: bool = False
    ecf_thetas: list[float] = [0.5, 1.0, 2.0]


class CalibrateCfg(Strict):
    kinds: list[Literal["sup_bound", "ou_refinement", "integral_refinement"]] = [
        "sup_bound", "ou_refinement", "integral_refinement"]
    reps: int = Field(default=10**4, ge=1000)
    epsilon: float = Field(default=1.0, gt=0)


class ExperimentConfig(Strict):
    schema_version: Literal[1]
    seed: int = Field(ge=0, lt=2**64)
    output_dir: Optional[str] = None
    model: Optional[ModelCfg] = None
    simulate: Optional[SimulateCfg] = None
    criteria: Optional[CriteriaCfg] = None
    verify_jumps: Optional[VerifyJumpsCfg] = None
    verify_supbound: Optional[VerifySupCfg] = None
    verify_marginal: Optional[VerifyMarginalCfg] = None
    stable_integral: Optional[StableIntegralCfg] = None
    calibrate: Optional[CalibrateCfg] = None

    def canonical(self) -> dict:
        """Everything that determines the outputs (the output location does not)."""
        return self.model_dump(mode="json", exclude={"output_dir"}, exclude_none=True)

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"override {item!r} is not key=value")
        parts = key.strip().split(".")
        node = data
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigurationError(f"override {key!r}: {p!r} is not a table")
        node[parts[-1]] = _parse_value(value.strip())
    return data


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {loc}: {e['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def parse_config(text: str, overrides: list[str] | None = None) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"config is not valid TOML: {e}") from None
    data = apply_overrides(data, overrides or [])
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_format_errors(e)) from None


def load_config(path, overrides: list[str] | None = None) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file {p} not found")
    return parse_config(p.read_text(), overrides)
