import json
import math
from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from autoreg.errors import ConfigError


class ARConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: float = Field(0.9, gt=-1.0, lt=1.0)
    burn_in: Optional[int] = Field(None, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def check_burn_in(self):
        minimum = self.min_burn_in(self.a)
        if self.burn_in is None:
            self.burn_in = minimum
        elif self.burn_in < minimum:
            raise ValueError(f"burn_in must be at least 10/(1-|a|) = {minimum} for a={self.a}")
        return self

    @staticmethod
    def min_burn_in(a: float) -> int:
        return int(math.ceil(10.0 / (1.0 - abs(a))))


class ExperimentConfig(BaseModel):
    """Sweep over N and SNR; each (N, SNR) cell is one scenario."""
    model_config = ConfigDict(extra="forbid")

    name: str = "experiment"
    L_star: int = Field(..., ge=1)
    L: int = Field(..., ge=1)
    a: float = Field(0.9, gt=-1.0, lt=1.0)
    burn_in: Optional[int] = Field(None, ge=0)
    decay_time: Optional[float] = Field(None, gt=0.0)
    impulse_seed: int = 0
    n_values: List[int] = Field(..., min_length=1)
    snr_db_values: List[float] = Field(..., min_length=1)
    realizations: int = Field(20, ge=1)
    alpha0: float = Field(0.5, gt=0.0)
    iters: int = Field(5, ge=0)
    rel_tol: float = Field(0.0, ge=0.0)
    oracle_grid_points: int = Field(200, ge=1)
    oracle_refine: bool = True
    seed: int = 0

    @field_validator("n_values")
    @classmethod
    def check_n_values(cls, v: List[int]) -> List[int]:
        bad = [n for n in v if n < 1]
        if bad:
            raise ValueError(f"every N must be >= 1, got {bad}")
        return v

    @model_validator(mode="after")
    def check_lengths(self):
        if self.L > self.L_star:
            raise ValueError(f"L={self.L} must not exceed L_star={self.L_star}")
        if self.burn_in is not None and self.burn_in < ARConfig.min_burn_in(self.a):
            raise ValueError(f"burn_in must be at least {ARConfig.min_burn_in(self.a)} for a={self.a}")
        return self

    @property
    def tau(self) -> float:
        return self.decay_time if self.decay_time is not None else self.L_star / 4.0

    def ar_config(self) -> ARConfig:
        return ARConfig(a=self.a, burn_in=self.burn_in, seed=self.seed)


def _violations(e: ValidationError) -> List[str]:
    out = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        out.append(f"{loc}: {err['msg']}")
    return out


def load_experiment_config(text: str, seed_override: Optional[int] = None) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("Config file is not valid JSON", [str(e)]) from e
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError("Invalid experiment config", _violations(e)) from e
    if seed_override is not None:
        cfg = cfg.model_copy(update={"seed": seed_override})
    return cfg


class FitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x: List[float] = Field(..., min_length=1)
    d: List[float] = Field(..., min_length=1)
    L: int = Field(..., ge=1)
    x_pre: Optional[List[float]] = None
    alpha0: float = Field(0.5, gt=0.0)
    iters: int = Field(5, ge=0)
    rel_tol: float = Field(1e-6, ge=0.0)

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.x) != len(self.d):
            raise ValueError(f"x and d differ in length ({len(self.x)} vs {len(self.d)})")
        if self.x_pre is not None and len(self.x_pre) != self.L - 1:
            raise ValueError(f"x_pre must hold L-1 = {self.L - 1} samples, got {len(self.x_pre)}")
        return self


class FitResponse(BaseModel):
    w_hat: List[float]
    alpha: float
    gamma: Optional[float] = None
    v_e: Optional[float] = None
    v_w: Optional[float] = None
    status: str
    alphas: List[float]
    zero_prehistory: bool


class ExperimentResponse(BaseModel):
    name: str
    floor_db: Optional[float] = None
    rows: List[Dict[str, Any]]
    summary: List[Dict[str, Any]]


class RunManifest(BaseModel):
    command: str
    config: Dict
    seed: Optional[int] = None
    version: str
    outputs: List[str]
    started_at: datetime
    duration_seconds: float
    notes: List[str] = []
