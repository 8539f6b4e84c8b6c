from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .analysis import (
    CORRELATION_LABELS,
    TOMOGRAPHY_SETTINGS,
    WITNESS_SETTINGS,
    setting_label,
)
from .noise import NoiseModel


def _validate_setting(v: str) -> str:
    try:
        return setting_label(v)
    except ValueError as e:
        raise ValueError(str(e)) from None


class SettingOutcome(BaseModel):
    """Coincidence counts of one two-photon measurement setting"""

    setting: str = Field(..., description="Axis pair such as ZZ, XY")
    counts: List[int] = Field(
        ..., min_length=4, max_length=4, description="Counts ordered pp, pm, mp, mm"
    )

    @field_validator("setting")
    @classmethod
    def validate_setting(cls, v: str) -> str:
        return _validate_setting(v)

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v: List[int]) -> List[int]:
        if any(c < 0 for c in v):
            raise ValueError("counts must be non-negative")
        return v

    @property
    def total(self) -> int:
        return int(sum(self.counts))


class CountRecord(SettingOutcome):
    """Counts of one setting together with how they were produced"""

    counts: Optional[List[int]] = Field(
        None, min_length=4, max_length=4, description="None in analytic mode"
    )
    probabilities: List[float] = Field(..., min_length=4, max_length=4)
    n_events: int = Field(..., ge=0)
    accidental_probability: float = Field(0.0, ge=0, le=1)
    seed: Optional[int] = Field(None, description="Sub-seed used for the draw")

    @field_validator("counts")
    @classmethod
    def validate_counts(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is None:
            return v
        if any(c < 0 for c in v):
            raise ValueError("counts must be non-negative")
        return v


def counts_table(records: List[SettingOutcome]) -> Dict[str, List[float]]:
    """Setting label -> counts, or probabilities for analytic records"""
    table: Dict[str, List[float]] = {}
    for record in records:
        counts = record.counts
        if counts is None and isinstance(record, CountRecord):
            counts = record.probabilities
        table[record.setting] = list(counts)
    return table


class ComplexGrid(BaseModel):
    """Complex matrix as separate real and imaginary grids"""

    real: List[List[float]]
    imag: List[List[float]]

    @classmethod
    def from_array(cls, m: np.ndarray, decimals: int = 12) -> "ComplexGrid":
        m = np.asarray(m, dtype=complex)
        # round so that serialized reports do not depend on last-bit noise
        real = np.round(m.real, decimals) + 0.0
        imag = np.round(m.imag, decimals) + 0.0
        return cls(real=real.tolist(), imag=imag.tolist())

    def to_array(self) -> np.ndarray:
        return np.array(self.real) + 1j * np.array(self.imag)


class TomographyResult(BaseModel):
    correlations: Dict[str, float] = Field(
        ..., description="<sigma_i x sigma_j> of the reconstructed state"
    )
    stderr: Dict[str, float] = Field(..., description="Bootstrap standard errors")
    measured_correlations: Dict[str, float]
    measured_stderr: Dict[str, float]
    rho: ComplexGrid
    concurrence: float = Field(..., ge=0, le=1)
    concurrence_argument: float
    concurrence_stderr: Optional[float] = None
    linear_rho: ComplexGrid
    linear_is_physical: bool
    linear_min_eigenvalue: float
    linear_concurrence_argument: float
    log_likelihood: float
    linear_log_likelihood: float
    iterations: int
    gradient_norm: float
    bootstrap_resamples: int
    seed: Optional[int] = None

    @model_validator(mode="after")
    def check_correlations(self) -> "TomographyResult":
        if set(self.correlations) != set(CORRELATION_LABELS):
            raise ValueError("correlations must cover all 16 Pauli pairs")
        if abs(self.correlations["II"] - 1.0) > 1e-9:
            raise ValueError("<II> must be 1")
        if any(abs(v) > 1 + 1e-9 for v in self.correlations.values()):
            raise ValueError("correlations of a physical state are bounded by 1")
        return self


class StageModel(BaseModel):
    targets: List[int]
    pattern: str
    outcome: str
    visibility: float
    probability: float


class ExperimentPreset(BaseModel):
    """Named scenario: chain, noise, counting statistics and estimators"""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, max_length=64)
    description: str = ""
    n_pairs: int = Field(3, ge=2, le=8)
    noise: NoiseModel = Field(default_factory=NoiseModel)
    patterns: Optional[List[str]] = Field(
        None, description="Detector pattern per BSM, default ++ everywhere"
    )
    swap: bool = Field(True, description="False analyses photons 1 and 2n without BSMs")
    events_per_setting: Optional[int] = Field(None, ge=0)
    rate_per_hour: Optional[float] = Field(
        None, gt=0, description="Accepted two-fold events per hour and setting"
    )
    duration_hours: Optional[float] = Field(None, gt=0)
    sixfold_rate_per_minute: Optional[float] = Field(
        None, gt=0, description="Raw six-fold rate before BSM post-selection"
    )
    spurious_events: Optional[float] = Field(
        None, ge=0, description="Double-pair accidentals per integration window"
    )
    settings: List[str] = Field(default_factory=lambda: ["ZZ", "XX", "YY"])
    tomography: bool = False
    analytic: bool = False
    seed: int = 0

    @field_validator("settings")
    @classmethod
    def validate_settings(cls, v: List[str]) -> List[str]:
        labels = [_validate_setting(s) for s in v]
        if len(set(labels)) != len(labels):
            raise ValueError("settings must be unique")
        if not labels:
            raise ValueError("at least one setting is required")
        missing = [s for s in WITNESS_SETTINGS if s not in labels]
        if missing:
            raise ValueError(f"witness settings missing: {', '.join(missing)}")
        return labels

    @model_validator(mode="after")
    def check_statistics(self) -> "ExperimentPreset":
        if self.events_per_setting is None and (
            self.rate_per_hour is None or self.duration_hours is None
        ):
            raise ValueError(
                "either events_per_setting or rate_per_hour and duration_hours is required"
            )
        if self.patterns is not None and len(self.patterns) != self.n_pairs - 1:
            raise ValueError(f"{self.n_pairs} pairs need {self.n_pairs - 1} patterns")
        if self.tomography and not set(TOMOGRAPHY_SETTINGS) <= set(self.settings):
            raise ValueError("tomography needs all nine Pauli settings")
        return self

    @property
    def n_events(self) -> int:
        if self.events_per_setting is not None:
            return self.events_per_setting
        return int(round(self.rate_per_hour * self.duration_hours))


class RunConfig(BaseModel):
    """Everything needed to reproduce a run; embedded in every report"""

    model_config = ConfigDict(extra="forbid")

    preset: str = Field("ideal", min_length=1)
    seed: Optional[int] = Field(None, ge=0)
    events_per_setting: Optional[int] = Field(None, ge=0)
    analytic: Optional[bool] = None
    tomography: Optional[bool] = None
    n_pairs: Optional[int] = Field(None, ge=2, le=8)
    noise: Optional[NoiseModel] = None
    bootstrap: Optional[int] = Field(None, ge=0)
    format: Literal["json", "csv"] = "json"
    out: Optional[str] = None
    verbosity: Optional[Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]] = None

    @field_validator("verbosity", mode="before")
    @classmethod
    def upper_verbosity(cls, v: Optional[str]) -> Optional[str]:
        return v.upper() if isinstance(v, str) else v


class RunReport(BaseModel):
    config: RunConfig
    preset: ExperimentPreset
    generator: str
    seed: int
    n_pairs: int
    counts: List[CountRecord]
    witness: float
    witness_stderr: float
    witness_analytic: float
    success_probability: float
    heralded_trials: Optional[int] = None
    heralded_events: Optional[int] = None
    heralded_fraction: Optional[float] = None
    stages: List[StageModel]
    final_kind: Optional[str] = Field(None, description="Bell state before frame correction")
    final_state: ComplexGrid
    concurrence: float
    tomography: Optional[TomographyResult] = None
    notes: List[str] = Field(default_factory=list)
    elapsed_seconds: Optional[float] = Field(None, exclude=True)


class SweepRow(BaseModel):
    value: float
    witness: float
    stderr: float
    success_probability: float
    concurrence: float


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: Literal["visibility", "source_whiteness", "background_fraction", "n_pairs"]
    grid: List[float] = Field(..., min_length=1)
    preset: str = "ideal"
    analytic: Optional[bool] = None
    seed: Optional[int] = Field(None, ge=0)

    @field_validator("parameter", mode="before")
    @classmethod
    def normalize_parameter(cls, v: str) -> str:
        return v.replace("-", "_").lower() if isinstance(v, str) else v

    @model_validator(mode="after")
    def check_grid(self) -> "SweepConfig":
        if self.parameter == "n_pairs":
            if any(v != int(v) or v < 2 or v > 8 for v in self.grid):
                raise ValueError("n_pairs grid values must be integers in [2, 8]")
        elif any(v < 0 or v > 1 for v in self.grid):
            raise ValueError(f"{self.parameter} grid values must be in [0, 1]")
        return self


class SweepReport(BaseModel):
    config: SweepConfig
    generator: str
    seed: int
    rows: List[SweepRow]
