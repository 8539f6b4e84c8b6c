"""Phenomenological noise: white-noise sources, double-pair background, dark counts."""

from typing import List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import InvalidInputError
from .hilbert import DensityMatrix, QubitRegister, as_matrix
from .states import BellKind, bell_projector


PerStage = Union[float, List[float]]


def _as_list(values: PerStage) -> List[float]:
    return list(values) if isinstance(values, list) else [values]


def _check_unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{name} must be in [0, 1], got {value}")
    return float(value)


class NoiseModel(BaseModel):
    """Imperfections of a swapping chain.

    `source_whiteness` and `bsm_visibility` accept a single shared value or one
    value per source / per BSM.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    source_whiteness: PerStage = Field(
        0.0, description="Maximally mixed admixture per source"
    )
    bsm_visibility: PerStage = Field(
        1.0, description="Two-photon interference visibility per BSM"
    )
    background_fraction: float = Field(
        0.0, ge=0, le=1, description="Accidental six-folds as fraction of accepted events"
    )
    dark_count_prob: float = Field(
        0.0, ge=0, le=1, description="Dark-count probability per detector and window"
    )

    @field_validator("source_whiteness", "bsm_visibility")
    @classmethod
    def validate_unit_interval(cls, v: PerStage) -> PerStage:
        values = v if isinstance(v, list) else [v]
        if isinstance(v, list) and not v:
            raise ValueError("per-stage list must not be empty")
        for value in values:
            if value < 0 or value > 1:
                raise ValueError("values must be between 0 and 1")
        return v

    @staticmethod
    def _pick(values: PerStage, index: int, what: str) -> float:
        if not isinstance(values, list):
            return float(values)
        if index >= len(values):
            raise InvalidInputError(
                f"{what}: {len(values)} values given, stage {index + 1} requested"
            )
        return float(values[index])

    def whiteness_for(self, source: int) -> float:
        return self._pick(self.source_whiteness, source, "source_whiteness")

    def visibility_for(self, stage: int) -> float:
        return self._pick(self.bsm_visibility, stage, "bsm_visibility")

    def visibilities(self, n_stages: int) -> List[float]:
        return [self.visibility_for(k) for k in range(n_stages)]

    def whitenesses(self, n_sources: int) -> List[float]:
        return [self.whiteness_for(k) for k in range(n_sources)]

    @property
    def is_ideal(self) -> bool:
        return (
            all(w == 0 for w in _as_list(self.source_whiteness))
            and all(v == 1 for v in _as_list(self.bsm_visibility))
            and self.background_fraction == 0
            and self.dark_count_prob == 0
        )


def werner(p: float) -> DensityMatrix:
    """p |Psi-><Psi-| + (1 - p) I/4"""
    p = _check_unit("werner: p", p)
    matrix = p * bell_projector(BellKind.PSI_MINUS) + (1 - p) * np.eye(4) / 4
    return DensityMatrix(matrix)


def mix_white(rho: DensityMatrix, w: float) -> DensityMatrix:
    """(1 - w) rho + w I/dim"""
    w = _check_unit("mix_white: w", w)
    m = as_matrix(rho)
    dim = m.shape[0]
    register = rho.register if isinstance(rho, DensityMatrix) else None
    return DensityMatrix((1 - w) * m + w * np.eye(dim) / dim, register)


def add_background(rho: DensityMatrix, f: float) -> DensityMatrix:
    """Admix polarization-uncorrelated accidental events at the analysis stage"""
    f = _check_unit("add_background: f", f)
    if as_matrix(rho).shape != (4, 4):
        raise InvalidInputError("add_background acts on the final two-photon state")
    return mix_white(rho, f)


def source_state(whiteness: float, labels=(1, 2)) -> DensityMatrix:
    """State emitted by one noisy singlet source"""
    return mix_white(
        DensityMatrix(bell_projector(BellKind.PSI_MINUS), QubitRegister(tuple(labels))),
        whiteness,
    )


def accidental_probability(dark_count_prob: float) -> float:
    """Chance that a two-fold analysis event is triggered by a dark count"""
    d = _check_unit("dark_count_prob", dark_count_prob)
    return 1.0 - (1.0 - d) ** 2
