"""Entanglement certification of the final photon pair.

Settings are pairs of Pauli axes. Outcomes of a setting are ordered
(pp, pm, mp, mm), where p/m is the +1/-1 eigenvector of the axis:
Z -> H/V, X -> +/-, Y -> L/R.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .errors import InvalidInputError
from .hilbert import MatrixLike, as_matrix, eigh, expect, psd_sqrt
from .states import Axis, Polarization, as_axis, eigenbasis, ket_vector, pauli, pauli_basis

OUTCOME_LABELS: Tuple[str, ...] = ("pp", "pm", "mp", "mm")
PAULI_LABELS: Tuple[str, ...] = ("I", "X", "Y", "Z")
CORRELATION_LABELS: Tuple[str, ...] = tuple(
    a + b for a in PAULI_LABELS for b in PAULI_LABELS
)
WITNESS_SETTINGS: Tuple[str, ...] = ("ZZ", "XX", "YY")
TOMOGRAPHY_SETTINGS: Tuple[str, ...] = tuple(
    a + b for a in ("Z", "X", "Y") for b in ("Z", "X", "Y")
)

Setting = Union[str, Tuple[Union[Axis, str], Union[Axis, str]]]


def setting_label(setting: Setting) -> str:
    """Canonical two-letter label such as "ZX" """
    if isinstance(setting, str):
        text = setting.strip().upper()
        if len(text) != 2:
            raise InvalidInputError(f"Invalid measurement setting: {setting!r}")
        first, second = text
    else:
        try:
            first, second = setting
        except (TypeError, ValueError):
            raise InvalidInputError(f"Invalid measurement setting: {setting!r}") from None
    return as_axis(first).value + as_axis(second).value


@dataclass(frozen=True)
class WitnessOperator:
    """W = ½(|HH><HH| + |VV><VV| + |++><++| + |--><--| - |RL><RL| - |LR><LR|)"""

    matrix: np.ndarray
    terms: Tuple[Tuple[float, Tuple[Polarization, Polarization]], ...]
    prefactor: float = 0.5


_WITNESS_TERMS = (
    (+1.0, (Polarization.H, Polarization.H)),
    (+1.0, (Polarization.V, Polarization.V)),
    (+1.0, (Polarization.PLUS, Polarization.PLUS)),
    (+1.0, (Polarization.MINUS, Polarization.MINUS)),
    (-1.0, (Polarization.R, Polarization.L)),
    (-1.0, (Polarization.L, Polarization.R)),
)

# Coefficient of each outcome fraction in the witness, per setting
_WITNESS_WEIGHTS: Dict[str, np.ndarray] = {
    "ZZ": np.array([1.0, 0.0, 0.0, 1.0]),
    "XX": np.array([1.0, 0.0, 0.0, 1.0]),
    "YY": np.array([0.0, -1.0, -1.0, 0.0]),
}


def product_projector(first: Polarization, second: Polarization) -> np.ndarray:
    vec = np.kron(ket_vector(first), ket_vector(second))
    return np.outer(vec, vec.conj())


def witness_operator() -> WitnessOperator:
    matrix = sum(sign * product_projector(*pair) for sign, pair in _WITNESS_TERMS)
    matrix = 0.5 * matrix
    matrix.setflags(write=False)
    return WitnessOperator(matrix=matrix, terms=_WITNESS_TERMS)


_W = witness_operator()


def witness_value(rho: MatrixLike) -> float:
    """Tr(rho W); negative values certify entanglement"""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise InvalidInputError(f"witness_value needs a two-qubit state, got {m.shape}")
    return expect(m, _W.matrix)


def setting_projectors(setting: Setting) -> List[np.ndarray]:
    """Product projectors of the four outcomes (pp, pm, mp, mm)"""
    label = setting_label(setting)
    first, second = (eigenbasis(axis) for axis in label)
    return [product_projector(a, b) for a, b in itertools.product(first, second)]


def outcome_probabilities(rho: MatrixLike, setting: Setting) -> np.ndarray:
    m = as_matrix(rho)
    return np.array([expect(m, proj) for proj in setting_projectors(setting)])


def _fractions(counts: Sequence[float], label: str) -> Tuple[np.ndarray, float]:
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (4,) or np.any(counts < 0) or not np.all(np.isfinite(counts)):
        raise InvalidInputError(f"Setting {label}: counts must be 4 non-negative numbers")
    total = counts.sum()
    if total <= 0:
        raise InvalidInputError(f"Setting {label} has no recorded events")
    return counts / total, total


def _witness_terms(
    table: Mapping[str, Sequence[float]]
) -> Iterable[Tuple[np.ndarray, np.ndarray, float]]:
    for label in WITNESS_SETTINGS:
        if label not in table:
            raise InvalidInputError(f"Witness needs setting {label}")
        fractions, total = _fractions(table[label], label)
        yield _WITNESS_WEIGHTS[label], fractions, total


def witness_from_counts(table: Mapping[str, Sequence[float]]) -> Tuple[float, float]:
    """Witness estimate and multinomial standard error from ZZ, XX, YY counts"""
    value = 0.0
    variance = 0.0
    for weights, fractions, total in _witness_terms(table):
        mean = float(weights @ fractions)
        value += 0.5 * mean
        spread = float((weights**2) @ fractions) - mean**2
        variance += 0.25 * max(spread, 0.0) / total
    return value, float(np.sqrt(variance))


def witness_from_probabilities(table: Mapping[str, Sequence[float]]) -> float:
    """Exact witness from outcome probabilities of the three settings"""
    return float(sum(0.5 * weights @ fractions for weights, fractions, _ in _witness_terms(table)))


def concurrence_argument(rho: MatrixLike) -> float:
    """lambda1 - lambda2 - lambda3 - lambda4, before clipping at zero"""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise InvalidInputError(f"concurrence needs a two-qubit state, got {m.shape}")
    flip = np.kron(pauli(Axis.Y), pauli(Axis.Y))
    values, vectors = eigh(m)
    if values[-1] >= -settings.PSD_TOL:
        # rho = A A^dag; the lambdas are the singular values of A^T F A.
        # Rounding-level eigenvalues are dropped, their square roots are not small.
        kept = np.where(values > 1e-13, values, 0.0)
        factor = vectors * np.sqrt(kept)
        lambdas = np.linalg.svd(factor.T @ flip @ factor, compute_uv=False)
    else:
        # unphysical (linear-inversion) input: spectrum of rho rho~ directly
        spectrum = np.linalg.eigvals(m @ flip @ m.conj() @ flip)
        lambdas = np.sort(np.sqrt(np.abs(spectrum.real)))[::-1]
    return float(lambdas[0] - lambdas[1:].sum())


def concurrence(rho: MatrixLike) -> float:
    """Wootters concurrence, 0 for separable and 1 for maximally entangled states"""
    return max(0.0, concurrence_argument(rho))


def pauli_expectations(rho: MatrixLike) -> Dict[str, float]:
    """<sigma_i x sigma_j> for i, j in I, X, Y, Z keyed "II", "IX", ..."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise InvalidInputError(f"pauli_expectations needs a two-qubit state, got {m.shape}")
    basis = pauli_basis()
    return {
        CORRELATION_LABELS[4 * i + j]: expect(m, np.kron(basis[i], basis[j]))
        for i in range(4)
        for j in range(4)
    }


def fidelity(rho: MatrixLike, sigma: MatrixLike) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2"""
    root = psd_sqrt(as_matrix(rho))
    inner = root @ as_matrix(sigma) @ root
    values, _ = eigh((inner + inner.conj().T) / 2)
    return float(np.sum(np.sqrt(np.clip(values, 0.0, None))) ** 2)


def purity(rho: MatrixLike) -> float:
    m = as_matrix(rho)
    return float(np.real(np.trace(m @ m)))


# Sign of each outcome for the first-slot, second-slot and joint correlator
_SIGNS = {
    "first": np.array([1.0, 1.0, -1.0, -1.0]),
    "second": np.array([1.0, -1.0, 1.0, -1.0]),
    "joint": np.array([1.0, -1.0, -1.0, 1.0]),
}


def correlations_from_counts(
    table: Mapping[str, Sequence[float]]
) -> Tuple[Dict[str, float], Dict[str, float]]:
    """Linear estimates and multinomial standard errors of all 16 correlators.

    Single-qubit correlators pool the counts of every setting that measures
    that axis in that slot.
    """
    missing = [s for s in TOMOGRAPHY_SETTINGS if s not in table]
    if missing:
        raise InvalidInputError(f"Tomography needs settings: {', '.join(missing)}")
    counts = {s: np.asarray(table[s], dtype=float) for s in TOMOGRAPHY_SETTINGS}
    for label, c in counts.items():
        _fractions(c, label)

    values: Dict[str, float] = {"II": 1.0}
    errors: Dict[str, float] = {"II": 0.0}

    def estimate(key: str, pooled: List[np.ndarray], signs: np.ndarray) -> None:
        total = sum(c.sum() for c in pooled)
        mean = sum(float(signs @ c) for c in pooled) / total
        values[key] = mean
        errors[key] = float(np.sqrt(max(1.0 - mean**2, 0.0) / total))

    for a in ("X", "Y", "Z"):
        estimate(a + "I", [counts[a + b] for b in ("Z", "X", "Y")], _SIGNS["first"])
        estimate("I" + a, [counts[b + a] for b in ("Z", "X", "Y")], _SIGNS["second"])
        for b in ("X", "Y", "Z"):
            estimate(a + b, [counts[a + b]], _SIGNS["joint"])
    return {k: values[k] for k in CORRELATION_LABELS}, {k: errors[k] for k in CORRELATION_LABELS}
