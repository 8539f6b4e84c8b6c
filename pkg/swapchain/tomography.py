"""Two-qubit state reconstruction from the nine Pauli settings.

The maximum-likelihood estimate is parametrized as rho = T^dag T / Tr(T^dag T)
with T lower-triangular: four real diagonal entries followed by the real and
imaginary parts of the six entries below the diagonal (16 real parameters).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .analysis import (
    CORRELATION_LABELS,
    TOMOGRAPHY_SETTINGS,
    concurrence,
    concurrence_argument,
    correlations_from_counts,
    pauli_expectations,
    setting_projectors,
)
from .config import settings
from .errors import ConvergenceError, InvalidInputError
from .hilbert import eigh, project_psd
from .logger import logger
from .schemas import ComplexGrid, SettingOutcome, TomographyResult, counts_table
from .states import pauli_basis

_LOWER = ((1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2))
N_PARAMS = 16


@dataclass(frozen=True)
class LinearInversion:
    matrix: np.ndarray
    min_eigenvalue: float

    @property
    def physical(self) -> bool:
        return self.min_eigenvalue >= -settings.PSD_TOL


@dataclass(frozen=True)
class LikelihoodData:
    """Stacked outcome projectors and their counts"""

    projectors: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_table(cls, table: Mapping[str, Sequence[float]]) -> "LikelihoodData":
        projectors: List[np.ndarray] = []
        counts: List[float] = []
        for label in TOMOGRAPHY_SETTINGS:
            projectors.extend(setting_projectors(label))
            counts.extend(float(c) for c in table[label])
        return cls(np.array(projectors), np.array(counts))

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def linear_inversion(correlations: Mapping[str, float]) -> LinearInversion:
    """rho = ¼ sum_ij <sigma_i sigma_j> sigma_i x sigma_j; may be unphysical"""
    if abs(correlations.get("II", 1.0) - 1.0) > 1e-12:
        raise InvalidInputError("linear_inversion: <II> must equal 1")
    basis = pauli_basis()
    matrix = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            label = CORRELATION_LABELS[4 * i + j]
            matrix += correlations.get(label, 1.0 if label == "II" else 0.0) * np.kron(
                basis[i], basis[j]
            )
    matrix /= 4
    values, _ = eigh(matrix)
    result = LinearInversion(matrix, float(values[-1]))
    if not result.physical:
        logger.warning(
            "Linear inversion is not positive semidefinite (min eigenvalue %.4f)",
            result.min_eigenvalue,
        )
    return result


def _t_matrix(params: np.ndarray) -> np.ndarray:
    t = np.zeros((4, 4), dtype=complex)
    t[np.diag_indices(4)] = params[:4]
    for k, (r, c) in enumerate(_LOWER):
        t[r, c] = params[4 + 2 * k] + 1j * params[5 + 2 * k]
    return t


def density_from_params(params: np.ndarray) -> np.ndarray:
    t = _t_matrix(np.asarray(params, dtype=float))
    a = t.conj().T @ t
    return a / np.trace(a).real


def params_from_density(rho: np.ndarray, mixing: float = 1e-6) -> np.ndarray:
    """Parameters of a lower-triangular T with T^dag T = rho (slightly mixed)"""
    rho = (1 - mixing) * project_psd(rho) + mixing * np.eye(4) / 4
    flip = np.eye(4)[::-1]
    # T = J L^dag J with J rho J = L L^dag, so T is lower-triangular
    lower = np.linalg.cholesky(flip @ rho @ flip)
    t = flip @ lower.conj().T @ flip
    params = np.zeros(N_PARAMS)
    params[:4] = np.real(np.diag(t))
    for k, (r, c) in enumerate(_LOWER):
        params[4 + 2 * k] = t[r, c].real
        params[5 + 2 * k] = t[r, c].imag
    return params


def _probabilities(rho: np.ndarray, data: LikelihoodData) -> np.ndarray:
    return np.real(np.einsum("kij,ji->k", data.projectors, rho))


def log_likelihood(rho: np.ndarray, data: LikelihoodData) -> float:
    """sum_k n_k log p_k(rho), with p_k floored"""
    p = np.maximum(_probabilities(rho, data), settings.PROBABILITY_FLOOR)
    return float(data.counts @ np.log(p))


def neg_log_likelihood(params: np.ndarray, data: LikelihoodData) -> float:
    """Negative log-likelihood per recorded event"""
    return -log_likelihood(density_from_params(params), data) / data.total


def neg_log_likelihood_grad(params: np.ndarray, data: LikelihoodData) -> np.ndarray:
    t = _t_matrix(np.asarray(params, dtype=float))
    a = t.conj().T @ t
    trace = np.trace(a).real
    rho = a / trace
    p = np.maximum(_probabilities(rho, data), settings.PROBABILITY_FLOOR)
    weights = data.counts / (p * data.total)
    # dL = Tr(G dA) / Tr(A) with G = -sum_k w_k (Pi_k - p_k I)
    g = -(np.einsum("k,kij->ij", weights, data.projectors) - (weights @ p) * np.eye(4))
    f = g @ t.conj().T
    grad = np.zeros(N_PARAMS)
    grad[:4] = 2 * np.real(np.diag(f)) / trace
    for k, (r, c) in enumerate(_LOWER):
        grad[4 + 2 * k] = 2 * f[c, r].real / trace
        grad[5 + 2 * k] = -2 * f[c, r].imag / trace
    return grad


@dataclass(frozen=True)
class MleFit:
    rho: np.ndarray
    params: np.ndarray
    iterations: int
    gradient_norm: float


def fit_mle(
    data: LikelihoodData,
    start: np.ndarray,
    max_iter: Optional[int] = None,
    gtol: Optional[float] = None,
) -> MleFit:
    """Minimize the negative log-likelihood from parameter vector `start`"""
    max_iter = settings.MLE_MAX_ITER if max_iter is None else max_iter
    gtol = settings.MLE_GTOL if gtol is None else gtol
    result = minimize(
        neg_log_likelihood,
        start,
        args=(data,),
        jac=neg_log_likelihood_grad,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "gtol": gtol, "ftol": 1e-14},
    )
    gradient_norm = float(np.max(np.abs(neg_log_likelihood_grad(result.x, data))))
    if result.nit >= max_iter and gradient_norm >= gtol:
        raise ConvergenceError(result.nit, gradient_norm)
    logger.debug(
        "MLE finished after %d iterations, gradient max-norm %.3e (%s)",
        result.nit, gradient_norm, result.message,
    )
    return MleFit(density_from_params(result.x), result.x, int(result.nit), gradient_norm)


def _check_settings(table: Mapping[str, Sequence[float]]) -> None:
    missing = [s for s in TOMOGRAPHY_SETTINGS if s not in table]
    if missing:
        raise InvalidInputError(f"Tomography needs settings: {', '.join(missing)}")
    empty = [s for s in TOMOGRAPHY_SETTINGS if float(np.sum(table[s])) <= 0]
    if empty:
        raise InvalidInputError(f"Settings without events: {', '.join(empty)}")


def bootstrap(
    table: Mapping[str, Sequence[float]],
    start: np.ndarray,
    resamples: int,
    seed: int,
    workers: Optional[int] = None,
) -> List[np.ndarray]:
    """MLE states of multinomial resamples, one independent stream per replica"""
    workers = settings.WORKERS if workers is None else workers
    children = np.random.SeedSequence(seed).spawn(resamples)
    counts = {s: np.asarray(table[s], dtype=float) for s in TOMOGRAPHY_SETTINGS}

    def replica(child: np.random.SeedSequence) -> np.ndarray:
        rng = np.random.default_rng(child)
        resampled = {
            s: rng.multinomial(int(c.sum()), c / c.sum()) for s, c in counts.items()
        }
        return fit_mle(LikelihoodData.from_table(resampled), start).rho

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(replica, children))
    return [replica(child) for child in children]


def mle_reconstruct(
    outcomes: Sequence[SettingOutcome],
    resamples: Optional[int] = None,
    seed: int = 0,
) -> TomographyResult:
    """Physical two-qubit state maximizing the likelihood of the nine settings"""
    resamples = settings.BOOTSTRAP_RESAMPLES if resamples is None else resamples
    table = counts_table(list(outcomes))
    _check_settings(table)
    try:
        measured, measured_err = correlations_from_counts(table)
        linear = linear_inversion(measured)
        projected = project_psd(linear.matrix)
        data = LikelihoodData.from_table(table)

        fit = fit_mle(data, params_from_density(projected))
        correlations = pauli_expectations(fit.rho)

        stderr = {label: 0.0 for label in CORRELATION_LABELS}
        concurrence_err = None
        if resamples > 0:
            states = bootstrap(table, fit.params, resamples, seed)
            replica_corr = np.array(
                [[pauli_expectations(s)[k] for k in CORRELATION_LABELS] for s in states]
            )
            spread = replica_corr.std(axis=0, ddof=1) if resamples > 1 else np.zeros(16)
            stderr = dict(zip(CORRELATION_LABELS, (float(v) for v in spread)))
            concurrences = [concurrence(s) for s in states]
            concurrence_err = float(np.std(concurrences, ddof=1)) if resamples > 1 else 0.0

        result = TomographyResult(
            correlations=correlations,
            stderr=stderr,
            measured_correlations=measured,
            measured_stderr=measured_err,
            rho=ComplexGrid.from_array(fit.rho),
            concurrence=concurrence(fit.rho),
            concurrence_argument=concurrence_argument(fit.rho),
            concurrence_stderr=concurrence_err,
            linear_rho=ComplexGrid.from_array(linear.matrix),
            linear_is_physical=linear.physical,
            linear_min_eigenvalue=linear.min_eigenvalue,
            linear_concurrence_argument=concurrence_argument(linear.matrix),
            log_likelihood=log_likelihood(fit.rho, data),
            linear_log_likelihood=log_likelihood(projected, data),
            iterations=fit.iterations,
            gradient_norm=fit.gradient_norm,
            bootstrap_resamples=resamples,
            seed=seed,
        )
        logger.info(
            "Tomography: concurrence %.4f (argument %.4f), %d iterations",
            result.concurrence, result.concurrence_argument, fit.iterations,
        )
        return result
    except Exception as e:
        logger.error(f"Tomography reconstruction failed: {e}")
        raise
