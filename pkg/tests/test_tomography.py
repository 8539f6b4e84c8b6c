import numpy as np
import pytest
from numpy.testing import assert_allclose

from swapchain.analysis import (
    CORRELATION_LABELS,
    TOMOGRAPHY_SETTINGS,
    correlations_from_counts,
    fidelity,
    outcome_probabilities,
    pauli_expectations,
)
from swapchain.errors import ConvergenceError, InvalidInputError
from swapchain.schemas import SettingOutcome
from swapchain.states import bell_projector
from swapchain.tomography import (
    N_PARAMS,
    LikelihoodData,
    bootstrap,
    density_from_params,
    fit_mle,
    linear_inversion,
    mle_reconstruct,
    neg_log_likelihood,
    neg_log_likelihood_grad,
    params_from_density,
)

from .conftest import random_density_matrix


def sample_outcomes(rho, n_events, rng):
    outcomes = []
    for setting in TOMOGRAPHY_SETTINGS:
        p = np.clip(outcome_probabilities(rho, setting), 0, None)
        counts = rng.multinomial(n_events, p / p.sum())
        outcomes.append(SettingOutcome(setting=setting, counts=[int(c) for c in counts]))
    return outcomes


def table_of(outcomes):
    return {o.setting: o.counts for o in outcomes}


def test_params_roundtrip(random_density):
    rho = random_density()
    params = params_from_density(rho, mixing=0.0)
    assert params.shape == (N_PARAMS,)
    assert np.all(params[:4] > 0)
    assert_allclose(density_from_params(params), rho, atol=1e-12)


def test_density_from_params_is_physical(rng):
    rho = density_from_params(rng.normal(size=N_PARAMS))
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12
    assert_allclose(rho, rho.conj().T)


def test_linear_inversion_of_exact_correlations(random_density):
    rho = random_density()
    result = linear_inversion(pauli_expectations(rho))
    assert_allclose(result.matrix, rho, atol=1e-12)
    assert result.physical


def test_linear_inversion_flags_unphysical_estimates():
    correlations = {label: 0.0 for label in CORRELATION_LABELS}
    correlations.update({"II": 1.0, "XX": -1.0, "YY": -1.0, "ZZ": 1.0})
    result = linear_inversion(correlations)
    assert not result.physical
    assert result.min_eigenvalue == pytest.approx(-0.5)
    with pytest.raises(InvalidInputError):
        linear_inversion({"II": 0.5})


def test_gradient_matches_central_differences(rng):
    rho = random_density_matrix(rng)
    data = LikelihoodData.from_table(table_of(sample_outcomes(rho, 500, rng)))
    h = 1e-6
    for _ in range(20):
        params = rng.normal(size=N_PARAMS)
        grad = neg_log_likelihood_grad(params, data)
        numeric = np.array(
            [
                (neg_log_likelihood(params + h * e, data) - neg_log_likelihood(params - h * e, data))
                / (2 * h)
                for e in np.eye(N_PARAMS)
            ]
        )
        assert np.linalg.norm(grad - numeric) / np.linalg.norm(numeric) < 1e-5


def test_mle_of_singlet_counts():
    singlet = bell_projector("PsiMinus")
    outcomes = [
        SettingOutcome(
            setting=s,
            counts=[int(round(c)) for c in 100_000 * outcome_probabilities(singlet, s)],
        )
        for s in TOMOGRAPHY_SETTINGS
    ]
    result = mle_reconstruct(outcomes, resamples=0)
    for label in ("XX", "YY", "ZZ"):
        assert result.correlations[label] == pytest.approx(-1.0, abs=1e-3)
    assert result.concurrence == pytest.approx(1.0, abs=1e-3)
    assert result.correlations["II"] == pytest.approx(1.0)
    assert fidelity(result.rho.to_array(), singlet) > 0.999


def test_mle_of_uniform_counts_has_zero_concurrence():
    outcomes = [SettingOutcome(setting=s, counts=[500, 500, 500, 500]) for s in TOMOGRAPHY_SETTINGS]
    result = mle_reconstruct(outcomes, resamples=0)
    assert result.concurrence == 0.0
    assert result.concurrence_argument == pytest.approx(-0.5, abs=1e-4)
    assert result.linear_is_physical
    assert result.log_likelihood >= result.linear_log_likelihood - 1e-6


def test_missing_settings_are_named():
    outcomes = [
        SettingOutcome(setting=s, counts=[1, 1, 1, 1])
        for s in TOMOGRAPHY_SETTINGS
        if s not in ("XY", "YZ")
    ]
    with pytest.raises(InvalidInputError, match="XY, YZ"):
        mle_reconstruct(outcomes)


def test_iteration_budget_exhaustion_raises(rng):
    rho = random_density_matrix(rng, rank=1)
    data = LikelihoodData.from_table(table_of(sample_outcomes(rho, 10_000, rng)))
    start = params_from_density(np.eye(4) / 4)
    with pytest.raises(ConvergenceError) as info:
        fit_mle(data, start, max_iter=1)
    assert info.value.iterations == 1


def test_bootstrap_is_independent_of_worker_count(rng):
    outcomes = sample_outcomes(random_density_matrix(rng), 1000, rng)
    table = table_of(outcomes)
    fit = fit_mle(LikelihoodData.from_table(table), params_from_density(np.eye(4) / 4))
    serial = bootstrap(table, fit.params, resamples=4, seed=11, workers=1)
    threaded = bootstrap(table, fit.params, resamples=4, seed=11, workers=3)
    for a, b in zip(serial, threaded):
        assert np.array_equal(a, b)


def test_bootstrap_error_bars(rng):
    outcomes = sample_outcomes(random_density_matrix(rng), 2000, rng)
    result = mle_reconstruct(outcomes, resamples=20, seed=3)
    assert result.bootstrap_resamples == 20
    assert result.stderr["II"] == pytest.approx(0.0, abs=1e-12)
    assert 0 < result.stderr["XX"] < 0.1
    assert result.concurrence_stderr is not None
    again = mle_reconstruct(outcomes, resamples=20, seed=3)
    assert again.model_dump_json() == result.model_dump_json()


@pytest.mark.slow
def test_tomography_round_trip_on_random_states(rng):
    n_events = 100_000
    fidelities = []
    for _ in range(100):
        rho = random_density_matrix(rng, rank=int(rng.integers(1, 5)))
        outcomes = sample_outcomes(rho, n_events, rng)
        result = mle_reconstruct(outcomes, resamples=0)
        fidelities.append(fidelity(result.rho.to_array(), rho))

        measured, errors = correlations_from_counts(table_of(outcomes))
        exact = pauli_expectations(rho)
        for label in CORRELATION_LABELS[1:]:
            # single-axis binomial bound; pooled estimators are tighter
            bound = 5 * max(errors[label], 1 / np.sqrt(n_events))
            assert abs(measured[label] - exact[label]) <= bound
    assert np.median(fidelities) >= 0.99
