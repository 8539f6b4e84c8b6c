import numpy as np
import pytest
from numpy.testing import assert_allclose

from swapchain.errors import InvalidInputError, NumericalError
from swapchain.hilbert import (
    DensityMatrix,
    PureState,
    QubitRegister,
    eigh,
    embed,
    expect,
    fidelity_pure,
    partial_trace,
    permute,
    project_psd,
    psd_sqrt,
    reduce_to,
    tensor,
    tensor_all,
)
from swapchain.states import bell, pauli

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def test_register_positions_and_without():
    register = QubitRegister((1, 4, 5, 6))
    assert register.position(5) == 2
    assert register.positions([6, 1]) == (3, 0)
    assert register.without([4, 5]).labels == (1, 6)
    assert (QubitRegister((1, 2)) + QubitRegister((3,))).labels == (1, 2, 3)
    with pytest.raises(InvalidInputError):
        register.position(2)
    with pytest.raises(InvalidInputError):
        QubitRegister((1, 1))


def test_pure_state_must_be_normalized():
    with pytest.raises(InvalidInputError):
        PureState(np.array([1.0, 1.0]))
    state = PureState(np.array([1.0, 0.0]))
    assert state.register.labels == (1,)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 0.5


def test_density_matrix_validation():
    with pytest.raises(NumericalError):
        DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]]))
    with pytest.raises(NumericalError):
        DensityMatrix(np.eye(2))
    with pytest.raises(NumericalError):
        DensityMatrix(np.array([[1.2, 0.0], [0.0, -0.2]]))
    with pytest.raises(InvalidInputError):
        DensityMatrix(np.eye(3) / 3)
    with pytest.raises(InvalidInputError):
        DensityMatrix(np.eye(4) / 4, QubitRegister((1, 2, 3)))


def test_maximally_mixed_and_purity():
    rho = DensityMatrix.maximally_mixed(QubitRegister((1, 6)))
    assert rho.register.labels == (1, 6)
    assert rho.purity == pytest.approx(0.25)
    assert DensityMatrix.from_pure(bell("PsiMinus")).purity == pytest.approx(1.0)


def test_to_pure_roundtrip_and_mixed_rejection():
    pure = bell("PhiPlus")
    recovered = DensityMatrix.from_pure(pure).to_pure()
    assert abs(np.vdot(recovered.amplitudes, pure.amplitudes)) == pytest.approx(1.0)
    with pytest.raises(NumericalError):
        DensityMatrix.maximally_mixed(2).to_pure()


def test_tensor_rejects_non_square_operands():
    with pytest.raises(InvalidInputError):
        tensor(np.ones((2, 1)), np.eye(2))
    assert_allclose(tensor_all([np.eye(2), pauli("X")]), np.kron(np.eye(2), pauli("X")))


@pytest.mark.parametrize(
    "positions, expected",
    [
        ([0], lambda x: np.kron(x, np.eye(4))),
        ([1], lambda x: np.kron(np.kron(np.eye(2), x), np.eye(2))),
        ([2], lambda x: np.kron(np.eye(4), x)),
    ],
)
def test_embed_single_qubit(positions, expected):
    x = pauli("X")
    assert_allclose(embed(x, positions, 3), expected(x))


def test_embed_reversed_positions_swaps_factors():
    a = np.diag([1.0, 2.0]).astype(complex)
    b = pauli("X")
    assert_allclose(embed(np.kron(a, b), [1, 0], 2), np.kron(b, a))
    with pytest.raises(InvalidInputError):
        embed(np.kron(a, b), [0, 0], 2)


def test_partial_trace_of_bell_state_is_maximally_mixed():
    rho = DensityMatrix(np.outer(SINGLET, SINGLET))
    for keep in ([0], [1]):
        assert_allclose(partial_trace(rho, keep).matrix, np.eye(2) / 2, atol=1e-12)
    with pytest.raises(InvalidInputError):
        partial_trace(rho, [])


def test_partial_trace_of_product_keeps_factor(random_density):
    a = random_density(2)
    b = random_density(4)
    c = random_density(2)
    rho = DensityMatrix(np.kron(np.kron(a, b), c))
    reduced = partial_trace(rho, [0, 3])
    assert reduced.register.labels == (1, 4)
    assert_allclose(reduced.matrix, np.kron(a, c), atol=1e-12)
    assert_allclose(reduce_to(rho, [2, 3]).matrix, b, atol=1e-12)


def test_expect_rejects_non_hermitian_observable():
    rho = np.eye(2) / 2
    assert expect(rho, pauli("Z")) == pytest.approx(0.0)
    with pytest.raises(NumericalError):
        expect(np.array([[1, 0], [0, 0]]), np.array([[1j, 0], [0, 0]]))


def test_psd_sqrt_and_projection(random_density):
    rho = random_density(4)
    root = psd_sqrt(rho)
    assert_allclose(root @ root, rho, atol=1e-12)

    unphysical = np.diag([0.7, 0.4, 0.1, -0.2]).astype(complex)
    projected = project_psd(unphysical)
    assert np.trace(projected).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(projected).min() >= -1e-12
    with pytest.raises(NumericalError):
        psd_sqrt(unphysical)


def test_permute_reorders_factors():
    state = PureState(np.kron([1.0, 0.0], [0.0, 1.0]), QubitRegister(("a", "b")))
    swapped = permute(state, ("b", "a"))
    assert_allclose(swapped.amplitudes, np.kron([0.0, 1.0], [1.0, 0.0]))
    assert fidelity_pure(DensityMatrix.from_pure(swapped), swapped) == pytest.approx(1.0)


def test_eigh_of_pauli_z_is_descending():
    values, vectors = eigh(pauli("Z"))
    assert_allclose(values, [1.0, -1.0])
    assert_allclose(np.abs(vectors), np.eye(2), atol=1e-12)


def test_eigh_of_random_hermitian(rng):
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    m = (g + g.conj().T) / 2
    values, vectors = eigh(m)
    assert np.all(np.diff(values) <= 0)
    assert_allclose(m @ vectors, vectors * values, atol=1e-12)
    assert values.sum() == pytest.approx(np.trace(m).real, abs=1e-12)
    with pytest.raises(NumericalError):
        eigh(g)


def test_tensor_matches_elementwise_product(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    expected = np.zeros((8, 8), dtype=complex)
    for i, j, k, l in np.ndindex(2, 2, 4, 4):
        expected[4 * i + k, 4 * j + l] = a[i, j] * b[k, l]
    assert_allclose(tensor(a, b), expected, atol=1e-12)


def test_tensor_is_associative(rng):
    # small integers keep every product exact
    a, b, c = (rng.integers(-4, 5, size=(2, 2)) for _ in range(3))
    assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


def test_partial_trace_composes(random_density):
    rho = DensityMatrix(random_density(16), QubitRegister((1, 4, 5, 6)))
    in_one_step = partial_trace(rho, [0, 3])
    in_two_steps = partial_trace(partial_trace(rho, [0, 2, 3]), [0, 2])
    assert in_two_steps.register.labels == in_one_step.register.labels == (1, 6)
    assert_allclose(in_two_steps.matrix, in_one_step.matrix, atol=1e-12)
    assert np.trace(in_one_step.matrix).real == pytest.approx(1.0)


def test_expect_is_normalized_and_linear(random_density, rng):
    rho = random_density(4)
    assert expect(rho, np.eye(4)) == pytest.approx(1.0)
    a = tensor(pauli("X"), pauli("Y"))
    b = tensor(pauli("Z"), np.eye(2))
    alpha, beta = rng.normal(size=2)
    assert expect(rho, alpha * a + beta * b) == pytest.approx(
        alpha * expect(rho, a) + beta * expect(rho, b), abs=1e-12
    )
