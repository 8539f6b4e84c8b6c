import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from swapchain.errors import InvalidInputError
from swapchain.hilbert import DensityMatrix, PureState, QubitRegister, embed, reduce_to
from swapchain.protocol import bsm_element
from swapchain.states import (
    BELL_ORDER,
    Axis,
    BellKind,
    Polarization,
    as_bell_kind,
    bell,
    bell_coefficients,
    bell_vector,
    chain_initial,
    eigenbasis,
    ket,
    ket_vector,
    kind_from_frame,
    pauli,
    pauli_frame,
    product_ket,
    state_from_bell_coefficients,
)


def _equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-12) -> bool:
    overlap = np.vdot(a, b)
    return abs(abs(overlap) - np.linalg.norm(a) * np.linalg.norm(b)) < atol


def test_bell_basis_is_orthonormal():
    basis = np.array([bell_vector(k) for k in BELL_ORDER])
    assert_allclose(basis @ basis.conj().T, np.eye(4), atol=1e-15)


@pytest.mark.parametrize("axis", list(Axis))
def test_eigenbasis_vectors_are_plus_and_minus_eigenvectors(axis):
    plus, minus = eigenbasis(axis)
    sigma = pauli(axis)
    assert_allclose(sigma @ ket_vector(plus), ket_vector(plus), atol=1e-15)
    assert_allclose(sigma @ ket_vector(minus), -ket_vector(minus), atol=1e-15)


def test_left_circular_is_plus_one_eigenvector_of_sigma_y():
    assert eigenbasis("Y") == (Polarization.L, Polarization.R)
    assert_allclose(ket_vector("L"), np.array([1, 1j]) / np.sqrt(2))


@pytest.mark.parametrize("label", ["PsiMinus", "psi_minus", "PSI_MINUS", BellKind.PSI_MINUS])
def test_bell_kind_labels(label):
    assert as_bell_kind(label) is BellKind.PSI_MINUS


def test_unknown_labels_raise():
    with pytest.raises(InvalidInputError):
        as_bell_kind("Chi")
    with pytest.raises(InvalidInputError):
        ket("D")


@pytest.mark.parametrize("kind", list(BellKind))
def test_pauli_frame_generates_bell_state(kind):
    x, z = pauli_frame(kind)
    sigma = np.eye(2, dtype=complex)
    if x:
        sigma = sigma @ pauli("X")
    if z:
        sigma = sigma @ pauli("Z")
    generated = np.kron(np.eye(2), sigma) @ bell_vector(BellKind.PHI_PLUS)
    assert _equal_up_to_phase(generated, bell_vector(kind))
    assert kind_from_frame((x, z)) is kind


def test_chain_initial_is_product_of_singlets():
    chain = chain_initial(3)
    assert chain.n_pairs == 3
    assert chain.pure.register.labels == (1, 2, 3, 4, 5, 6)
    rho = DensityMatrix.from_pure(chain.pure)
    for pair in ((1, 2), (3, 4), (5, 6)):
        assert_allclose(
            reduce_to(rho, pair).matrix,
            np.outer(bell_vector("PsiMinus"), bell_vector("PsiMinus").conj()),
            atol=1e-12,
        )
    with pytest.raises(InvalidInputError):
        chain_initial(2, kinds=["PsiMinus"])


def test_product_ket():
    state = product_ket(["H", "Plus"])
    assert_allclose(state.amplitudes, np.kron([1, 0], [1, 1]) / np.sqrt(2))


def test_swapped_pairing_of_two_singlets():
    state = chain_initial(2).pure
    table = bell_coefficients(state, ((1, 4), (2, 3)))

    assert_allclose(np.abs(np.diag(table)), np.full(4, 0.5), atol=1e-12)
    off_diagonal = table - np.diag(np.diag(table))
    assert_allclose(off_diagonal, 0.0, atol=1e-12)
    # signs (+, -, -, +) in Psi+, Psi-, Phi+, Phi- order, up to a global phase
    signs = np.diag(table) / np.diag(table)[0]
    assert_allclose(signs, [1, -1, -1, 1], atol=1e-12)


def test_bell_coefficients_reconstruct_the_state(random_pure):
    register = QubitRegister((1, 2, 3, 4))
    state = PureState(random_pure(16), register)
    for pairing in (((1, 2), (3, 4)), ((1, 4), (2, 3)), ((3, 1), (4, 2))):
        table = bell_coefficients(state, pairing)
        assert np.sum(np.abs(table) ** 2) == pytest.approx(1.0)
        rebuilt = state_from_bell_coefficients(table, pairing, register)
        assert_allclose(rebuilt.amplitudes, state.amplitudes, atol=1e-12)


def test_remaining_photons_after_first_bsm():
    """A ++ click on photons 2 and 3 leaves Phi+ on (1, 4) next to the untouched third pair"""
    chain = chain_initial(3)
    rho = DensityMatrix.from_pure(chain.pure)
    element = bsm_element("++")
    full = embed(element, [1, 2], 6)
    probability = np.trace(full @ rho.matrix).real
    assert probability == pytest.approx(1 / 8)

    root = embed(np.sqrt(2) * element, [1, 2], 6)
    conditioned = DensityMatrix(root @ rho.matrix @ root.conj().T / probability)
    remaining = reduce_to(conditioned, (1, 4, 5, 6)).to_pure()
    table = bell_coefficients(remaining, ((1, 4), (5, 6)))
    expected = np.zeros((4, 4))
    expected[BELL_ORDER.index(BellKind.PHI_PLUS), BELL_ORDER.index(BellKind.PSI_MINUS)] = 1
    assert_allclose(np.abs(table), expected, atol=1e-12)

    # regrouped onto the end photons (1, 6) and the next BSM pair (4, 5)
    regrouped = bell_coefficients(remaining, ((1, 6), (4, 5)))
    anti_diagonal = np.fliplr(np.eye(4))
    assert_allclose(np.abs(regrouped), 0.5 * anti_diagonal, atol=1e-12)
    # Psi+Phi-, Psi-Phi+, Phi+Psi-, Phi-Psi+ with signs (+, +, -, -) up to a global phase
    entries = np.fliplr(regrouped).diagonal()
    assert_allclose(entries / entries[0], [1, 1, -1, -1], atol=1e-12)


@pytest.mark.parametrize(
    "pairing", [((1, 2), (2, 3)), ((1, 2), (3, 5)), ((1, 2, 3), (4,))]
)
def test_invalid_pairings(pairing):
    with pytest.raises(InvalidInputError):
        bell_coefficients(chain_initial(2).pure, pairing)


def test_bell_state_register_labels():
    state = bell("PhiMinus", labels=(1, 6))
    assert state.register.labels == (1, 6)
    assert_allclose(state.amplitudes, [1 / np.sqrt(2), 0, 0, -1 / np.sqrt(2)])
    assert list(itertools.chain(*[eigenbasis(a) for a in "ZXY"])) == [
        Polarization.H, Polarization.V, Polarization.PLUS,
        Polarization.MINUS, Polarization.L, Polarization.R,
    ]
