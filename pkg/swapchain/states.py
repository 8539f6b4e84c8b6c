"""Polarization kets, Bell states, Pauli observables and the N-pair chain state.

Phase conventions:
    |+-> = (|H> +- |V>)/sqrt2
    |L>  = (|H> + i|V>)/sqrt2,  |R> = (|H> - i|V>)/sqrt2
    |Psi+-> = (|HV> +- |VH>)/sqrt2,  |Phi+-> = (|HH> +- |VV>)/sqrt2
|L> is the +1 eigenvector of sigma_y.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, List, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInputError
from .hilbert import PureState, QubitRegister, permute, tensor_vectors

SQRT_HALF = 1 / np.sqrt(2)


class Polarization(str, Enum):
    H = "H"
    V = "V"
    PLUS = "Plus"
    MINUS = "Minus"
    R = "R"
    L = "L"


class BellKind(str, Enum):
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"


class Axis(str, Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


# Row order of every 4x4 Bell table
BELL_ORDER: Tuple[BellKind, ...] = (
    BellKind.PSI_PLUS,
    BellKind.PSI_MINUS,
    BellKind.PHI_PLUS,
    BellKind.PHI_MINUS,
)

_KET_AMPLITUDES: Dict[Polarization, Tuple[complex, complex]] = {
    Polarization.H: (1.0, 0.0),
    Polarization.V: (0.0, 1.0),
    Polarization.PLUS: (SQRT_HALF, SQRT_HALF),
    Polarization.MINUS: (SQRT_HALF, -SQRT_HALF),
    Polarization.L: (SQRT_HALF, 1j * SQRT_HALF),
    Polarization.R: (SQRT_HALF, -1j * SQRT_HALF),
}

_BELL_AMPLITUDES: Dict[BellKind, Tuple[float, float, float, float]] = {
    BellKind.PSI_PLUS: (0.0, SQRT_HALF, SQRT_HALF, 0.0),
    BellKind.PSI_MINUS: (0.0, SQRT_HALF, -SQRT_HALF, 0.0),
    BellKind.PHI_PLUS: (SQRT_HALF, 0.0, 0.0, SQRT_HALF),
    BellKind.PHI_MINUS: (SQRT_HALF, 0.0, 0.0, -SQRT_HALF),
}

_PAULI: Dict[Axis, np.ndarray] = {
    Axis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Axis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Axis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

# (+1, -1) eigenvectors of each Pauli axis
_EIGENBASIS: Dict[Axis, Tuple[Polarization, Polarization]] = {
    Axis.Z: (Polarization.H, Polarization.V),
    Axis.X: (Polarization.PLUS, Polarization.MINUS),
    Axis.Y: (Polarization.L, Polarization.R),
}

# |B> = (I x sigma)|Phi+>, sigma labelled by its (x, z) bits
_PAULI_FRAME: Dict[BellKind, Tuple[int, int]] = {
    BellKind.PHI_PLUS: (0, 0),
    BellKind.PSI_PLUS: (1, 0),
    BellKind.PHI_MINUS: (0, 1),
    BellKind.PSI_MINUS: (1, 1),
}


def _coerce(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        pass
    if isinstance(value, str):
        for member in enum_cls:
            if value.lower() in (member.name.lower(), member.value.lower()):
                return member
    raise InvalidInputError(f"Unknown {enum_cls.__name__} label: {value!r}")


def as_polarization(value: Union[Polarization, str]) -> Polarization:
    return _coerce(Polarization, value)


def as_bell_kind(value: Union[BellKind, str]) -> BellKind:
    return _coerce(BellKind, value)


def as_axis(value: Union[Axis, str]) -> Axis:
    return _coerce(Axis, value)


@dataclass(frozen=True)
class ChainState:
    """Product of N Bell pairs over photons 1..2N"""

    pure: PureState
    pair_kinds: Tuple[BellKind, ...]

    @property
    def n_pairs(self) -> int:
        return len(self.pair_kinds)


def ket_vector(label: Union[Polarization, str]) -> np.ndarray:
    return np.array(_KET_AMPLITUDES[as_polarization(label)], dtype=complex)


def ket(label: Union[Polarization, str]) -> PureState:
    return PureState(ket_vector(label), QubitRegister((1,)))


def bell_vector(kind: Union[BellKind, str]) -> np.ndarray:
    return np.array(_BELL_AMPLITUDES[as_bell_kind(kind)], dtype=complex)


def bell(
    kind: Union[BellKind, str], labels: Tuple[Hashable, Hashable] = (1, 2)
) -> PureState:
    return PureState(bell_vector(kind), QubitRegister(tuple(labels)))


def bell_projector(kind: Union[BellKind, str]) -> np.ndarray:
    vec = bell_vector(kind)
    return np.outer(vec, vec.conj())


def pauli(axis: Union[Axis, str]) -> np.ndarray:
    return _PAULI[as_axis(axis)].copy()


def pauli_basis() -> List[np.ndarray]:
    """I, X, Y, Z"""
    return [np.eye(2, dtype=complex)] + [pauli(a) for a in (Axis.X, Axis.Y, Axis.Z)]


def eigenbasis(axis: Union[Axis, str]) -> Tuple[Polarization, Polarization]:
    return _EIGENBASIS[as_axis(axis)]


def product_ket(labels: Sequence[Union[Polarization, str]]) -> PureState:
    return PureState(tensor_vectors(ket_vector(label) for label in labels))


def chain_initial(
    n_pairs: int, kinds: Sequence[Union[BellKind, str]] = ()
) -> ChainState:
    """Photons 1..2n, pair k = photons (2k-1, 2k), all singlets by default"""
    if n_pairs < 1:
        raise InvalidInputError(f"chain_initial: n_pairs must be >= 1, got {n_pairs}")
    if kinds:
        if len(kinds) != n_pairs:
            raise InvalidInputError(
                f"chain_initial: {len(kinds)} pair kinds given for {n_pairs} pairs"
            )
        pair_kinds = tuple(as_bell_kind(k) for k in kinds)
    else:
        pair_kinds = (BellKind.PSI_MINUS,) * n_pairs
    vec = tensor_vectors(bell_vector(k) for k in pair_kinds)
    register = QubitRegister.default(2 * n_pairs)
    return ChainState(PureState(vec.reshape(-1), register), pair_kinds)


def _check_pairing(
    state: PureState, pairing: Tuple[Tuple[Hashable, Hashable], Tuple[Hashable, Hashable]]
) -> Tuple[Hashable, ...]:
    if state.num_qubits != 4:
        raise InvalidInputError(
            f"bell_coefficients needs a 4-qubit state, got {state.num_qubits}"
        )
    try:
        (a, b), (c, d) = pairing
    except (TypeError, ValueError):
        raise InvalidInputError(f"Pairing must be ((a, b), (c, d)), got {pairing!r}") from None
    order = (a, b, c, d)
    if set(order) != set(state.register.labels) or len(set(order)) != 4:
        raise InvalidInputError(
            f"Pairing {pairing} is not a partition of register {state.register.labels}"
        )
    return order


def bell_coefficients(
    state: PureState,
    pairing: Tuple[Tuple[Hashable, Hashable], Tuple[Hashable, Hashable]],
) -> np.ndarray:
    """c[k1][k2] = <Bell(k1)_ab Bell(k2)_cd | state>, rows/cols in BELL_ORDER"""
    order = _check_pairing(state, pairing)
    psi = permute(state, order).amplitudes.reshape(4, 4)
    basis = np.array([bell_vector(k) for k in BELL_ORDER])
    return basis.conj() @ psi @ basis.conj().T


def state_from_bell_coefficients(
    table: np.ndarray,
    pairing: Tuple[Tuple[Hashable, Hashable], Tuple[Hashable, Hashable]],
    register: QubitRegister,
) -> PureState:
    """Inverse of bell_coefficients, returned in `register` order"""
    (a, b), (c, d) = pairing
    basis = np.array([bell_vector(k) for k in BELL_ORDER])
    psi = basis.T @ np.asarray(table, dtype=complex) @ basis
    paired = PureState(psi.reshape(-1), QubitRegister((a, b, c, d)))
    return permute(paired, register.labels)


def pauli_frame(kind: Union[BellKind, str]) -> Tuple[int, int]:
    return _PAULI_FRAME[as_bell_kind(kind)]


def kind_from_frame(frame: Tuple[int, int]) -> BellKind:
    frame = (frame[0] & 1, frame[1] & 1)
    for kind, bits in _PAULI_FRAME.items():
        if bits == frame:
            return kind
    raise InvalidInputError(f"Invalid Pauli frame {frame}")
