"""Dense complex linear algebra over small polarization-qubit registers.

Basis ordering is H=0, V=1 and register indices are big-endian: the photon
listed first in a register is the most significant bit of the matrix index.
"""

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .errors import InvalidInputError, NumericalError


ComplexMatrix = np.ndarray


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise InvalidInputError(f"Dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class QubitRegister:
    """Ordered photon labels; slot k maps to tensor factor k"""

    labels: Tuple[Hashable, ...]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise InvalidInputError(f"Register labels must be unique: {labels}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def default(cls, n: int, start: int = 1) -> "QubitRegister":
        return cls(tuple(range(start, start + n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 1 << self.size

    def position(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidInputError(
                f"Photon {label!r} is not in register {self.labels}"
            ) from None

    def positions(self, labels: Iterable[Hashable]) -> Tuple[int, ...]:
        return tuple(self.position(label) for label in labels)

    def without(self, labels: Iterable[Hashable]) -> "QubitRegister":
        drop = set(labels)
        return QubitRegister(tuple(lab for lab in self.labels if lab not in drop))

    def __add__(self, other: "QubitRegister") -> "QubitRegister":
        return QubitRegister(self.labels + other.labels)


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector over a qubit register"""

    amplitudes: np.ndarray
    register: Optional[QubitRegister] = None

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = _num_qubits(amps.size)
        register = self.register or QubitRegister.default(n)
        if register.size != n:
            raise InvalidInputError(
                f"Register of size {register.size} does not match {amps.size} amplitudes"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > settings.NORM_TOL:
            raise InvalidInputError(f"State is not normalized (norm={norm:.12g})")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "register", register)

    @property
    def num_qubits(self) -> int:
        return self.register.size


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, trace-one matrix over a qubit register"""

    matrix: np.ndarray
    register: Optional[QubitRegister] = None
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidInputError(f"Density matrix must be square, got {m.shape}")
        n = _num_qubits(m.shape[0])
        register = self.register or QubitRegister.default(n)
        if register.size != n:
            raise InvalidInputError(
                f"Register of size {register.size} does not match dimension {m.shape[0]}"
            )
        if self.validate:
            check_hermitian(m)
            trace = np.trace(m).real
            if abs(trace - 1.0) > settings.TRACE_TOL:
                raise NumericalError(f"Density matrix trace is {trace:.12g}, expected 1")
            lowest = np.linalg.eigvalsh(m)[0]
            if lowest < -settings.TRACE_TOL:
                raise NumericalError(
                    f"Density matrix has negative eigenvalue {lowest:.3e}"
                )
        object.__setattr__(self, "matrix", _frozen((m + m.conj().T) / 2))
        object.__setattr__(self, "register", register)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        psi = state.amplitudes
        return cls(np.outer(psi, psi.conj()), state.register)

    @classmethod
    def maximally_mixed(
        cls, register: Union[QubitRegister, int]
    ) -> "DensityMatrix":
        if isinstance(register, int):
            register = QubitRegister.default(register)
        return cls(np.eye(register.dim) / register.dim, register)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.register.size

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(
            tensor(self.matrix, other.matrix),
            self.register + other.register,
            validate=False,
        )

    def to_pure(self, tol: float = 1e-9) -> PureState:
        """Return the state vector of a rank-one density matrix"""
        values, vectors = eigh(self.matrix)
        if abs(values[0] - 1.0) > tol:
            raise NumericalError(
                f"State is mixed (largest eigenvalue {values[0]:.6g}), no state vector"
            )
        return PureState(vectors[:, 0], self.register)


MatrixLike = Union[DensityMatrix, np.ndarray]


def as_matrix(value: MatrixLike) -> np.ndarray:
    if isinstance(value, DensityMatrix):
        return value.matrix
    if isinstance(value, PureState):
        return DensityMatrix.from_pure(value).matrix
    return np.asarray(value, dtype=complex)


def check_hermitian(m: np.ndarray, tol: Optional[float] = None) -> None:
    tol = settings.HERMITIAN_TOL if tol is None else tol
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"Matrix must be square, got {m.shape}")
    deviation = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if deviation > tol:
        raise NumericalError(f"Matrix is not Hermitian (deviation {deviation:.3e})")


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product; `a` occupies the more significant index bits"""
    a = as_matrix(a)
    b = as_matrix(b)
    for name, m in (("a", a), ("b", b)):
        if m.ndim == 2 and m.shape[0] != m.shape[1]:
            raise InvalidInputError(f"tensor: operand {name} is not square {m.shape}")
    return np.kron(a, b)


def tensor_all(operands: Iterable[ComplexMatrix]) -> ComplexMatrix:
    result = np.ones((1, 1), dtype=complex)
    for op in operands:
        result = tensor(result, op)
    return result


def tensor_vectors(vectors: Iterable[np.ndarray]) -> np.ndarray:
    """Kronecker product of state vectors in register order"""
    result = np.ones(1, dtype=complex)
    for vec in vectors:
        result = np.kron(result, np.asarray(vec, dtype=complex).reshape(-1))
    return result


def embed(op: ComplexMatrix, positions: Sequence[int], n: int) -> ComplexMatrix:
    """Place a k-qubit operator on register `positions` of an n-qubit register"""
    op = as_matrix(op)
    positions = list(positions)
    k = len(positions)
    if op.shape != (1 << k, 1 << k):
        raise InvalidInputError(
            f"Operator of shape {op.shape} does not act on {k} qubits"
        )
    if len(set(positions)) != k or any(p < 0 or p >= n for p in positions):
        raise InvalidInputError(f"Invalid positions {positions} for {n} qubits")
    rest = [p for p in range(n) if p not in positions]
    order = positions + rest
    full = np.kron(op, np.eye(1 << len(rest), dtype=complex))
    inverse = list(np.argsort(order))
    full = full.reshape((2,) * (2 * n)).transpose(inverse + [n + p for p in inverse])
    return full.reshape(1 << n, 1 << n)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every register position not in `keep`.

    Kept photons stay in their original register order.
    """
    n = rho.num_qubits
    keep = sorted(set(keep))
    if not keep:
        raise InvalidInputError("partial_trace: keep set must not be empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise InvalidInputError(f"partial_trace: positions {keep} outside register of {n}")
    traced = [p for p in range(n) if p not in keep]
    dk, dt = 1 << len(keep), 1 << len(traced)
    order = keep + traced
    t = rho.matrix.reshape((2,) * (2 * n)).transpose(order + [n + p for p in order])
    reduced = np.einsum("ajbj->ab", t.reshape(dk, dt, dk, dt))
    labels = tuple(rho.register.labels[p] for p in keep)
    return DensityMatrix(reduced, QubitRegister(labels), validate=False)


def reduce_to(rho: DensityMatrix, labels: Iterable[Hashable]) -> DensityMatrix:
    """partial_trace addressed by photon label instead of position"""
    return partial_trace(rho, rho.register.positions(labels))


def expect(rho: MatrixLike, obs: ComplexMatrix) -> float:
    """Tr(rho obs) for a Hermitian observable"""
    m = as_matrix(rho)
    obs = as_matrix(obs)
    if m.shape != obs.shape:
        raise InvalidInputError(
            f"expect: state {m.shape} and observable {obs.shape} dimensions differ"
        )
    value = np.einsum("ij,ji->", m, obs)
    if abs(value.imag) > settings.HERMITIAN_TOL:
        raise NumericalError(
            f"expect: imaginary residue {value.imag:.3e}; observable is not Hermitian"
        )
    return float(value.real)


def eigh(m: ComplexMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending"""
    m = as_matrix(m)
    check_hermitian(m)
    values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def psd_sqrt(m: ComplexMatrix) -> ComplexMatrix:
    """Principal square root of a positive-semidefinite Hermitian matrix"""
    values, vectors = eigh(m)
    if values[-1] < -settings.PSD_TOL:
        raise NumericalError(
            f"psd_sqrt: matrix has negative eigenvalue {values[-1]:.3e}"
        )
    roots = np.sqrt(np.clip(values, 0.0, None))
    return (vectors * roots) @ vectors.conj().T


def project_psd(m: ComplexMatrix) -> ComplexMatrix:
    """Nearest trace-one PSD matrix obtained by clipping negative eigenvalues"""
    values, vectors = eigh(m)
    clipped = np.clip(values, 0.0, None)
    if clipped.sum() <= 0:
        return np.eye(m.shape[0], dtype=complex) / m.shape[0]
    clipped = clipped / clipped.sum()
    return (vectors * clipped) @ vectors.conj().T


def fidelity_pure(rho: MatrixLike, psi: Union[PureState, np.ndarray]) -> float:
    """<psi|rho|psi>"""
    vec = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
    return float(np.real(np.vdot(vec, as_matrix(rho) @ vec)))


def permute(state: PureState, labels: Sequence[Hashable]) -> PureState:
    """Reorder a pure state's tensor factors to the register order `labels`"""
    order = list(state.register.positions(labels))
    if len(order) != state.num_qubits:
        raise InvalidInputError(
            f"permute: {labels} is not a reordering of {state.register.labels}"
        )
    t = state.amplitudes.reshape((2,) * state.num_qubits).transpose(order)
    return PureState(t.reshape(-1), QubitRegister(tuple(labels)))
