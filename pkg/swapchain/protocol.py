"""Bell-state measurements as post-selected POVM elements and cascaded swapping.

A PBS-based BSM registers a two-fold coincidence behind diagonal analysers.
Restricted to the HH/VV coincidence subspace, the |+>|+> (or |->|->) pattern
heralds Phi+ and the |+>|-> (or |->|+>) pattern heralds Phi-.
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .errors import ImpossibleOutcomeError, InvalidInputError
from .hilbert import DensityMatrix, QubitRegister, embed, partial_trace, psd_sqrt
from .logger import logger
from .noise import NoiseModel, source_state
from .states import (
    BellKind,
    as_bell_kind,
    kind_from_frame,
    pauli,
    pauli_frame,
)


class DetectorOutcome(str, Enum):
    PLUS = "Plus"
    MINUS = "Minus"


_SHORT = {"+": DetectorOutcome.PLUS, "-": DetectorOutcome.MINUS,
          "p": DetectorOutcome.PLUS, "m": DetectorOutcome.MINUS}


@dataclass(frozen=True)
class DetectorPattern:
    """Diagonal-basis coincidence at the two detectors behind one PBS"""

    first: DetectorOutcome
    second: DetectorOutcome

    def __post_init__(self) -> None:
        object.__setattr__(self, "first", DetectorOutcome(self.first))
        object.__setattr__(self, "second", DetectorOutcome(self.second))

    @classmethod
    def parse(cls, value: Union["DetectorPattern", str, Sequence[str]]) -> "DetectorPattern":
        """Accept "++", "+-", "pm", ("Plus", "Minus") and the like"""
        if isinstance(value, DetectorPattern):
            return value
        try:
            if isinstance(value, str):
                first, second = (_SHORT[ch] for ch in value.strip().lower())
            else:
                first, second = (
                    _SHORT.get(str(v).lower()) or DetectorOutcome(v) for v in value
                )
        except (KeyError, ValueError):
            raise InvalidInputError(f"Invalid detector pattern: {value!r}") from None
        return cls(first, second)

    @property
    def kind(self) -> BellKind:
        """Bell state heralded by this pattern"""
        if self.first == self.second:
            return BellKind.PHI_PLUS
        return BellKind.PHI_MINUS

    @property
    def label(self) -> str:
        return ("+" if self.first == DetectorOutcome.PLUS else "-") + (
            "+" if self.second == DetectorOutcome.PLUS else "-"
        )


PLUS_PLUS = DetectorPattern(DetectorOutcome.PLUS, DetectorOutcome.PLUS)
ALL_PATTERNS: Tuple[DetectorPattern, ...] = tuple(
    DetectorPattern(a, b) for a in DetectorOutcome for b in DetectorOutcome
)

# Accepted patterns of the detection schemes discussed for the PBS analyser
SCHEMES: Dict[str, Tuple[DetectorPattern, ...]] = {
    "registered": (PLUS_PLUS,),
    "phi_plus": (PLUS_PLUS, DetectorPattern(DetectorOutcome.MINUS, DetectorOutcome.MINUS)),
    "improved": ALL_PATTERNS,
}

# Two-dimensional support of each Bell state and the sign of its coherence
_BELL_SUPPORT: Dict[BellKind, Tuple[int, int, int]] = {
    BellKind.PHI_PLUS: (0, 3, +1),
    BellKind.PHI_MINUS: (0, 3, -1),
    BellKind.PSI_PLUS: (1, 2, +1),
    BellKind.PSI_MINUS: (1, 2, -1),
}


def _check_visibility(visibility: float) -> float:
    if not 0.0 <= visibility <= 1.0:
        raise InvalidInputError(f"visibility must be in [0, 1], got {visibility}")
    return float(visibility)


def bell_element(kind: Union[BellKind, str], visibility: float = 1.0) -> np.ndarray:
    """Complete-BSM element with its coherence damped by `visibility`.

    ½[(|a><a| + |b><b|) + s V (|a><b| + |b><a|)]; the projector |B><B| at V=1.
    """
    visibility = _check_visibility(visibility)
    a, b, sign = _BELL_SUPPORT[as_bell_kind(kind)]
    m = np.zeros((4, 4), dtype=complex)
    m[a, a] = m[b, b] = 0.5
    m[a, b] = m[b, a] = 0.5 * sign * visibility
    return m


def bsm_element(
    pattern: Union[DetectorPattern, str], visibility: float = 1.0
) -> np.ndarray:
    """POVM element of one PBS coincidence pattern; ½|Phi+-><Phi+-| at V=1"""
    pattern = DetectorPattern.parse(pattern)
    return 0.5 * bell_element(pattern.kind, visibility)


@dataclass(frozen=True)
class BsmSpec:
    """One Bell-state measurement on photons `targets`.

    Either a PBS detector `pattern` or an ideal complete-BSM `kind` is given.
    """

    targets: Tuple[Hashable, Hashable]
    pattern: Optional[DetectorPattern] = None
    kind: Optional[BellKind] = None
    visibility: float = 1.0

    def __post_init__(self) -> None:
        targets = tuple(self.targets)
        if len(targets) != 2 or targets[0] == targets[1]:
            raise InvalidInputError(f"BSM needs two distinct photons, got {targets}")
        if (self.pattern is None) == (self.kind is None):
            raise InvalidInputError("BSM needs exactly one of pattern or kind")
        if self.pattern is not None:
            object.__setattr__(self, "pattern", DetectorPattern.parse(self.pattern))
        if self.kind is not None:
            object.__setattr__(self, "kind", as_bell_kind(self.kind))
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "visibility", _check_visibility(self.visibility))

    @property
    def outcome(self) -> BellKind:
        return self.pattern.kind if self.pattern is not None else self.kind

    @property
    def label(self) -> str:
        return self.pattern.label if self.pattern is not None else self.kind.value

    def element(self) -> np.ndarray:
        if self.pattern is not None:
            return bsm_element(self.pattern, self.visibility)
        return bell_element(self.kind, self.visibility)


@dataclass(frozen=True)
class StageRecord:
    targets: Tuple[Hashable, Hashable]
    pattern: str
    outcome: BellKind
    visibility: float
    probability: float


@dataclass(frozen=True)
class SwapResult:
    final_state: DensityMatrix
    success_probability: float
    stage_log: Tuple[StageRecord, ...]

    @property
    def outcomes(self) -> Tuple[BellKind, ...]:
        return tuple(stage.outcome for stage in self.stage_log)


def chain_specs(
    n_pairs: int,
    patterns: Optional[Sequence[Union[DetectorPattern, str]]] = None,
    visibilities: Union[float, Sequence[float]] = 1.0,
) -> List[BsmSpec]:
    """BSMs on photons (2,3), (4,5), ..., (2n-2, 2n-1)"""
    n_stages = n_pairs - 1
    if patterns is None:
        patterns = [PLUS_PLUS] * n_stages
    if isinstance(visibilities, (int, float)):
        visibilities = [float(visibilities)] * n_stages
    if len(patterns) != n_stages or len(visibilities) != n_stages:
        raise InvalidInputError(
            f"{n_pairs} pairs need {n_stages} patterns and visibilities"
        )
    return [
        BsmSpec((2 * k + 2, 2 * k + 3), pattern=DetectorPattern.parse(p), visibility=v)
        for k, (p, v) in enumerate(zip(patterns, visibilities))
    ]


def apply_bsm(rho: DensityMatrix, spec: BsmSpec) -> Tuple[DensityMatrix, float]:
    """Condition `rho` on the BSM outcome and discard the measured photons"""
    n = rho.num_qubits
    positions = list(rho.register.positions(spec.targets))
    element = spec.element()
    probability = float(np.real(np.trace(embed(element, positions, n) @ rho.matrix)))
    if probability < settings.IMPOSSIBLE_OUTCOME_TOL:
        raise ImpossibleOutcomeError(
            f"BSM {spec.label} on photons {spec.targets} has probability {probability:.3e}",
            probability,
        )
    root = embed(psd_sqrt(element), positions, n)
    updated = DensityMatrix(
        root @ rho.matrix @ root.conj().T / probability, rho.register, validate=False
    )
    keep = [p for p in range(n) if p not in positions]
    reduced = partial_trace(updated, keep)
    return DensityMatrix(reduced.matrix, reduced.register), probability


def _check_chain(n_pairs: int, specs: Sequence[BsmSpec]) -> None:
    if n_pairs < 2:
        raise InvalidInputError(f"A swapping chain needs at least 2 pairs, got {n_pairs}")
    if len(specs) != n_pairs - 1:
        raise InvalidInputError(
            f"{n_pairs} pairs need {n_pairs - 1} BSMs, got {len(specs)}"
        )
    for k, spec in enumerate(specs):
        expected = {2 * k + 2, 2 * k + 3}
        if set(spec.targets) != expected:
            raise InvalidInputError(
                f"BSM {k + 1} must act on photons {sorted(expected)}, got {spec.targets}"
            )


def run_chain(
    n_pairs: int,
    specs: Sequence[BsmSpec],
    noise: Optional[NoiseModel] = None,
) -> SwapResult:
    """Swap entanglement along n_pairs singlet sources onto photons (1, 2n).

    Stages run on a fused register: after stage k only photons (1, 2k+2)
    remain and the next source is tensored in when its BSM is due.
    """
    _check_chain(n_pairs, specs)
    noise = noise or NoiseModel()
    try:
        rho = source_state(noise.whiteness_for(0), labels=(1, 2))
        log: List[StageRecord] = []
        for k, spec in enumerate(specs):
            incoming = source_state(
                noise.whiteness_for(k + 1), labels=(2 * k + 3, 2 * k + 4)
            )
            rho, probability = apply_bsm(rho.tensor(incoming), spec)
            logger.debug(
                "Stage %d: BSM %s on %s, V=%.4f, p=%.6g",
                k + 1, spec.label, spec.targets, spec.visibility, probability,
            )
            log.append(
                StageRecord(spec.targets, spec.label, spec.outcome, spec.visibility, probability)
            )
        success = float(np.prod([stage.probability for stage in log]))
        return SwapResult(rho, success, tuple(log))
    except Exception as e:
        logger.error(f"Swapping chain with {n_pairs} pairs failed: {e}")
        raise


def run_chain_dense(
    n_pairs: int,
    specs: Sequence[BsmSpec],
    noise: Optional[NoiseModel] = None,
) -> SwapResult:
    """Same as run_chain but on the full 2n-photon register from the start"""
    _check_chain(n_pairs, specs)
    noise = noise or NoiseModel()
    sources = [
        source_state(noise.whiteness_for(k), labels=(2 * k + 1, 2 * k + 2))
        for k in range(n_pairs)
    ]
    rho = reduce(lambda a, b: a.tensor(b), sources)
    log = []
    for spec in specs:
        rho, probability = apply_bsm(rho, spec)
        log.append(
            StageRecord(spec.targets, spec.label, spec.outcome, spec.visibility, probability)
        )
    success = float(np.prod([stage.probability for stage in log]))
    return SwapResult(rho, success, tuple(log))


def outcome_bookkeeping(
    n_pairs: int,
    outcomes: Sequence[Union[BellKind, str]],
    pair_kinds: Optional[Sequence[Union[BellKind, str]]] = None,
) -> BellKind:
    """Predict the Bell state left on photons (1, 2n) for noiseless sources.

    Every Bell state is (I x sigma)|Phi+> for a Pauli sigma; up to phase the
    final Pauli is the product of all source and outcome Paulis.
    """
    if len(outcomes) != n_pairs - 1:
        raise InvalidInputError(
            f"{n_pairs} pairs produce {n_pairs - 1} BSM outcomes, got {len(outcomes)}"
        )
    kinds = list(pair_kinds) if pair_kinds else [BellKind.PSI_MINUS] * n_pairs
    if len(kinds) != n_pairs:
        raise InvalidInputError(f"{len(kinds)} pair kinds given for {n_pairs} pairs")
    x = z = 0
    for kind in itertools.chain(kinds, outcomes):
        fx, fz = pauli_frame(kind)
        x ^= fx
        z ^= fz
    return kind_from_frame((x, z))


def frame_correction(
    kind: Union[BellKind, str], target: Union[BellKind, str] = BellKind.PSI_MINUS
) -> np.ndarray:
    """Local Pauli on the second photon mapping Bell state `kind` onto `target`"""
    x = pauli_frame(kind)[0] ^ pauli_frame(target)[0]
    z = pauli_frame(kind)[1] ^ pauli_frame(target)[1]
    op = np.eye(2, dtype=complex)
    if x:
        op = op @ pauli("X")
    if z:
        op = op @ pauli("Z")
    return op


def correct_frame(
    rho: DensityMatrix,
    kind: Union[BellKind, str],
    target: Union[BellKind, str] = BellKind.PSI_MINUS,
) -> DensityMatrix:
    """Apply the Pauli-frame correction to the last photon of a two-photon state"""
    if rho.num_qubits != 2:
        raise InvalidInputError("Frame correction acts on the final photon pair")
    u = np.kron(np.eye(2), frame_correction(kind, target))
    return DensityMatrix(u @ rho.matrix @ u.conj().T, rho.register)


def scheme_success_probability(
    n_pairs: int,
    scheme: str = "registered",
    noise: Optional[NoiseModel] = None,
) -> float:
    """Overall probability that every BSM fires an accepted pattern of `scheme`"""
    if scheme not in SCHEMES:
        raise InvalidInputError(
            f"Unknown detection scheme '{scheme}' (available: {', '.join(SCHEMES)})"
        )
    noise = noise or NoiseModel()
    accepted = SCHEMES[scheme]

    def branch(rho: DensityMatrix, stage: int) -> float:
        if stage == n_pairs - 1:
            return 1.0
        incoming = source_state(
            noise.whiteness_for(stage + 1), labels=(2 * stage + 3, 2 * stage + 4)
        )
        joint = rho.tensor(incoming)
        total = 0.0
        for pattern in accepted:
            spec = BsmSpec(
                (2 * stage + 2, 2 * stage + 3),
                pattern=pattern,
                visibility=noise.visibility_for(stage),
            )
            conditioned, probability = apply_bsm(joint, spec)
            total += probability * branch(conditioned, stage + 1)
        return total

    if n_pairs < 2:
        raise InvalidInputError(f"A swapping chain needs at least 2 pairs, got {n_pairs}")
    return branch(source_state(noise.whiteness_for(0), labels=(1, 2)), 0)


def analytic_witness(
    visibilities: Sequence[float],
    whiteness: Sequence[float] = (),
    background: float = 0.0,
) -> float:
    """Closed-form witness of the frame-corrected final pair.

    The pure-source part carries coherence prod(V) and witness -prod(V)/2;
    white source admixture and background contribute I/4, i.e. +1/4.
    """
    coherence = float(np.prod([_check_visibility(v) for v in visibilities]))
    purity = float(np.prod([1.0 - w for w in whiteness])) if whiteness else 1.0
    swapped = purity * (-coherence / 2) + (1 - purity) * 0.25
    return (1 - background) * swapped + background * 0.25
