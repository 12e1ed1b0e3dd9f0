"""Dense state-vector substrate.

Qubit 0 is the most significant bit of a basis index, so the register
``(q0, q1, ..., q_{n-1})`` in state ``|b0 b1 ... b_{n-1}>`` sits at index
``sum(b_k << (n - 1 - k))``.  States are treated as values: every operation
returns a new :class:`StateVector`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
IMPOSSIBLE_TOL = 1e-14


class ImpossibleBranchError(ValueError):
    """Raised when a forced measurement outcome has (numerically) zero probability."""

    def __init__(self, qubit: int, outcome: int, probability: float):
        super().__init__(
            f"outcome {outcome} on qubit {qubit} has probability {probability:.3e}"
        )
        self.qubit = qubit
        self.outcome = outcome
        self.probability = probability


def _check_size(num_qubits: int) -> None:
    if not isinstance(num_qubits, (int, np.integer)) or num_qubits < 0:
        raise ValueError(f"invalid qubit count {num_qubits!r}")
    if num_qubits > MAX_QUBITS:
        raise ValueError(f"{num_qubits} qubits exceeds the simulation cap of {MAX_QUBITS}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on ``num_qubits`` qubits.

    A zero-qubit register (a single amplitude) is allowed; it is what remains
    after every qubit has been measured out.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_size(self.num_qubits)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.num_qubits:
            raise ValueError(
                f"expected {1 << self.num_qubits} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        size = amps.shape[0]
        n = size.bit_length() - 1
        if size < 1 or 1 << n != size:
            raise ValueError(f"amplitude count {size} is not a power of two")
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(n, amps)

    @classmethod
    def product(cls, *factors) -> "StateVector":
        """Tensor product of single-qubit (or multi-qubit) amplitude vectors, first factor = qubit 0."""
        out = np.ones(1, dtype=complex)
        for f in factors:
            f = f.amplitudes if isinstance(f, StateVector) else np.asarray(f, dtype=complex)
            out = np.kron(out, f)
        return cls.from_amplitudes(out)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def permute(self, order: Sequence[int]) -> "StateVector":
        """Reorder qubits: new qubit ``k`` is old qubit ``order[k]``."""
        if sorted(order) != list(range(self.num_qubits)):
            raise ValueError(f"{order!r} is not a permutation of {self.num_qubits} qubits")
        if self.num_qubits == 0:
            return self
        return StateVector(self.num_qubits, np.transpose(self.tensor(), order).reshape(-1))

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


@dataclass(frozen=True, eq=False)
class Gate1Q:
    """A 2x2 unitary; construction fails for non-unitary matrices."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"single-qubit gate must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("gate has non-finite entries")
        err = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if err > UNITARY_TOL:
            raise ValueError(f"gate is not unitary (max |G^dag G - I| = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "Gate1Q") -> "Gate1Q":
        name = f"{self.name}{other.name}" if self.name and other.name else ""
        return Gate1Q(self.matrix @ other.matrix, name)

    def dagger(self) -> "Gate1Q":
        return Gate1Q(self.matrix.conj().T, f"{self.name}^dag" if self.name else "")

    def power(self, k: int) -> "Gate1Q":
        if k < 0:
            return self.dagger().power(-k)
        return Gate1Q(np.linalg.matrix_power(self.matrix, k), self.name if k == 1 else "")

    def __repr__(self) -> str:
        return f"Gate1Q({self.name or self.matrix.tolist()!r})"


_S2 = 1 / math.sqrt(2)
I = Gate1Q(np.eye(2), "I")
H = Gate1Q(np.array([[_S2, _S2], [_S2, -_S2]]), "H")
X = Gate1Q(np.array([[0, 1], [1, 0]]), "X")
Y = Gate1Q(np.array([[0, -1j], [1j, 0]]), "Y")
Z = Gate1Q(np.array([[1, 0], [0, -1]]), "Z")


def rz(alpha: float) -> Gate1Q:
    """``exp(-i alpha Z / 2)`` = diag(e^{-i alpha/2}, e^{i alpha/2})."""
    if not math.isfinite(alpha):
        raise ValueError("rotation angle must be finite")
    return Gate1Q(
        np.diag([cmath.exp(-0.5j * alpha), cmath.exp(0.5j * alpha)]), f"Rz({alpha:g})"
    )


KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([_S2, _S2], dtype=complex)
KET_MINUS = np.array([_S2, -_S2], dtype=complex)


@dataclass(frozen=True)
class MeasurementBasis:
    """Computational basis (``angle is None``) or the planar basis B(angle).

    Outcome 0 is ``|0>`` or ``|angle_+> = (|0> + e^{i angle}|1>)/sqrt2``;
    outcome 1 is ``|1>`` or ``|angle_->``.
    """

    angle: float | None = None

    def __post_init__(self) -> None:
        if self.angle is not None and not math.isfinite(self.angle):
            raise ValueError("basis angle must be finite")

    @classmethod
    def computational(cls) -> "MeasurementBasis":
        return cls(None)

    @classmethod
    def planar(cls, angle: float) -> "MeasurementBasis":
        return cls(float(angle))

    @property
    def is_computational(self) -> bool:
        return self.angle is None

    def vector(self, outcome: int) -> np.ndarray:
        if outcome not in (0, 1):
            raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
        if self.angle is None:
            return KET1 if outcome else KET0
        sign = -1 if outcome else 1
        return np.array([_S2, sign * _S2 * cmath.exp(1j * self.angle)], dtype=complex)

    def label(self) -> str:
        if self.angle is None:
            return "Z"
        return f"B({self.angle!r})"


def new_basis_state(num_qubits: int, index: int) -> StateVector:
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    _check_size(num_qubits)
    if not 0 <= index < 1 << num_qubits:
        raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def plus_state(num_qubits: int) -> StateVector:
    _check_size(num_qubits)
    dim = 1 << num_qubits
    return StateVector(num_qubits, np.full(dim, 1 / math.sqrt(dim), dtype=complex))


def _check_qubits(state: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not isinstance(q, (int, np.integer)) or not 0 <= q < state.num_qubits:
            raise IndexError(f"qubit {q!r} out of range for {state.num_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"qubit indices must be distinct, got {qubits}")


def _apply_matrix(amps: np.ndarray, n: int, qubit: int, m: np.ndarray) -> np.ndarray:
    view = amps.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    return np.einsum("ij,ajb->aib", m, view).reshape(-1)


def apply_1q(state: StateVector, qubit: int, gate: Gate1Q) -> StateVector:
    _check_qubits(state, qubit)
    return StateVector(
        state.num_qubits, _apply_matrix(state.amplitudes, state.num_qubits, qubit, gate.matrix)
    )


def _all_ones_mask(n: int, qubits: Sequence[int]) -> np.ndarray:
    idx = np.arange(1 << n)
    mask = np.ones(1 << n, dtype=bool)
    for q in qubits:
        mask &= ((idx >> (n - 1 - q)) & 1).astype(bool)
    return mask


def _phase_flip(state: StateVector, qubits: Sequence[int]) -> StateVector:
    amps = state.amplitudes.copy()
    amps[_all_ones_mask(state.num_qubits, qubits)] *= -1
    return StateVector(state.num_qubits, amps)


def apply_cz(state: StateVector, q1: int, q2: int) -> StateVector:
    _check_qubits(state, q1, q2)
    return _phase_flip(state, (q1, q2))


def apply_ccz(state: StateVector, q1: int, q2: int, q3: int) -> StateVector:
    _check_qubits(state, q1, q2, q3)
    return _phase_flip(state, (q1, q2, q3))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubits(state, control, target)
    state = apply_1q(state, target, H)
    state = apply_cz(state, control, target)
    return apply_1q(state, target, H)


def apply_toffoli(state: StateVector, c1: int, c2: int, target: int) -> StateVector:
    _check_qubits(state, c1, c2, target)
    state = apply_1q(state, target, H)
    state = apply_ccz(state, c1, c2, target)
    return apply_1q(state, target, H)


class Measurement(NamedTuple):
    outcome: int
    state: StateVector
    probability: float
    relabel: dict[int, int]


def _project(state: StateVector, qubit: int, basis: MeasurementBasis, outcome: int):
    n = state.num_qubits
    bra = basis.vector(outcome).conj()
    view = state.amplitudes.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    return np.einsum("j,ajb->ab", bra, view).reshape(-1)


def _relabel_after_removal(n: int, qubit: int) -> dict[int, int]:
    return {q: (q if q < qubit else q - 1) for q in range(n) if q != qubit}


def outcome_probabilities(state: StateVector, qubit: int, basis: MeasurementBasis) -> tuple[float, float]:
    _check_qubits(state, qubit)
    p = []
    for outcome in (0, 1):
        v = _project(state, qubit, basis, outcome)
        p.append(float(np.vdot(v, v).real))
    return p[0], p[1]


def force_measure(
    state: StateVector, qubit: int, basis: MeasurementBasis, outcome: int
) -> Measurement:
    """Project onto the requested outcome and drop the measured qubit.

    Raises :class:`ImpossibleBranchError` if the outcome probability is below
    ``IMPOSSIBLE_TOL``.
    """
    _check_qubits(state, qubit)
    projected = _project(state, qubit, basis, outcome)
    prob = float(np.vdot(projected, projected).real)
    if prob < IMPOSSIBLE_TOL:
        raise ImpossibleBranchError(qubit, outcome, prob)
    post = StateVector(state.num_qubits - 1, projected / math.sqrt(prob))
    return Measurement(outcome, post, prob, _relabel_after_removal(state.num_qubits, qubit))


def measure(
    state: StateVector, qubit: int, basis: MeasurementBasis, rng: np.random.Generator
) -> Measurement:
    p0, p1 = outcome_probabilities(state, qubit, basis)
    outcome = int(rng.random() * (p0 + p1) >= p0)
    return force_measure(state, qubit, basis, outcome)


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|`` (overlap magnitude, not squared)."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = 1e-12) -> bool:
    return fidelity(a, b) >= 1.0 - tol


def reduced_density_matrix(state: StateVector, keep: Sequence[int]) -> np.ndarray:
    """Partial trace onto ``keep`` (in the given order)."""
    _check_qubits(state, *keep)
    rest = [q for q in range(state.num_qubits) if q not in keep]
    t = np.transpose(state.tensor(), list(keep) + rest).reshape(1 << len(keep), -1)
    return t @ t.conj().T
