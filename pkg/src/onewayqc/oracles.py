"""Truth-table oracles, the eight two-bit black boxes, and their circuits."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import core
from .core import StateVector


@dataclass(frozen=True)
class OracleSpec:
    """``f: {0,1}^n -> {0,1}`` stored as ``table[x]``; bit 1 of ``x`` is the MSB."""

    n: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("oracle width must be at least 1")
        table = tuple(int(b) for b in self.table)
        if len(table) != 1 << self.n:
            raise ValueError(f"table for n={self.n} needs {1 << self.n} entries, got {len(table)}")
        if any(b not in (0, 1) for b in table):
            raise ValueError("table entries must be bits")
        object.__setattr__(self, "table", table)

    def __call__(self, x: int) -> int:
        return self.table[x]

    def to_dict(self) -> dict:
        return {"n": self.n, "table": list(self.table)}

    @classmethod
    def from_dict(cls, doc: dict) -> "OracleSpec":
        try:
            return cls(int(doc["n"]), tuple(doc["table"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed oracle document: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "OracleSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


class OracleClass(str, enum.Enum):
    CONSTANT = "constant"
    BALANCED = "balanced"
    NEITHER = "neither"


class BlackBoxId(str, enum.Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"
    V = "v"
    VI = "vi"
    VII = "vii"
    VIII = "viii"

    @classmethod
    def parse(cls, value: "str | BlackBoxId") -> "BlackBoxId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown black box {value!r}; expected one of i..viii") from None


ALL_BOXES = tuple(BlackBoxId)

_BB_TABLES = {
    BlackBoxId.I: (0, 0, 0, 0),
    BlackBoxId.II: (1, 1, 1, 1),
    BlackBoxId.III: (0, 0, 1, 1),
    BlackBoxId.IV: (1, 1, 0, 0),
    BlackBoxId.V: (0, 1, 0, 1),
    BlackBoxId.VI: (1, 0, 1, 0),
    BlackBoxId.VII: (0, 1, 1, 0),
    BlackBoxId.VIII: (1, 0, 0, 1),
}

# hidden string -> black box
BV_TO_BB = {
    "00": BlackBoxId.I,
    "01": BlackBoxId.V,
    "10": BlackBoxId.III,
    "11": BlackBoxId.VII,
}


def bb_truth_table(bb: BlackBoxId | str) -> OracleSpec:
    return OracleSpec(2, _BB_TABLES[BlackBoxId.parse(bb)])


def classify(o: OracleSpec) -> OracleClass:
    ones = sum(o.table)
    if ones in (0, len(o.table)):
        return OracleClass.CONSTANT
    if 2 * ones == len(o.table):
        return OracleClass.BALANCED
    return OracleClass.NEITHER


def parse_bits(s: str) -> tuple[int, ...]:
    if not s or any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return tuple(int(c) for c in s)


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def int_to_bits(value: int, n: int) -> str:
    return format(value, f"0{n}b") if n else ""


def dot_parity(a: int, b: int) -> int:
    return bin(a & b).count("1") & 1


def bv_oracle(s: str) -> OracleSpec:
    n = len(parse_bits(s))
    sval = int(s, 2)
    return OracleSpec(n, tuple(dot_parity(sval, x) for x in range(1 << n)))


class OracleUnitary:
    """Applier for a truth-table oracle, standard (``|x>|y> -> |x>|y^f(x)>``)
    or phase (``|x> -> (-1)^{f(x)}|x>``) form.  Ancilla is the last qubit."""

    def __init__(self, oracle: OracleSpec, phase: bool):
        self.oracle = oracle
        self.phase = phase
        self.num_qubits = oracle.n if phase else oracle.n + 1
        table = np.array(oracle.table, dtype=np.int64)
        dim = 1 << self.num_qubits
        idx = np.arange(dim)
        if phase:
            self._signs = 1 - 2 * table
            self._perm = idx
        else:
            self._signs = np.ones(dim, dtype=np.int64)
            # index = 2x + y; target index 2x + (y ^ f(x))
            self._perm = idx ^ table[idx >> 1]

    def __call__(self, state: StateVector) -> StateVector:
        if state.num_qubits != self.num_qubits:
            raise ValueError(
                f"oracle acts on {self.num_qubits} qubits, state has {state.num_qubits}"
            )
        amps = np.empty_like(state.amplitudes)
        amps[self._perm] = state.amplitudes * self._signs
        return StateVector(state.num_qubits, amps)

    def matrix(self) -> np.ndarray:
        dim = 1 << self.num_qubits
        m = np.zeros((dim, dim), dtype=complex)
        m[self._perm, np.arange(dim)] = self._signs
        return m


def standard_oracle_unitary(o: OracleSpec) -> OracleUnitary:
    return OracleUnitary(o, phase=False)


def phase_oracle_unitary(o: OracleSpec) -> OracleUnitary:
    return OracleUnitary(o, phase=True)


class Op(NamedTuple):
    """One gate of a small circuit: ``name`` in {x, z, cnot, cz, toffoli, ccz}."""

    name: str
    qubits: tuple[int, ...]


def apply_circuit(state: StateVector, ops: Sequence[Op]) -> StateVector:
    for op in ops:
        q = op.qubits
        if op.name == "x":
            state = core.apply_1q(state, q[0], core.X)
        elif op.name == "z":
            state = core.apply_1q(state, q[0], core.Z)
        elif op.name == "cnot":
            state = core.apply_cnot(state, *q)
        elif op.name == "cz":
            state = core.apply_cz(state, *q)
        elif op.name == "toffoli":
            state = core.apply_toffoli(state, *q)
        elif op.name == "ccz":
            state = core.apply_ccz(state, *q)
        else:
            raise ValueError(f"unknown gate {op.name!r}")
    return state


def circuit_matrix(ops: Sequence[Op], num_qubits: int) -> np.ndarray:
    cols = []
    for k in range(1 << num_qubits):
        cols.append(apply_circuit(core.new_basis_state(num_qubits, k), ops).amplitudes)
    return np.stack(cols, axis=1)


def induced_table(ops: Sequence[Op], n: int) -> tuple[int, ...]:
    """Read f(x) off a standard-form circuit by running it on every |x>|0>."""
    table = []
    for x in range(1 << n):
        out = apply_circuit(core.new_basis_state(n + 1, x << 1), ops)
        p1 = float(np.sum(np.abs(out.amplitudes[1::2]) ** 2))
        if abs(p1 - round(p1)) > 1e-12:
            raise ValueError(f"circuit is not a classical oracle on input {x}")
        table.append(int(round(p1)))
    return tuple(table)


# register (x_1, x_2, y) -> qubits (0, 1, 2)
_CNOT1 = Op("cnot", (0, 2))
_CNOT2 = Op("cnot", (1, 2))
_XY = Op("x", (2,))

_BB_CIRCUITS = {
    BlackBoxId.I: (),
    BlackBoxId.II: (_XY,),
    BlackBoxId.III: (_CNOT1,),
    BlackBoxId.IV: (_CNOT1, _XY),
    BlackBoxId.V: (_CNOT2,),
    BlackBoxId.VI: (_CNOT2, _XY),
    BlackBoxId.VII: (_CNOT1, _CNOT2),
    BlackBoxId.VIII: (_CNOT1, _CNOT2, _XY),
}


def circuit_for_bb(bb: BlackBoxId | str) -> list[Op]:
    return list(_BB_CIRCUITS[BlackBoxId.parse(bb)])


DJ3_EXAMPLE_TABLE = (0, 0, 0, 1, 1, 1, 1, 0)


def dj3_example_circuit() -> list[Op]:
    """Toffoli (controls x_2, x_3; target y) then CNOT (x_1 -> y) on (x_1, x_2, x_3, y)."""
    return [Op("toffoli", (1, 2, 3)), Op("cnot", (0, 3))]


def dj3_refined_circuit() -> list[Op]:
    """Phase-kickback image of :func:`dj3_example_circuit` on (x_1, x_2, x_3).

    With ``y = |->`` the Toffoli kicks back as CZ(x_2, x_3) and the CNOT as
    Z(x_1).
    """
    return [Op("cz", (1, 2)), Op("z", (0,))]


def dj3_literal_refined_circuit() -> list[Op]:
    """C^2Z on (x_1, x_2, x_3) plus CZ(x_1, x_3), read word-for-word from the
    gate description of the refined variant.  Kept for comparison only: its
    phase table is not the example's balanced function."""
    return [Op("ccz", (0, 1, 2)), Op("cz", (0, 2))]


def phase_table(ops: Sequence[Op], n: int) -> tuple[int, ...]:
    """Read f(x) off a diagonal +/-1 phase circuit."""
    m = circuit_matrix(ops, n)
    diag = np.diag(m)
    if np.max(np.abs(m - np.diag(diag))) > 1e-12 or np.max(np.abs(np.abs(diag.real) - 1)) > 1e-12:
        raise ValueError("circuit is not a +/-1 phase oracle")
    return tuple(int(d.real < 0) for d in diag)
