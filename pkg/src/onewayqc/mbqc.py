"""Measurement programs with terminal feed-forward on cluster states.

Each of the eight DJ_2 black boxes has a fixed choice of bases for qubits
2, 4, 5 and feed-forward strings for 1, 3, 6.  Feed-forward strings are products
of gates written left to right; the rightmost factor acts on the state first.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import core
from .core import Gate1Q, ImpossibleBranchError, MeasurementBasis, StateVector
from .graphs import ResourceLayout, apply_y_encoding, closed_form_resource, six_qubit_layout
from .oracles import BlackBoxId

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class Parity:
    """Affine expression over GF(2): ``constant + sum(variables) mod 2``."""

    variables: tuple[str, ...] = ()
    constant: int = 0

    def __post_init__(self) -> None:
        counts: dict[str, int] = {}
        for v in self.variables:
            counts[v] = counts.get(v, 0) ^ 1
        object.__setattr__(self, "variables", tuple(sorted(v for v, c in counts.items() if c)))
        object.__setattr__(self, "constant", int(self.constant) & 1)

    @classmethod
    def of(cls, *terms: "str | int | Parity") -> "Parity":
        variables: list[str] = []
        constant = 0
        for t in terms:
            if isinstance(t, Parity):
                variables += t.variables
                constant += t.constant
            elif isinstance(t, int):
                constant += t
            else:
                variables.append(t)
        return cls(tuple(variables), constant)

    @classmethod
    def parse(cls, text: str) -> "Parity":
        parts = [p.strip() for p in str(text).split("+") if p.strip()]
        if not parts:
            raise ValueError(f"empty exponent {text!r}")
        terms: list[str | int] = []
        for p in parts:
            if p in ("0", "1"):
                terms.append(int(p))
            elif re.fullmatch(r"s\d+", p):
                terms.append(p)
            else:
                raise ValueError(f"bad exponent term {p!r} in {text!r}")
        return cls.of(*terms)

    def evaluate(self, outcomes: Mapping[str, int]) -> int:
        total = self.constant
        for v in self.variables:
            if v not in outcomes:
                raise KeyError(f"feed-forward needs outcome {v!r}, which was not recorded")
            total += int(outcomes[v])
        return total & 1

    def __str__(self) -> str:
        parts = list(self.variables)
        if self.constant or not parts:
            parts.append(str(self.constant))
        return "+".join(parts)


ONE = Parity((), 1)


@dataclass(frozen=True)
class Term:
    """``gate ** exponent`` with gate in {H, X, Z, Rz}."""

    gate: str
    exponent: Parity = ONE
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.gate not in ("H", "X", "Z", "Rz"):
            raise ValueError(f"unsupported feed-forward gate {self.gate!r}")
        if (self.gate == "Rz") != (self.angle is not None):
            raise ValueError("Rz terms need an angle and other gates must not carry one")

    def matrix(self, outcomes: Mapping[str, int]) -> Gate1Q:
        if self.exponent.evaluate(outcomes) == 0:
            return core.I
        if self.gate == "Rz":
            return core.rz(self.angle)
        return {"H": core.H, "X": core.X, "Z": core.Z}[self.gate]

    def to_dict(self) -> dict:
        d = {"gate": self.gate, "exponent": str(self.exponent)}
        if self.angle is not None:
            d["angle"] = self.angle
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Term":
        return cls(d["gate"], Parity.parse(d.get("exponent", "1")), d.get("angle"))


@dataclass(frozen=True)
class FeedForwardSpec:
    terms: tuple[Term, ...]
    notation: str = ""

    def variables(self) -> set[str]:
        return {v for t in self.terms for v in t.exponent.variables}

    def __matmul__(self, other: "FeedForwardSpec") -> "FeedForwardSpec":
        notation = " ".join(p for p in (self.notation, other.notation) if p)
        return FeedForwardSpec(self.terms + other.terms, notation)

    def to_dict(self) -> dict:
        return {"notation": self.notation, "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "FeedForwardSpec":
        return cls(tuple(Term.from_dict(t) for t in d["terms"]), d.get("notation", ""))


def eval_feedforward(spec: FeedForwardSpec, outcomes: Mapping[str, int]) -> Gate1Q:
    gate = core.I
    for term in spec.terms:
        gate = gate @ term.matrix(outcomes)
    return gate


# building blocks of the feed-forward strings

def ff_h() -> FeedForwardSpec:
    return FeedForwardSpec((Term("H"),), "H")


def ff_x(*exponent) -> FeedForwardSpec:
    p = Parity.of(*exponent) if exponent else ONE
    return FeedForwardSpec((Term("X", p),), "σx" if p == ONE else f"σx^{{{p}}}")


def ff_z(*exponent) -> FeedForwardSpec:
    p = Parity.of(*exponent) if exponent else ONE
    return FeedForwardSpec((Term("Z", p),), "σz" if p == ONE else f"σz^{{{p}}}")


def ff_rz(angle: float, label: str) -> FeedForwardSpec:
    return FeedForwardSpec((Term("Rz", ONE, angle),), f"Rz({label})")


def chi(var: str, hub_var: str = "s4") -> FeedForwardSpec:
    """``sigma_z^{var + hub} Rz(-pi/2)``."""
    spec = ff_z(var, hub_var) @ ff_rz(-HALF_PI, "-π/2")
    return FeedForwardSpec(spec.terms, f"χ^{{{var}}}")


def zeta(hub_var: str = "s4", mediator_vars: Sequence[str] = ("s2", "s5")) -> FeedForwardSpec:
    """``sigma_z^{hub} sigma_x^{sum of mediators} H``."""
    spec = ff_z(hub_var) @ ff_x(*mediator_vars) @ ff_h()
    return FeedForwardSpec(spec.terms, "ζ")


def zeta_tilde(hub_var: str = "s4", mediator_vars: Sequence[str] = ("s2", "s5")) -> FeedForwardSpec:
    spec = zeta(hub_var, mediator_vars) @ ff_rz(-HALF_PI, "-π/2")
    return FeedForwardSpec(spec.terms, "ζ̃")


def _named(spec: FeedForwardSpec, notation: str) -> FeedForwardSpec:
    return FeedForwardSpec(spec.terms, notation)


@dataclass(frozen=True)
class MeasurementPattern:
    """Ordered single-qubit measurements, then one feed-forward gate per survivor.

    Qubit labels are 1-based; outcome of qubit ``j`` is the variable ``s{j}``.
    """

    steps: tuple[tuple[int, MeasurementBasis], ...]
    feedforward: Mapping[int, FeedForwardSpec] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        measured = [q for q, _ in self.steps]
        if len(set(measured)) != len(measured):
            raise ValueError("a qubit is measured twice")
        clash = set(self.feedforward) & set(measured)
        if clash:
            raise ValueError(f"feed-forward targets measured qubits {sorted(clash)}")
        declared = {f"s{q}" for q in measured}
        for q, spec in self.feedforward.items():
            missing = spec.variables() - declared
            if missing:
                raise ValueError(f"feed-forward on qubit {q} references undeclared outcomes {sorted(missing)}")

    @property
    def measured(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.steps)

    def reordered(self, order: Sequence[int]) -> "MeasurementPattern":
        by_qubit = dict(self.steps)
        if sorted(order) != sorted(by_qubit):
            raise ValueError(f"{order!r} is not a reordering of {self.measured}")
        return MeasurementPattern(tuple((q, by_qubit[q]) for q in order), self.feedforward, self.name)

    def with_feedforward(self, qubit: int, spec: FeedForwardSpec) -> "MeasurementPattern":
        ff = dict(self.feedforward)
        ff[qubit] = spec
        return MeasurementPattern(self.steps, ff, self.name)

    def to_dict(self) -> dict:
        steps = []
        for q, basis in self.steps:
            step: dict = {"qubit": q, "basis": "computational" if basis.is_computational else "planar"}
            if not basis.is_computational:
                step["angle"] = basis.angle
            steps.append(step)
        return {
            "name": self.name,
            "steps": steps,
            "feedforward": {str(q): self.feedforward[q].to_dict() for q in sorted(self.feedforward)},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MeasurementPattern":
        steps = []
        for s in d["steps"]:
            if s["basis"] == "computational":
                basis = MeasurementBasis.computational()
            elif s["basis"] == "planar":
                basis = MeasurementBasis.planar(float(s["angle"]))
            else:
                raise ValueError(f"unknown basis kind {s['basis']!r}")
            steps.append((int(s["qubit"]), basis))
        ff = {int(q): FeedForwardSpec.from_dict(v) for q, v in d.get("feedforward", {}).items()}
        return cls(tuple(steps), ff, d.get("name", ""))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


COMPUTATIONAL = MeasurementBasis.computational()
B0 = MeasurementBasis.planar(0.0)
B_HALF_PI = MeasurementBasis.planar(HALF_PI)

# Which oracle qubit is measured in B(pi/2) (i.e. mediates a CNOT onto y).
_Q2_ACTIVE = {BlackBoxId.V, BlackBoxId.VI, BlackBoxId.VII, BlackBoxId.VIII}
_Q5_ACTIVE = {BlackBoxId.III, BlackBoxId.IV, BlackBoxId.VII, BlackBoxId.VIII}


def _ff3(bb: BlackBoxId) -> FeedForwardSpec:
    z, zt = zeta(), zeta_tilde()
    return {
        BlackBoxId.I: z,
        BlackBoxId.II: _named(ff_x() @ z, "σx ζ"),
        BlackBoxId.III: zt,
        BlackBoxId.IV: _named(ff_x() @ zt, "σx ζ̃"),
        BlackBoxId.V: zt,
        BlackBoxId.VI: _named(ff_x() @ zt, "σx ζ̃"),
        BlackBoxId.VII: _named(z @ ff_z(), "ζ σz"),
        BlackBoxId.VIII: _named(ff_x() @ z @ ff_z(), "σx ζ σz"),
    }[bb]


def pattern_for_bb(bb: BlackBoxId | str) -> MeasurementPattern:
    """Measurement program and feed-forward for one DJ_2 black box on the six-qubit resource."""
    bb = BlackBoxId.parse(bb)
    m2 = B_HALF_PI if bb in _Q2_ACTIVE else COMPUTATIONAL
    m5 = B_HALF_PI if bb in _Q5_ACTIVE else COMPUTATIONAL
    ff1 = _named(ff_h() @ (chi("s2") if bb in _Q2_ACTIVE else ff_z("s2")),
                 "H χ^{s2}" if bb in _Q2_ACTIVE else "H σz^{s2}")
    ff6 = _named(ff_h() @ (chi("s5") if bb in _Q5_ACTIVE else ff_z("s5")),
                 "H χ^{s5}" if bb in _Q5_ACTIVE else "H σz^{s5}")
    return MeasurementPattern(
        steps=((2, m2), (4, B0), (5, m5)),
        feedforward={1: ff1, 3: _ff3(bb), 6: ff6},
        name=f"BB({bb.value})",
    )


def controllable_cnot_pattern(layout: ResourceLayout, cnots: Sequence[int], flip: int = 0) -> MeasurementPattern:
    """Oracle ``y ^= flip ^ xor_{i in cnots} x_i`` on a :func:`graphs.dj_bv_graph` resource.

    ``cnots`` are 1-based query indices.  Mediators of active branches are
    measured in B(pi/2), the rest computationally; the ancilla-in vertex is
    measured in B(0).  For ``n = 2`` this reproduces the DJ_2 programs up to
    a global phase in the hub correction.
    """
    active = set(cnots)
    if not active <= set(range(1, layout.n + 1)):
        raise ValueError(f"CNOT controls {sorted(active)} outside 1..{layout.n}")
    hub_var = f"s{layout.ancilla_in}"
    med_vars = [f"s{m}" for m in layout.oracle_qubits]
    steps = [(m, B_HALF_PI if i + 1 in active else COMPUTATIONAL) for i, m in enumerate(layout.oracle_qubits)]
    steps.append((layout.ancilla_in, B0))
    ff: dict[int, FeedForwardSpec] = {}
    for i, (q, m) in enumerate(zip(layout.query_inputs, layout.oracle_qubits)):
        var = f"s{m}"
        ff[q] = ff_h() @ (chi(var, hub_var) if i + 1 in active else ff_z(var))
    hub = zeta(hub_var, med_vars)
    for _ in range(len(active)):
        hub = hub @ ff_rz(-HALF_PI, "-π/2")
    if flip:
        hub = ff_x() @ hub
    ff[layout.ancilla_out] = hub
    return MeasurementPattern(tuple(steps), ff, name=f"cnots={sorted(active)} flip={flip}")


@dataclass(frozen=True)
class MbqcRunRecord:
    outcomes: dict[int, int]
    labels: tuple[int, ...]
    pre_ff_state: StateVector
    post_ff_state: StateVector
    probability: float
    bb: BlackBoxId | None = None

    def state_on(self, order: Sequence[int]) -> StateVector:
        """Post-feed-forward state with qubits arranged in label order ``order``."""
        return self.post_ff_state.permute([self.labels.index(q) for q in order])

    def outcome_key(self) -> tuple[int, ...]:
        return tuple(self.outcomes[q] for q in sorted(self.outcomes))


def run_pattern(
    state: StateVector,
    pattern: MeasurementPattern,
    rng: np.random.Generator | None = None,
    forced: Mapping[int, int] | None = None,
    labels: Sequence[int] | None = None,
    bb: BlackBoxId | None = None,
) -> MbqcRunRecord:
    """Measure ``pattern.steps`` in order, then apply the feed-forward gates.

    Outcomes listed in ``forced`` (qubit label -> bit) are post-selected; the
    rest are sampled from ``rng``.
    """
    labels = list(labels) if labels is not None else list(range(1, state.num_qubits + 1))
    if len(labels) != state.num_qubits:
        raise ValueError("label list does not match the register size")
    forced = dict(forced or {})
    outcomes: dict[int, int] = {}
    probability = 1.0
    for q, basis in pattern.steps:
        if q not in labels:
            raise ValueError(f"pattern measures qubit {q}, which is not in the register")
        pos = labels.index(q)
        if q in forced:
            m = core.force_measure(state, pos, basis, forced[q])
        else:
            if rng is None:
                raise ValueError(f"no outcome forced for qubit {q} and no rng given")
            m = core.measure(state, pos, basis, rng)
        state = m.state
        probability *= m.probability
        outcomes[q] = m.outcome
        labels.pop(pos)
    pre = state
    variables = {f"s{q}": s for q, s in outcomes.items()}
    for q, spec in pattern.feedforward.items():
        if q not in labels:
            raise ValueError(f"feed-forward target {q} is not a surviving qubit")
        state = core.apply_1q(state, labels.index(q), eval_feedforward(spec, variables))
    return MbqcRunRecord(outcomes, tuple(labels), pre, state, probability, bb)


@dataclass(frozen=True)
class Branch:
    outcomes: tuple[int, ...]
    probability: float
    record: MbqcRunRecord


def enumerate_branches(
    state: StateVector,
    pattern: MeasurementPattern,
    labels: Sequence[int] | None = None,
    bb: BlackBoxId | None = None,
) -> list[Branch]:
    """Every outcome combination with nonzero probability, each pushed through feed-forward.

    ``outcomes`` in each branch follow the order of ``pattern.steps``.
    """
    measured = pattern.measured
    if len(measured) > 16:
        raise ValueError("branch enumeration is limited to 16 measured qubits")
    branches = []
    for bits in itertools.product((0, 1), repeat=len(measured)):
        try:
            rec = run_pattern(state, pattern, forced=dict(zip(measured, bits)), labels=labels, bb=bb)
        except ImpossibleBranchError:
            continue
        branches.append(Branch(bits, rec.probability, rec))
    return branches


def dj_resource() -> tuple[StateVector, ResourceLayout]:
    """The y-encoded six-qubit resource every DJ_2/BV_2 program runs on."""
    layout = six_qubit_layout()
    return apply_y_encoding(closed_form_resource(), layout), layout


def all_patterns() -> dict[BlackBoxId, MeasurementPattern]:
    return {bb: pattern_for_bb(bb) for bb in BlackBoxId}

