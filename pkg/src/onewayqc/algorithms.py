"""Deutsch-Jozsa and Bernstein-Vazirani in the circuit and one-way models."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import core, graphs, mbqc
from .core import StateVector
from .oracles import (
    BV_TO_BB,
    BlackBoxId,
    OracleClass,
    OracleSpec,
    bb_truth_table,
    bv_oracle,
    classify,
    int_to_bits,
    parse_bits,
    phase_oracle_unitary,
    standard_oracle_unitary,
)

VERDICT_TOL = 1e-10


class PromiseViolation(ValueError):
    """The oracle is neither constant nor balanced."""


class Verdict(str, enum.Enum):
    CONSTANT = "constant"
    BALANCED = "balanced"


@dataclass(frozen=True)
class DjVerdict:
    verdict: Verdict
    query_register_distribution: dict[str, float]
    amplitude_all_zeros: complex

    @property
    def p_all_zeros(self) -> float:
        return abs(self.amplitude_all_zeros) ** 2


@dataclass(frozen=True)
class BvResult:
    recovered_s: str
    probability: float
    bb: BlackBoxId | None = None


def query_distribution(state: StateVector, queries: list[int]) -> dict[str, float]:
    """Born distribution of the listed qubits (0-based) in the computational basis."""
    probs = np.diag(core.reduced_density_matrix(state, queries)).real
    n = len(queries)
    return {int_to_bits(k, n): float(p) for k, p in enumerate(probs) if p > 1e-15}


def _verdict(amplitude: complex) -> Verdict:
    return Verdict.CONSTANT if abs(amplitude) > 1 - VERDICT_TOL else Verdict.BALANCED


def dj_circuit_output(o: OracleSpec, refined: bool = False) -> StateVector:
    """State after the oracle and the final Hadamard layer (ancilla last, if present)."""
    n = o.n
    if refined:
        state = core.plus_state(n)
        state = phase_oracle_unitary(o)(state)
    else:
        state = StateVector.product(*([core.KET_PLUS] * n), core.KET_MINUS)
        state = standard_oracle_unitary(o)(state)
    for q in range(n):
        state = core.apply_1q(state, q, core.H)
    return state


def run_dj_circuit(o: OracleSpec, refined: bool = False) -> DjVerdict:
    if classify(o) is OracleClass.NEITHER:
        raise PromiseViolation(f"oracle table {o.table} is neither constant nor balanced")
    out = dj_circuit_output(o, refined)
    if refined:
        amp = complex(out.amplitudes[0])
    else:
        # <0...0|<-| psi>
        amp = complex((out.amplitudes[0] - out.amplitudes[1]) / math.sqrt(2))
    return DjVerdict(_verdict(amp), query_distribution(out, list(range(o.n))), amp)


def run_bv_circuit(s: str, refined: bool = False) -> BvResult:
    o = bv_oracle(s)
    out = dj_circuit_output(o, refined)
    dist = query_distribution(out, list(range(o.n)))
    best = max(dist, key=dist.get)
    return BvResult(best, dist[best])


@dataclass(frozen=True)
class MbqcDjRun:
    verdict: DjVerdict
    record: mbqc.MbqcRunRecord
    query_outcome: str


def run_dj_mbqc(bb: BlackBoxId | str, rng: np.random.Generator) -> MbqcDjRun:
    """Sampled one-way run: oracle pattern, feed-forward, then computational readout of x_1 x_2."""
    bb = BlackBoxId.parse(bb)
    state, layout = mbqc.dj_resource()
    record = mbqc.run_pattern(state, mbqc.pattern_for_bb(bb), rng=rng, bb=bb)
    out = record.state_on(layout.outputs)  # (x_1, x_2, y)
    dist = query_distribution(out, [0, 1])
    # global phase of the record is arbitrary; only |<00-|psi>| carries the verdict
    amp = complex((out.amplitudes[0] - out.amplitudes[1]) / math.sqrt(2))
    verdict = DjVerdict(_verdict(amp), dist, amp)
    bits = []
    for q in range(2):
        m = core.measure(out, 0, core.MeasurementBasis.computational(), rng)
        bits.append(m.outcome)
        out = m.state
    return MbqcDjRun(verdict, record, "".join(map(str, bits)))


def run_bv_mbqc(s: str, rng: np.random.Generator) -> tuple[BvResult, MbqcDjRun]:
    if s not in BV_TO_BB:
        raise ValueError(f"the six-qubit resource handles 2-bit strings, got {s!r}")
    bb = BV_TO_BB[s]
    run = run_dj_mbqc(bb, rng)
    dist = run.verdict.query_register_distribution
    return BvResult(run.query_outcome, dist.get(run.query_outcome, 0.0), bb), run


def controllable_oracle_table(n: int, cnots: list[int], flip: int = 0) -> OracleSpec:
    mask = sum(1 << (n - i) for i in cnots)
    return OracleSpec(n, tuple(flip ^ (bin(mask & x).count("1") & 1) for x in range(1 << n)))


def run_bv_mbqc_general(s: str, rng: np.random.Generator) -> BvResult:
    """BV_n on the generalized resource via controllable CNOTs (n >= 2)."""
    bits = parse_bits(s)
    n = len(bits)
    g, layout = graphs.dj_bv_graph(n)
    state = graphs.apply_y_encoding(graphs.cluster_from_graph(g), layout)
    cnots = [i + 1 for i, b in enumerate(bits) if b]
    record = mbqc.run_pattern(state, mbqc.controllable_cnot_pattern(layout, cnots), rng=rng)
    out = record.state_on(layout.outputs)
    dist = query_distribution(out, list(range(n)))
    readout = []
    for _ in range(n):
        m = core.measure(out, 0, core.MeasurementBasis.computational(), rng)
        readout.append(str(m.outcome))
        out = m.state
    got = "".join(readout)
    return BvResult(got, dist.get(got, 0.0))


def classical_worst_case_queries(n: int) -> int:
    if n < 1:
        raise ValueError("n must be at least 1")
    return (1 << (n - 1)) + 1


def adversarial_query_run(n: int, balanced: bool = True) -> tuple[list[int], OracleSpec]:
    """Adversary that answers 0 to the first 2^{n-1} distinct queries.

    A deterministic classical algorithm querying ``x = 0, 1, 2, ...`` cannot
    decide before the (2^{n-1}+1)-th query, whose answer then selects the
    class.  Returns the answers seen and the oracle the adversary commits to.
    """
    half = 1 << (n - 1)
    table = [0] * half + [1 if balanced else 0] * half
    o = OracleSpec(n, tuple(table))
    answers = []
    for x in range(1 << n):
        answers.append(o(x))
        if len(set(answers)) > 1 or len(answers) > half:
            break
    return answers, o


def delta_identity_residual(n: int) -> int:
    """max |sum_x (-1)^{s.x + x.z} - 2^n delta_{s,z}| over all s, z (exact integers)."""
    dim = 1 << n
    worst = 0
    for s in range(dim):
        for z in range(dim):
            total = sum(1 - 2 * (bin((s & x) ^ (x & z)).count("1") & 1) for x in range(dim))
            worst = max(worst, abs(total - (dim if s == z else 0)))
    return worst


def mbqc_target(bb: BlackBoxId) -> StateVector:
    """(H (x) H (x) I) U_f |+>|+>|->, on (x_1, x_2, y)."""
    return dj_circuit_output(bb_truth_table(bb))
