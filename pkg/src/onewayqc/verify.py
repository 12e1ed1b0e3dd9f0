"""Cross-model verification suite: every check returns a pass flag and a numerical residual."""

from __future__ import annotations

import fnmatch
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import algorithms as alg
from . import core, graphs, mbqc, oracles, photonic
from .oracles import BV_TO_BB, BlackBoxId, OracleClass

PIPELINE_TOL = 1e-10
ALGEBRA_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    wall_time: float = 0.0
    detail: str = ""

    def to_dict(self, timings: bool = True) -> dict:
        d = {"name": self.name, "passed": self.passed, "residual": self.residual, "detail": self.detail}
        if timings:
            d["wall_time"] = round(self.wall_time, 6)
        return d


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, timings: bool = True) -> dict:
        return {
            "passed": self.passed,
            "max_residual": self.max_residual,
            "checks": [c.to_dict(timings) for c in self.checks],
        }


Check = Callable[[], tuple[bool, float, str]]


def _black_box_check(bb: BlackBoxId, pattern: mbqc.MeasurementPattern) -> Check:
    def run():
        state, layout = mbqc.dj_resource()
        target = alg.mbqc_target(bb)
        branches = mbqc.enumerate_branches(state, pattern, bb=bb)
        worst = max(1 - core.fidelity(b.record.state_on(layout.outputs), target) for b in branches)
        total = sum(b.probability for b in branches)
        ok = len(branches) == 8 and abs(total - 1) < PIPELINE_TOL and worst < PIPELINE_TOL
        return ok, max(worst, abs(total - 1)), f"{len(branches)} branches, sum p = {total:.15f}"

    return run


def _dj_verdicts(patterns: Mapping[BlackBoxId, mbqc.MeasurementPattern]) -> Check:
    def run():
        state, layout = mbqc.dj_resource()
        worst, bad = 0.0, []
        for bb, pattern in patterns.items():
            expected = 1.0 if bb in (BlackBoxId.I, BlackBoxId.II) else 0.0
            for b in mbqc.enumerate_branches(state, pattern, bb=bb):
                dist = alg.query_distribution(b.record.state_on(layout.outputs), [0, 1])
                worst = max(worst, abs(dist.get("00", 0.0) - expected))
            circuit = alg.run_dj_circuit(oracles.bb_truth_table(bb))
            want = alg.Verdict.CONSTANT if expected else alg.Verdict.BALANCED
            if circuit.verdict is not want:
                bad.append(bb.value)
        return worst < PIPELINE_TOL and not bad, worst, f"circuit disagreements: {bad}"

    return run


def _bv_correspondence() -> tuple[bool, float, str]:
    bad = [s for s, bb in BV_TO_BB.items() if oracles.bv_oracle(s) != oracles.bb_truth_table(bb)]
    return not bad, float(len(bad)), f"mismatches: {bad}"


def _bv_exactness(patterns: Mapping[BlackBoxId, mbqc.MeasurementPattern]) -> Check:
    def run():
        worst = 0.0
        for n in range(1, 7):
            for k in range(1 << n):
                s = oracles.int_to_bits(k, n)
                for refined in (False, True):
                    r = alg.run_bv_circuit(s, refined)
                    worst = max(worst, 1 - r.probability if r.recovered_s == s else 1.0)
        state, layout = mbqc.dj_resource()
        for s, bb in BV_TO_BB.items():
            for b in mbqc.enumerate_branches(state, patterns[bb], bb=bb):
                dist = alg.query_distribution(b.record.state_on(layout.outputs), [0, 1])
                worst = max(worst, 1 - dist.get(s, 0.0))
        return worst < PIPELINE_TOL, worst, "circuit n<=6 (standard+refined), MBQC n=2 all branches"

    return run


def _delta_identity() -> tuple[bool, float, str]:
    worst = max(alg.delta_identity_residual(n) for n in range(1, 7))
    return worst == 0, float(worst), "exact integer sums, n=1..6"


def _resource_search() -> tuple[bool, float, str]:
    target = graphs.closed_form_resource()
    hits = graphs.search_graph_for_state(target, tol=ALGEBRA_TOL)
    if not hits:
        return False, 1.0, "no edge set reproduces the closed form"
    hit = hits[0]
    via_graph = graphs.cluster_from_graph(graphs.Graph(6, hit.edges))
    for v in hit.z_corrections:
        via_graph = core.apply_1q(via_graph, v - 1, core.Z)
    res = 1 - core.fidelity(via_graph, target)
    g2, _ = graphs.dj_bv_graph(2)
    relabelled = g2.relabel(graphs.TO_SIX_QUBIT_LABELS)
    ok = res < ALGEBRA_TOL and relabelled.edges == hit.edges and hit.edges == graphs.SIX_QUBIT_EDGES
    return ok, res, f"{len(hits)} hit(s): {sorted(hit.edges)} z={list(hit.z_corrections)}"


def _dj3_toffoli() -> tuple[bool, float, str]:
    table = oracles.induced_table(oracles.dj3_example_circuit(), 3)
    o = oracles.OracleSpec(3, table)
    verdict = alg.run_dj_circuit(o)
    refined = oracles.phase_table(oracles.dj3_refined_circuit(), 3)
    ok = (
        table == oracles.DJ3_EXAMPLE_TABLE
        and oracles.classify(o) is OracleClass.BALANCED
        and verdict.verdict is alg.Verdict.BALANCED
        and refined == oracles.DJ3_EXAMPLE_TABLE
    )
    return ok, verdict.p_all_zeros, f"induced table {list(table)}"


def _controllable_n3() -> tuple[bool, float, str]:
    n = 3
    g, layout = graphs.dj_bv_graph(n)
    state = graphs.apply_y_encoding(graphs.cluster_from_graph(g), layout)
    worst, count = 0.0, 0
    for r in range(n + 1):
        for cnots in itertools.combinations(range(1, n + 1), r):
            for flip in (0, 1):
                pattern = mbqc.controllable_cnot_pattern(layout, list(cnots), flip)
                target = alg.dj_circuit_output(alg.controllable_oracle_table(n, list(cnots), flip))
                for b in mbqc.enumerate_branches(state, pattern):
                    worst = max(worst, 1 - core.fidelity(b.record.state_on(layout.outputs), target))
                    count += 1
    return worst < PIPELINE_TOL, worst, f"{count} branches over 16 oracles"


def _measurement_order() -> tuple[bool, float, str]:
    state, layout = mbqc.dj_resource()
    worst = 0.0
    for bb in BlackBoxId:
        base = mbqc.pattern_for_bb(bb)
        for outcomes in itertools.product((0, 1), repeat=3):
            forced = dict(zip(base.measured, outcomes))
            ref = mbqc.run_pattern(state, base, forced=forced).state_on(layout.outputs)
            for order in itertools.permutations(base.measured):
                rec = mbqc.run_pattern(state, base.reordered(order), forced=forced)
                worst = max(worst, 1 - core.fidelity(rec.state_on(layout.outputs), ref))
    return worst < ALGEBRA_TOL, worst, "all 6 orders x 8 branches x 8 boxes"


def _refined_consistency() -> tuple[bool, float, str]:
    worst = 0.0
    tables = [oracles.OracleSpec(2, t) for t in itertools.product((0, 1), repeat=4)]
    tables.append(oracles.OracleSpec(3, oracles.DJ3_EXAMPLE_TABLE))
    for o in tables:
        if oracles.classify(o) is OracleClass.NEITHER:
            continue
        a = alg.run_dj_circuit(o, refined=False).query_register_distribution
        b = alg.run_dj_circuit(o, refined=True).query_register_distribution
        for k in set(a) | set(b):
            worst = max(worst, abs(a.get(k, 0.0) - b.get(k, 0.0)))
    for n in range(1, 7):
        for k in range(1 << n):
            o = oracles.bv_oracle(oracles.int_to_bits(k, n))
            local = np.ones(1, dtype=complex)
            for i in range(n):
                local = np.kron(local, np.diag([1, -1]) if (k >> (n - 1 - i)) & 1 else np.eye(2))
            worst = max(worst, float(np.max(np.abs(oracles.phase_oracle_unitary(o).matrix() - local))))
    return worst < ALGEBRA_TOL, worst, "refined vs standard distributions; BV phase oracle vs local σz"


def _fusion_statistics(seed: int) -> Check:
    def run():
        reg = photonic.PhotonRegister.plus(2)
        p_fuse = photonic.fuse(reg, 1, 2, forced=True).probability
        mc_fuse = photonic.generate_chip_state(photonic.fusion_pair_network(), 100_000, seed=seed)
        branch = photonic.generate_chip_state(photonic.branch_network(), 100_000, seed=seed)
        chip = photonic.generate_chip_state(photonic.six_photon_network(), 100_000, seed=seed)
        residual = max(
            abs(p_fuse - 0.5),
            abs(branch.analytic_probability - 0.25),
            1 - (chip.target_fidelity or 0.0),
        )
        ok = (
            abs(p_fuse - 0.5) < 1e-14
            and abs(mc_fuse.empirical_probability - 0.5) <= 0.01
            and abs(branch.analytic_probability - 0.25) < 1e-14
            and abs(branch.empirical_probability - 0.25) <= 0.01
            and chip.target_fidelity is not None
            and chip.target_fidelity >= 1 - PIPELINE_TOL
            and abs(chip.empirical_probability - 1 / 32) <= 0.005
        )
        detail = (
            f"fuse MC {mc_fuse.empirical_probability:.5f}, branch MC {branch.empirical_probability:.5f}, "
            f"chip MC {chip.empirical_probability:.5f}"
        )
        return ok, residual, detail

    return run


def _checks(patterns: Mapping[BlackBoxId, mbqc.MeasurementPattern], seed: int) -> dict[str, Check]:
    checks: dict[str, Check] = {}
    for bb in BlackBoxId:
        checks[f"black_box_equivalence[{bb.value}]"] = _black_box_check(bb, patterns[bb])
    checks["dj_verdicts"] = _dj_verdicts(patterns)
    checks["bv_correspondence"] = _bv_correspondence
    checks["bv_exactness"] = _bv_exactness(patterns)
    checks["delta_identity"] = _delta_identity
    checks["resource_search"] = _resource_search
    checks["dj3_toffoli"] = _dj3_toffoli
    checks["controllable_cnot_n3"] = _controllable_n3
    checks["measurement_order"] = _measurement_order
    checks["refined_consistency"] = _refined_consistency
    checks["fusion_statistics"] = _fusion_statistics(seed)
    return checks


def check_names() -> list[str]:
    return list(_checks(mbqc.all_patterns(), 0))


def _timed(name: str, check: Check) -> CheckResult:
    start = time.perf_counter()
    try:
        ok, residual, detail = check()
    except Exception as exc:  # a crashing check is a failed check
        ok, residual, detail = False, float("inf"), f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(ok), float(residual), time.perf_counter() - start, detail)


def verify_all(
    filter: str | None = None,
    patterns: Mapping[BlackBoxId, mbqc.MeasurementPattern] | None = None,
    seed: int = 0,
    workers: int = 1,
) -> Report:
    """Run every check (or those whose name matches the glob/substring ``filter``).

    ``patterns`` overrides the measurement programs; used for fault injection.
    """
    pats = dict(mbqc.all_patterns())
    if patterns:
        pats.update(patterns)
    selected = [
        (name, check)
        for name, check in _checks(pats, seed).items()
        if filter is None or filter in name or fnmatch.fnmatch(name, filter)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda nc: _timed(*nc), selected))
    else:
        results = [_timed(name, check) for name, check in selected]
    return Report(results)
