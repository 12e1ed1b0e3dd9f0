"""Post-selected polarization-photon model of fusion-based resource generation.

Each photon is a polarization qubit (|H> = |0>, |V> = |1>).  A PBS fusion on
modes ``a, b`` succeeds, with one photon per output port, with probability
``<psi|P|psi>`` for ``P = |HH><HH| + |VV><VV|``; the success branch is the
renormalized projection.  Failure means a detection pattern that is
post-selected away, so both photons are marked lost.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence, Union

import numpy as np

from . import core, graphs
from .core import Gate1Q, ImpossibleBranchError, StateVector

PAIR_STATE = np.array([1, 1, 1, -1], dtype=complex) / 2  # (1 (x) H)(|HH> + |VV>)/sqrt2
PREP_TOL = 1e-10


class FusionError(ValueError):
    pass


@dataclass(frozen=True)
class PhotonRegister:
    """``state`` over modes 1..m (mode ``i`` is qubit ``i-1``)."""

    state: StateVector
    alive: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.alive) != self.state.num_qubits:
            raise ValueError("alive flags do not match the number of modes")

    @classmethod
    def vacuum(cls, num_modes: int) -> "PhotonRegister":
        """All modes in |H>; ``prepare_*`` then sets the intended input states."""
        return cls(core.new_basis_state(num_modes, 0), (True,) * num_modes)

    @classmethod
    def plus(cls, num_modes: int) -> "PhotonRegister":
        return cls(core.plus_state(num_modes), (True,) * num_modes)

    @property
    def num_modes(self) -> int:
        return self.state.num_qubits

    def check_alive(self, *modes: int) -> None:
        for m in modes:
            if not 1 <= m <= self.num_modes:
                raise FusionError(f"mode {m} outside 1..{self.num_modes}")
            if not self.alive[m - 1]:
                raise FusionError(f"photon in mode {m} was lost in a failed fusion")

    def rotate(self, mode: int, gate: Gate1Q) -> "PhotonRegister":
        self.check_alive(mode)
        return replace(self, state=core.apply_1q(self.state, mode - 1, gate))


class FusionOutcome(NamedTuple):
    success: bool
    probability: float
    post_state: PhotonRegister


def _parity_mask(n: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return ((idx >> (n - a)) & 1) == ((idx >> (n - b)) & 1)


def fusion_probability(reg: PhotonRegister, a: int, b: int) -> float:
    reg.check_alive(a, b)
    if a == b:
        raise FusionError("fusion needs two distinct modes")
    amps = reg.state.amplitudes
    return float(np.sum(np.abs(amps[_parity_mask(reg.num_modes, a, b)]) ** 2))


def fuse(
    reg: PhotonRegister,
    a: int,
    b: int,
    rng: np.random.Generator | None = None,
    forced: bool = False,
) -> FusionOutcome:
    """PBS fusion of modes ``a`` and ``b``.

    With ``forced`` the success branch is taken (``ImpossibleBranchError`` if
    its probability vanishes); otherwise the branch is drawn from ``rng``.
    """
    p = fusion_probability(reg, a, b)
    if forced:
        success = True
        if p < core.IMPOSSIBLE_TOL:
            raise ImpossibleBranchError(a - 1, 0, p)
    else:
        if rng is None:
            raise ValueError("sampled fusion needs an rng")
        success = bool(rng.random() < p)
    mask = _parity_mask(reg.num_modes, a, b)
    amps = reg.state.amplitudes.copy()
    if success:
        amps[~mask] = 0
        return FusionOutcome(True, p, replace(reg, state=StateVector(reg.num_modes, amps / math.sqrt(p))))
    alive = list(reg.alive)
    alive[a - 1] = alive[b - 1] = False
    # keep the register normalized; the lost photons' polarizations carry no meaning
    amps[mask] = 0
    return FusionOutcome(False, p, PhotonRegister(StateVector(reg.num_modes, amps / math.sqrt(1 - p)), tuple(alive)))


def _is_pure_on(reg: PhotonRegister, modes: Sequence[int], target: np.ndarray) -> bool:
    rho = core.reduced_density_matrix(reg.state, [m - 1 for m in modes])
    return float(np.vdot(target, rho @ target).real) > 1 - PREP_TOL


def build_branch(
    reg: PhotonRegister,
    pair: tuple[int, int],
    fresh: tuple[int, int],
    rng: np.random.Generator | None = None,
    forced: bool = False,
) -> FusionOutcome:
    """Grow one ``hub - mediator - query`` branch from two fresh |+> photons.

    ``pair[1]`` is the hub photon of the already-fused pair.  The first fusion
    joins the hub with ``fresh[0]`` (the mediator), the second joins the
    mediator with ``fresh[1]`` (the query); each fusion is followed by H on
    the newly attached photon.  The returned probability is the product of
    both fusion probabilities (1/4 for |+> inputs).
    """
    reg.check_alive(*pair, *fresh)
    if len({*pair, *fresh}) != 4:
        raise FusionError("pair and fresh modes must be four distinct modes")
    for m in fresh:
        if not _is_pure_on(reg, [m], core.KET_PLUS):
            raise FusionError(f"fresh photon in mode {m} is not in |+>")
    rho = core.reduced_density_matrix(reg.state, [m - 1 for m in pair])
    if abs(np.trace(rho @ rho).real - 1) < PREP_TOL and not _is_pure_on(reg, pair, PAIR_STATE):
        raise FusionError(f"modes {pair} are not in the fused pair state")
    hub, (med, query) = pair[1], fresh
    total = 1.0
    for keep, leaf in ((hub, med), (med, query)):
        out = fuse(reg, keep, leaf, rng=rng, forced=forced)
        total *= out.probability
        if not out.success:
            return FusionOutcome(False, total, out.post_state)
        reg = out.post_state.rotate(leaf, core.H)
    return FusionOutcome(True, total, reg)


def prepare_pair(reg: PhotonRegister, a: int, b: int) -> PhotonRegister:
    """Load the fused pair state on two fresh |H> modes."""
    _require_vacuum(reg, a)
    _require_vacuum(reg, b)
    state = core.apply_1q(reg.state, a - 1, core.H)
    state = core.apply_cnot(state, a - 1, b - 1)
    state = core.apply_1q(state, b - 1, core.H)
    return replace(reg, state=state)


def prepare_plus(reg: PhotonRegister, mode: int) -> PhotonRegister:
    _require_vacuum(reg, mode)
    return reg.rotate(mode, core.H)


def _require_vacuum(reg: PhotonRegister, mode: int) -> None:
    reg.check_alive(mode)
    if not _is_pure_on(reg, [mode], core.KET0):
        raise FusionError(f"mode {mode} was already prepared")


def grow_dj_bv_resource(
    n: int, rng: np.random.Generator | None = None, forced: bool = False
) -> tuple[FusionOutcome, graphs.ResourceLayout]:
    """Nucleus pair (ancilla-in, hub) plus ``n`` branches, labelled as in :func:`graphs.dj_bv_graph`."""
    g, layout = graphs.dj_bv_graph(n)
    reg = PhotonRegister.vacuum(g.num_vertices)
    reg = prepare_pair(reg, layout.ancilla_in, layout.ancilla_out)
    total = 1.0
    for q, m in zip(layout.query_inputs, layout.oracle_qubits):
        reg = prepare_plus(prepare_plus(reg, m), q)
        out = build_branch(reg, (layout.ancilla_in, layout.ancilla_out), (m, q), rng=rng, forced=forced)
        total *= out.probability
        if not out.success:
            return FusionOutcome(False, total, out.post_state), layout
        reg = out.post_state
    return FusionOutcome(True, total, reg), layout


class ScalingProbability(NamedTuple):
    probability: float
    branches: int


def scaling_success_probability(n: int) -> ScalingProbability:
    """Analytic chance of growing the n-query resource: 1/4 per branch."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return ScalingProbability(0.25**n, n)


# --- fusion networks --------------------------------------------------------


@dataclass(frozen=True)
class Prepare:
    modes: tuple[int, ...]
    state: str = "plus"  # "plus" (one mode) or "pair" (two modes)

    def __post_init__(self) -> None:
        want = {"plus": 1, "pair": 2}.get(self.state)
        if want is None:
            raise ValueError(f"unknown preparation {self.state!r}")
        if len(self.modes) != want:
            raise ValueError(f"{self.state} preparation takes {want} mode(s)")


@dataclass(frozen=True)
class Rotate:
    mode: int
    gate: str = "H"  # H, X, Z or rz:<angle>

    def matrix(self) -> Gate1Q:
        if self.gate.startswith("rz:"):
            return core.rz(float(self.gate[3:]))
        try:
            return {"H": core.H, "X": core.X, "Z": core.Z, "I": core.I}[self.gate]
        except KeyError:
            raise ValueError(f"unknown rotation {self.gate!r}") from None


@dataclass(frozen=True)
class Fuse:
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError("fuse operands must be distinct")


Operation = Union[Prepare, Rotate, Fuse]


@dataclass(frozen=True)
class FusionNetwork:
    num_modes: int
    operations: tuple[Operation, ...]
    target_state: StateVector | None = None

    def __post_init__(self) -> None:
        prepared: set[int] = set()
        for op in self.operations:
            if isinstance(op, Prepare):
                for m in op.modes:
                    if not 1 <= m <= self.num_modes:
                        raise ValueError(f"mode {m} outside 1..{self.num_modes}")
                    if m in prepared:
                        raise ValueError(f"mode {m} prepared twice")
                    prepared.add(m)
            else:
                used = (op.mode,) if isinstance(op, Rotate) else (op.a, op.b)
                for m in used:
                    if m not in prepared:
                        raise ValueError(f"mode {m} used before preparation")
        if self.target_state is not None and self.target_state.num_qubits != self.num_modes:
            raise ValueError("target state size does not match the number of modes")

    @property
    def num_fusions(self) -> int:
        return sum(isinstance(op, Fuse) for op in self.operations)

    def to_dict(self) -> dict:
        ops = []
        for op in self.operations:
            if isinstance(op, Prepare):
                ops.append({"op": "prepare", "modes": list(op.modes), "state": op.state})
            elif isinstance(op, Rotate):
                ops.append({"op": "rotate", "mode": op.mode, "gate": op.gate})
            else:
                ops.append({"op": "fuse", "modes": [op.a, op.b]})
        doc: dict = {"num_modes": self.num_modes, "operations": ops}
        if self.target_state is not None:
            doc["target"] = [[float(a.real), float(a.imag)] for a in self.target_state.amplitudes]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FusionNetwork":
        ops: list[Operation] = []
        try:
            for d in doc["operations"]:
                kind = d["op"]
                if kind == "prepare":
                    ops.append(Prepare(tuple(int(m) for m in d["modes"]), d.get("state", "plus")))
                elif kind == "rotate":
                    ops.append(Rotate(int(d["mode"]), d.get("gate", "H")))
                elif kind == "fuse":
                    a, b = d["modes"]
                    ops.append(Fuse(int(a), int(b)))
                else:
                    raise ValueError(f"unknown network operation {kind!r}")
            target = doc.get("target")
            if target == "six_qubit_resource":
                target_state = graphs.closed_form_resource()
            elif target is not None:
                target_state = StateVector.from_amplitudes([complex(re, im) for re, im in target], normalize=True)
            else:
                target_state = None
            return cls(int(doc["num_modes"]), tuple(ops), target_state)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed network document: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "FusionNetwork":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def tree_network(graph: graphs.Graph, root: int, target: StateVector | None = None) -> FusionNetwork:
    """Fusion network growing a tree-shaped graph state from |+> photons.

    Vertices are attached in breadth-first order: fuse the parent with a fresh
    |+> photon, then H on the child.  One fusion per edge.
    """
    ops: list[Operation] = [Prepare((v,)) for v in range(1, graph.num_vertices + 1)]
    seen, frontier = {root}, [root]
    while frontier:
        nxt = []
        for v in frontier:
            for w in sorted(graph.neighbours(v)):
                if w in seen:
                    continue
                seen.add(w)
                ops += [Fuse(v, w), Rotate(w, "H")]
                nxt.append(w)
        frontier = nxt
    if len(seen) != graph.num_vertices or len(graph.edges) != graph.num_vertices - 1:
        raise ValueError("tree_network needs a connected tree")
    return FusionNetwork(graph.num_vertices, tuple(ops), target)


def six_photon_network() -> FusionNetwork:
    """Five fusions on six |+> photons realizing the six-qubit resource (hub = mode 3)."""
    return tree_network(graphs.Graph(6, graphs.SIX_QUBIT_EDGES), root=3, target=graphs.closed_form_resource())


def fusion_pair_network() -> FusionNetwork:
    """Two |+> photons and one fusion."""
    return FusionNetwork(2, (Prepare((1,)), Prepare((2,)), Fuse(1, 2)))


def branch_network() -> FusionNetwork:
    """One fused pair (modes 1, 2; hub = 2) and one branch grown onto it from modes 3, 4."""
    return FusionNetwork(
        4,
        (
            Prepare((1, 2), "pair"),
            Prepare((3,)),
            Prepare((4,)),
            Fuse(2, 3),
            Rotate(3, "H"),
            Fuse(3, 4),
            Rotate(4, "H"),
        ),
        graphs.cluster_from_graph(graphs.Graph.from_edges(4, [(1, 2), (2, 3), (3, 4)])),
    )


def run_network(
    net: FusionNetwork, rng: np.random.Generator | None = None, forced: bool = False
) -> tuple[FusionOutcome, list[float]]:
    """One pass through the network; stops at the first failed fusion.

    Returns the final outcome and the per-fusion success probabilities seen.
    """
    reg = PhotonRegister.vacuum(net.num_modes)
    probs: list[float] = []
    for op in net.operations:
        if isinstance(op, Prepare):
            reg = prepare_plus(reg, op.modes[0]) if op.state == "plus" else prepare_pair(reg, *op.modes)
        elif isinstance(op, Rotate):
            reg = reg.rotate(op.mode, op.matrix())
        else:
            out = fuse(reg, op.a, op.b, rng=rng, forced=forced)
            probs.append(out.probability)
            if not out.success:
                return FusionOutcome(False, math.prod(probs), out.post_state), probs
            reg = out.post_state
    return FusionOutcome(True, math.prod(probs), reg), probs


@dataclass(frozen=True)
class ChipRun:
    trials: int
    success_count: int
    empirical_probability: float | None
    analytic_probability: float
    conditional_state: StateVector | None
    target_fidelity: float | None
    max_state_deviation: float | None = None  # only filled by per-trial simulation

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "success_count": self.success_count,
            "empirical_probability": self.empirical_probability,
            "analytic_probability": self.analytic_probability,
            "target_fidelity": self.target_fidelity,
            "max_state_deviation": self.max_state_deviation,
        }


def worker_seeds(seed: int, workers: int) -> list[int]:
    """Worker ``k`` draws from ``default_rng(seed + k)``."""
    return [seed + k for k in range(workers)]


def _split(trials: int, workers: int) -> list[int]:
    base, extra = divmod(trials, workers)
    return [base + (k < extra) for k in range(workers)]


def generate_chip_state(
    net: FusionNetwork,
    trials: int,
    seed: int = 0,
    workers: int = 1,
    per_trial: bool = False,
) -> ChipRun:
    """Repeat the network ``trials`` times with sampled fusion outcomes.

    The success branch is deterministic, so by default the per-fusion
    probabilities along it are computed once and each trial draws one uniform
    per fusion until the first failure.  ``per_trial=True`` instead pushes
    every trial through the full state-vector simulation and also reports the
    largest deviation between conditional states of successful trials.
    """
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if workers < 1:
        raise ValueError("workers must be positive")
    try:
        success_path, probs = run_network(net, forced=True)
        conditional = success_path.post_state.state
        analytic = success_path.probability
    except ImpossibleBranchError:
        conditional, analytic, probs = None, 0.0, None

    def work(args: tuple[int, int]) -> tuple[int, float]:
        count, wseed = args
        rng = np.random.default_rng(wseed)
        if not per_trial:
            if probs is None or count == 0:
                return 0, 0.0
            draws = rng.random((count, len(probs)))
            return int(np.all(draws < np.asarray(probs), axis=1).sum()), 0.0
        ok, dev = 0, 0.0
        for _ in range(count):
            out, _ = run_network(net, rng=rng)
            if out.success:
                ok += 1
                dev = max(dev, 1.0 - core.fidelity(out.post_state.state, conditional))
        return ok, dev

    jobs = list(zip(_split(trials, workers), worker_seeds(seed, workers)))
    if workers == 1:
        results = [work(jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    successes = sum(r[0] for r in results)
    state = conditional if successes else None
    fid = None
    if state is not None and net.target_state is not None:
        fid = core.fidelity(state, net.target_state)
    return ChipRun(
        trials=trials,
        success_count=successes,
        empirical_probability=successes / trials if trials else None,
        analytic_probability=analytic,
        conditional_state=state,
        target_fidelity=fid,
        max_state_deviation=max(r[1] for r in results) if per_trial and successes else None,
    )
