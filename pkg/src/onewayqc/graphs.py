"""Graph states, the six-qubit DJ/BV resource and its n-query generalization."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core
from .core import KET0, KET1, KET_MINUS, KET_PLUS, StateVector, Z


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``1..num_vertices``."""

    num_vertices: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        canon = set()
        for e in self.edges:
            a, b = (int(v) for v in e)
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            for v in (a, b):
                if not 1 <= v <= self.num_vertices:
                    raise ValueError(f"vertex {v} outside 1..{self.num_vertices}")
            edge = (min(a, b), max(a, b))
            if edge in canon:
                raise ValueError(f"duplicate edge {edge}")
            canon.add(edge)
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def from_edges(cls, num_vertices: int, edges) -> "Graph":
        return cls(num_vertices, frozenset(tuple(e) for e in edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbours(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def relabel(self, mapping: dict[int, int]) -> "Graph":
        return Graph.from_edges(self.num_vertices, [(mapping[a], mapping[b]) for a, b in self.edges])

    def to_dict(self) -> dict:
        return {"num_vertices": self.num_vertices, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        try:
            return cls.from_edges(int(doc["num_vertices"]), [tuple(e) for e in doc["edges"]])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed graph document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "Graph":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ResourceLayout:
    """Role of each vertex in a DJ/BV resource.

    ``query_inputs`` is ordered by logical wire: entry ``k`` carries ``x_{k+1}``
    (``x_1`` is the most significant query bit).  ``ancilla_out`` is the vertex
    that ends up holding ``y xor f(x)``.
    """

    graph: Graph
    query_inputs: tuple[int, ...]
    ancilla_in: int
    ancilla_out: int
    oracle_qubits: tuple[int, ...]
    z_corrections: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.query_inputs)
        if self.graph.num_vertices != 2 * n + 2:
            raise ValueError(f"{n} queries need {2 * n + 2} vertices, graph has {self.graph.num_vertices}")
        listed = [*self.query_inputs, self.ancilla_in, self.ancilla_out, *self.oracle_qubits]
        if len(set(listed)) != len(listed):
            raise ValueError("layout vertices must be distinct")
        for v in listed:
            if not 1 <= v <= self.graph.num_vertices:
                raise ValueError(f"vertex {v} outside the graph")

    @property
    def outputs(self) -> tuple[int, ...]:
        return (*self.query_inputs, self.ancilla_out)

    @property
    def n(self) -> int:
        return len(self.query_inputs)


def graph_state_signs(n: int, edges) -> np.ndarray:
    """(-1)^{sum_edges x_a x_b} for every basis index, vertices 1-labelled."""
    idx = np.arange(1 << n)
    parity = np.zeros(1 << n, dtype=np.int64)
    for a, b in edges:
        parity ^= ((idx >> (n - a)) & 1) & ((idx >> (n - b)) & 1)
    return 1 - 2 * parity


def cluster_from_graph(g: Graph) -> StateVector:
    """|+>^{n} followed by CZ on every edge."""
    state = core.plus_state(g.num_vertices)
    for a, b in g.sorted_edges():
        state = core.apply_cz(state, a - 1, b - 1)
    return state


def _bell_like(sign: int) -> np.ndarray:
    # (|+>|0> +/- |->|1>)/sqrt2 as a [a, b] tensor
    return ((np.kron(KET_PLUS, KET0) + sign * np.kron(KET_MINUS, KET1)) / math.sqrt(2)).reshape(2, 2)


def closed_form_resource() -> StateVector:
    """The six-qubit resource written as two orthogonal product-of-pairs terms.

    Pair (1,2) and pair (6,5) are both in the "+" (resp. "-") Bell-like state
    while qubits (3,4) are ``|0+>`` (resp. ``|1->``).  Labels 1..6 map to
    indices 0..5.
    """
    t = np.zeros((2,) * 6, dtype=complex)
    for sign, q3, q4 in ((1, KET0, KET_PLUS), (-1, KET1, KET_MINUS)):
        pair = _bell_like(sign)
        # second pair is written with qubit 6 first: pair[q6, q5]
        t += np.einsum("ab,c,d,fe->abcdef", pair, q3, q4, pair)
    return StateVector(6, t.reshape(-1) / math.sqrt(2))


# x_1 rides on qubit 6 and x_2 on qubit 1; the coupling pattern of the
# measurement programs fixes this assignment.
SIX_QUBIT_EDGES = frozenset({(1, 2), (2, 3), (3, 4), (3, 5), (5, 6)})


def six_qubit_layout(graph: Graph | None = None) -> ResourceLayout:
    return ResourceLayout(
        graph=graph or Graph(6, SIX_QUBIT_EDGES),
        query_inputs=(6, 1),
        ancilla_in=4,
        ancilla_out=3,
        oracle_qubits=(5, 2),
    )


def six_qubit_resource() -> tuple[StateVector, ResourceLayout]:
    return closed_form_resource(), six_qubit_layout()


def apply_y_encoding(state: StateVector, layout: ResourceLayout | None = None) -> StateVector:
    """Sigma_z on the ancilla-in vertex: loads |y> = |-> onto the logical register."""
    layout = layout or six_qubit_layout()
    if state.num_qubits != layout.graph.num_vertices:
        raise ValueError(f"expected a {layout.graph.num_vertices}-qubit resource, got {state.num_qubits}")
    return core.apply_1q(state, layout.ancilla_in - 1, Z)


@dataclass(frozen=True)
class SearchHit:
    edges: frozenset[tuple[int, int]]
    z_corrections: tuple[int, ...]
    fidelity: float


def search_graph_for_state(target: StateVector, tol: float = 1e-12, allow_z: bool = True) -> list[SearchHit]:
    """Every edge set on ``target.num_qubits`` vertices whose graph state equals ``target``.

    Brute force over all 2^{n(n-1)/2} edge sets.  When no exact match exists
    and ``allow_z`` is set, the search is repeated with every pattern of
    per-vertex sigma_z corrections applied to the graph state.
    """
    n = target.num_qubits
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    if len(pairs) > 15:
        raise ValueError("edge-set search is limited to 6 vertices")
    idx = np.arange(1 << n)
    edge_bits = np.array(
        [((idx >> (n - a)) & 1) & ((idx >> (n - b)) & 1) for a, b in pairs], dtype=np.int64
    )
    masks = np.arange(1 << len(pairs), dtype=np.int64)
    choose = (masks[:, None] >> np.arange(len(pairs))) & 1
    parity = (choose @ edge_bits) & 1
    conj_target = target.amplitudes.conj() / math.sqrt(1 << n)

    def scan(z_set: tuple[int, ...]) -> list[SearchHit]:
        par = parity.copy()
        for v in z_set:
            par ^= (idx >> (n - v)) & 1
        fid = np.abs((1 - 2 * par) @ conj_target)
        hits = np.nonzero(fid >= 1 - tol)[0]
        return [
            SearchHit(frozenset(p for p, c in zip(pairs, choose[m]) if c), z_set, float(fid[m]))
            for m in hits
        ]

    found = scan(())
    if found or not allow_z:
        return found
    for r in range(1, n + 1):
        for z_set in itertools.combinations(range(1, n + 1), r):
            found.extend(scan(z_set))
    return found


def dj_bv_graph(n: int) -> tuple[Graph, ResourceLayout]:
    """Star of ``n`` two-vertex branches on the ancilla-out hub.

    Labels: query ``Q_i = 2i-1``, mediator ``M_i = 2i``, hub ``B = 2n+1``,
    ancilla-in ``A = 2n+2``.  Edges ``A-B`` and, per branch, ``Q_i-M_i``
    and ``M_i-B``.
    """
    if n < 2:
        raise ValueError("the generalized resource needs n >= 2")
    if 2 * n + 2 > core.MAX_QUBITS:
        raise ValueError(f"n={n} needs {2 * n + 2} qubits, above the cap of {core.MAX_QUBITS}")
    hub, anc = 2 * n + 1, 2 * n + 2
    edges = [(hub, anc)]
    for i in range(1, n + 1):
        q, m = 2 * i - 1, 2 * i
        edges += [(q, m), (m, hub)]
    g = Graph.from_edges(2 * n + 2, edges)
    layout = ResourceLayout(
        graph=g,
        query_inputs=tuple(2 * i - 1 for i in range(1, n + 1)),
        ancilla_in=anc,
        ancilla_out=hub,
        oracle_qubits=tuple(2 * i for i in range(1, n + 1)),
    )
    return g, layout


# dj_bv_graph(2) label -> six-qubit label (Q1=6, M1=5, Q2=1, M2=2, B=3, A=4)
TO_SIX_QUBIT_LABELS = {1: 6, 2: 5, 3: 1, 4: 2, 5: 3, 6: 4}
