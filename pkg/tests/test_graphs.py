import itertools
import json
import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onewayqc import core, graphs
from onewayqc.core import KET0, KET1, KET_MINUS, KET_PLUS, MeasurementBasis, StateVector
from onewayqc.graphs import Graph

E_STAR = {(1, 2), (2, 3), (3, 4), (3, 5), (5, 6)}


def _kron(*ms):
    return reduce(np.kron, ms)


def _dense_cz_diag(n, a, b):
    """Diagonal of CZ_{ab} built from full projector kron products (independent of core)."""
    p1 = np.diag([0, 1])
    factors = [np.eye(2)] * n
    factors[a - 1] = p1
    factors[b - 1] = p1
    return np.diag(np.eye(1 << n) - 2 * _kron(*factors))


def test_cluster_single_vertex():
    assert core.fidelity(graphs.cluster_from_graph(Graph(1)), StateVector.product(KET_PLUS)) == pytest.approx(1)


def test_cluster_two_vertices():
    expected = (np.kron(KET0, KET_PLUS) + np.kron(KET1, KET_MINUS)) / math.sqrt(2)
    got = graphs.cluster_from_graph(Graph.from_edges(2, [(1, 2)]))
    np.testing.assert_allclose(got.amplitudes, expected, atol=1e-15)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 4)])
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(1, 2), (2, 1)])


def test_graph_document_round_trip(tmp_path):
    g, _ = graphs.dj_bv_graph(3)
    path = tmp_path / "g.json"
    path.write_text(g.dumps())
    assert Graph.load(path) == g
    with pytest.raises(ValueError):
        Graph.from_dict({"edges": []})


def test_closed_form_is_normalized():
    assert graphs.closed_form_resource().norm() == pytest.approx(1, abs=1e-14)


def test_closed_form_all_zeros_amplitude():
    # Hand expansion: <00|phi+> = 1/2 for each pair, <00|0+> = 1/sqrt2, second
    # term vanishes (<0|1> = 0); normalized prefactor 1/sqrt2 -> 1/8.
    assert graphs.closed_form_resource().amplitudes[0] == pytest.approx(1 / 8, abs=1e-15)


def test_exhaustive_edge_search_oracle():
    """Independent brute force: dense kron-built CZ diagonals over all 2^15 edge sets."""
    target = graphs.closed_form_resource().amplitudes
    pairs = list(itertools.combinations(range(1, 7), 2))
    diags = {p: _dense_cz_diag(6, *p) for p in pairs}
    plus = np.full(64, 1 / 8)
    hits = []
    for mask in range(1 << 15):
        amps = plus.copy()
        chosen = [p for i, p in enumerate(pairs) if mask >> i & 1]
        for p in chosen:
            amps = amps * diags[p]
        if abs(np.vdot(amps, target)) >= 1 - 1e-12:
            hits.append(set(chosen))
    assert hits == [E_STAR]


def test_search_graph_for_state_matches_oracle():
    hits = graphs.search_graph_for_state(graphs.closed_form_resource())
    assert [set(h.edges) for h in hits] == [E_STAR]
    assert hits[0].z_corrections == ()


def test_search_widens_to_z_corrections():
    y_encoded = graphs.apply_y_encoding(graphs.closed_form_resource())
    assert graphs.search_graph_for_state(y_encoded, allow_z=False) == []
    hits = graphs.search_graph_for_state(y_encoded)
    assert [(set(h.edges), h.z_corrections) for h in hits] == [(E_STAR, (4,))]


def test_cluster_from_e_star_matches_closed_form():
    state = graphs.cluster_from_graph(Graph.from_edges(6, E_STAR))
    assert core.fidelity(state, graphs.closed_form_resource()) >= 1 - 1e-12


def test_six_qubit_layout():
    state, layout = graphs.six_qubit_resource()
    assert state.num_qubits == 6
    assert set(layout.query_inputs) == {1, 6}
    assert layout.ancilla_in == 4
    assert set(layout.outputs) == {1, 3, 6}
    assert set(layout.oracle_qubits) == {2, 5}


def test_y_encoding():
    state = graphs.closed_form_resource()
    once = graphs.apply_y_encoding(state)
    assert core.fidelity(graphs.apply_y_encoding(once), state) == pytest.approx(1, abs=1e-14)
    assert once.norm() == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValueError):
        graphs.apply_y_encoding(core.new_basis_state(5, 0))


def test_y_encoding_flips_the_one_minus_branch():
    # (sigma_z)_4 sends |0+>_34 -> |0->_34 and |1->_34 -> |1+>_34 in the closed form
    t = np.zeros((2,) * 6, dtype=complex)
    for sign, q3, q4 in ((1, KET0, KET_MINUS), (-1, KET1, KET_PLUS)):
        pair = ((np.kron(KET_PLUS, KET0) + sign * np.kron(KET_MINUS, KET1)) / math.sqrt(2)).reshape(2, 2)
        t += np.einsum("ab,c,d,fe->abcdef", pair, q3, q4, pair)
    expected = StateVector(6, t.reshape(-1) / math.sqrt(2))
    assert core.fidelity(graphs.apply_y_encoding(graphs.closed_form_resource()), expected) >= 1 - 1e-12


def test_dj_bv_graph_counts():
    g2, _ = graphs.dj_bv_graph(2)
    assert (g2.num_vertices, len(g2.edges)) == (6, 5)
    g3, layout = graphs.dj_bv_graph(3)
    assert (g3.num_vertices, len(g3.edges)) == (8, 7)
    assert layout.n == 3
    with pytest.raises(ValueError):
        graphs.dj_bv_graph(1)
    with pytest.raises(ValueError):
        graphs.dj_bv_graph(12)


def test_dj_bv_graph_two_is_the_six_qubit_resource():
    g2, layout = graphs.dj_bv_graph(2)
    assert g2.relabel(graphs.TO_SIX_QUBIT_LABELS).edges == E_STAR
    # the relabelling carries roles over as well
    six = graphs.six_qubit_layout()
    m = graphs.TO_SIX_QUBIT_LABELS
    assert tuple(m[q] for q in layout.query_inputs) == six.query_inputs
    assert m[layout.ancilla_in] == six.ancilla_in and m[layout.ancilla_out] == six.ancilla_out
    state = graphs.cluster_from_graph(g2.relabel(m))
    assert core.fidelity(state, graphs.closed_form_resource()) >= 1 - 1e-12


@settings(max_examples=50, deadline=None)
@given(data=st.data(), n=st.integers(2, 7))
def test_edge_order_independence(data, n):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    order = data.draw(st.permutations(edges))
    ref = graphs.cluster_from_graph(Graph.from_edges(n, edges))
    state = core.plus_state(n)
    for a, b in order:
        state = core.apply_cz(state, a - 1, b - 1)
    assert core.fidelity(state, ref) >= 1 - 1e-12
    assert abs(ref.norm() - 1) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_measuring_mediators_and_ancillas_disentangles_queries(n):
    g, layout = graphs.dj_bv_graph(n)
    state = graphs.cluster_from_graph(g)
    labels = list(range(1, g.num_vertices + 1))
    signs = {}
    for q in (*layout.oracle_qubits, layout.ancilla_in, layout.ancilla_out):
        pos = labels.index(q)
        m = core.force_measure(state, pos, MeasurementBasis.computational(), 0)
        state, _ = m.state, labels.pop(pos)
    # every surviving query qubit is |+> or |->, i.e. a product state of X eigenstates
    for k in range(len(labels)):
        rho = core.reduced_density_matrix(state, [k])
        assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-12)
        assert abs(rho[0, 1].real) == pytest.approx(0.5, abs=1e-12)


def test_graph_documents_are_json():
    g, _ = graphs.dj_bv_graph(2)
    assert json.loads(g.dumps()) == {"num_vertices": 6, "edges": [[1, 2], [2, 5], [3, 4], [4, 5], [5, 6]]}
