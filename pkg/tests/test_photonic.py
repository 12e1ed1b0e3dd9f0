import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onewayqc import core, graphs, photonic
from onewayqc.core import ImpossibleBranchError, StateVector
from onewayqc.photonic import FusionError, FusionNetwork, PhotonRegister


def _reg(*kets):
    s = StateVector.product(*kets)
    return PhotonRegister(s, (True,) * s.num_qubits)


def test_fuse_plus_plus():
    out = photonic.fuse(PhotonRegister.plus(2), 1, 2, forced=True)
    assert out.success and out.probability == pytest.approx(0.5, abs=1e-14)
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert core.fidelity(out.post_state.state, StateVector.from_amplitudes(bell)) > 1 - 1e-12


def test_fuse_hh_always_succeeds():
    out = photonic.fuse(_reg(core.KET0, core.KET0), 1, 2, forced=True)
    assert out.probability == 1.0


def test_fuse_hv_never_succeeds():
    assert photonic.fusion_probability(_reg(core.KET0, core.KET1), 1, 2) == 0.0
    with pytest.raises(ImpossibleBranchError):
        photonic.fuse(_reg(core.KET0, core.KET1), 1, 2, forced=True)


def test_failed_fusion_marks_photons_lost():
    rng = np.random.default_rng(0)
    out = photonic.fuse(_reg(core.KET0, core.KET1, core.KET_PLUS), 1, 2, rng=rng)
    assert not out.success
    assert out.post_state.alive == (False, False, True)
    with pytest.raises(FusionError):
        photonic.fuse(out.post_state, 1, 3, forced=True)


def test_fuse_validation():
    reg = PhotonRegister.plus(2)
    with pytest.raises(FusionError):
        photonic.fuse(reg, 1, 1, forced=True)
    with pytest.raises(FusionError):
        photonic.fuse(reg, 1, 3, forced=True)
    with pytest.raises(ValueError):
        photonic.fuse(reg, 1, 2)


def test_fusion_projector_is_idempotent():
    once = photonic.fuse(PhotonRegister.plus(3), 1, 2, forced=True)
    twice = photonic.fuse(once.post_state, 1, 2, forced=True)
    assert twice.probability == pytest.approx(1, abs=1e-14)
    np.testing.assert_allclose(twice.post_state.state.amplitudes, once.post_state.state.amplitudes, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6), data=st.data())
def test_success_and_failure_probabilities_sum_to_one(seed, n, data):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    reg = PhotonRegister(StateVector.from_amplitudes(v, normalize=True), (True,) * n)
    a, b = data.draw(st.lists(st.integers(1, n), min_size=2, max_size=2, unique=True))
    p = photonic.fusion_probability(reg, a, b)
    mask = photonic._parity_mask(n, a, b)
    q = float(np.sum(np.abs(reg.state.amplitudes[~mask]) ** 2))
    assert abs(p + q - 1) < 1e-12


def test_fuse_then_h_makes_a_cz_edge():
    out = photonic.fuse(PhotonRegister.plus(2), 1, 2, forced=True)
    reg = out.post_state.rotate(2, core.H)
    expected = graphs.cluster_from_graph(graphs.Graph.from_edges(2, [(1, 2)]))
    assert core.fidelity(reg.state, expected) > 1 - 1e-12


def _pair_plus_two():
    reg = photonic.prepare_pair(PhotonRegister.vacuum(4), 1, 2)
    return photonic.prepare_plus(photonic.prepare_plus(reg, 3), 4)


def test_build_branch_probability_and_state():
    out = photonic.build_branch(_pair_plus_two(), (1, 2), (3, 4), forced=True)
    assert out.success and out.probability == pytest.approx(0.25, abs=1e-14)
    line = graphs.cluster_from_graph(graphs.Graph.from_edges(4, [(1, 2), (2, 3), (3, 4)]))
    assert core.fidelity(out.post_state.state, line) > 1 - 1e-12


def test_build_branch_monte_carlo():
    rng = np.random.default_rng(11)
    trials = 4000
    hits = sum(photonic.build_branch(_pair_plus_two(), (1, 2), (3, 4), rng=rng).success for _ in range(trials))
    assert abs(hits / trials - 0.25) < 3 * math.sqrt(0.25 * 0.75 / trials)


def test_build_branch_checks_inputs():
    reg = photonic.prepare_pair(PhotonRegister.vacuum(4), 1, 2)
    with pytest.raises(FusionError):
        photonic.build_branch(reg, (1, 2), (3, 4), forced=True)  # fresh modes still |H>
    with pytest.raises(FusionError):
        photonic.build_branch(_pair_plus_two(), (1, 2), (3, 3), forced=True)
    wrong = photonic.prepare_plus(photonic.prepare_plus(PhotonRegister.vacuum(4), 3), 4)
    with pytest.raises(FusionError):
        photonic.build_branch(wrong, (1, 2), (3, 4), forced=True)


def test_prepare_twice_rejected():
    reg = photonic.prepare_plus(PhotonRegister.vacuum(2), 1)
    with pytest.raises(FusionError):
        photonic.prepare_plus(reg, 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_grown_resource_matches_graph(n):
    out, layout = photonic.grow_dj_bv_resource(n, forced=True)
    assert out.probability == pytest.approx(0.25**n, abs=1e-14)
    g, _ = graphs.dj_bv_graph(n)
    assert core.fidelity(out.post_state.state, graphs.cluster_from_graph(g)) > 1 - 1e-10


@pytest.mark.parametrize("n, p", [(2, 1 / 16), (3, 1 / 64)])
def test_scaling_probability(n, p):
    sp = photonic.scaling_success_probability(n)
    assert sp.probability == pytest.approx(p, rel=1e-14) and sp.branches == n


def test_scaling_decreases():
    ps = [photonic.scaling_success_probability(n).probability for n in range(2, 10)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    with pytest.raises(ValueError):
        photonic.scaling_success_probability(1)


# --- networks and Monte Carlo -----------------------------------------------


def test_six_photon_network_shape():
    net = photonic.six_photon_network()
    assert net.num_modes == 6 and net.num_fusions == 5


def test_six_photon_chip_state():
    run = photonic.generate_chip_state(photonic.six_photon_network(), 100_000, seed=0)
    assert run.analytic_probability == pytest.approx(1 / 32, abs=1e-14)
    assert run.target_fidelity >= 1 - 1e-10
    assert abs(run.empirical_probability - 1 / 32) <= 0.005


def test_fusion_pair_monte_carlo():
    run = photonic.generate_chip_state(photonic.fusion_pair_network(), 100_000, seed=3)
    assert abs(run.empirical_probability - 0.5) <= 0.01


def test_zero_trials():
    run = photonic.generate_chip_state(photonic.fusion_pair_network(), 0)
    assert run.success_count == 0 and run.empirical_probability is None
    assert run.analytic_probability == pytest.approx(0.5, abs=1e-14)


def test_monte_carlo_is_seeded():
    net = photonic.branch_network()
    a = photonic.generate_chip_state(net, 5000, seed=9, workers=3)
    b = photonic.generate_chip_state(net, 5000, seed=9, workers=3)
    assert a.to_dict() == b.to_dict()
    assert photonic.worker_seeds(9, 3) == [9, 10, 11]


def test_per_trial_simulation():
    net = photonic.branch_network()
    a = photonic.generate_chip_state(net, 400, seed=2, per_trial=True)
    b = photonic.generate_chip_state(net, 400, seed=2, per_trial=True)
    assert a.to_dict() == b.to_dict()
    assert a.max_state_deviation is not None and a.max_state_deviation < 1e-12
    assert abs(a.empirical_probability - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 400)


def test_generate_chip_state_validation():
    with pytest.raises(ValueError):
        photonic.generate_chip_state(photonic.fusion_pair_network(), -1)
    with pytest.raises(ValueError):
        photonic.generate_chip_state(photonic.fusion_pair_network(), 10, workers=0)


def test_network_document_round_trip(tmp_path):
    net = photonic.branch_network()
    path = tmp_path / "net.json"
    path.write_text(net.dumps())
    again = FusionNetwork.load(path)
    assert again.operations == net.operations
    assert core.fidelity(again.target_state, net.target_state) > 1 - 1e-12


def test_network_target_alias():
    doc = photonic.six_photon_network().to_dict()
    doc["target"] = "six_qubit_resource"
    net = FusionNetwork.from_dict(json.loads(json.dumps(doc)))
    assert core.fidelity(net.target_state, graphs.closed_form_resource()) == pytest.approx(1)


@pytest.mark.parametrize(
    "doc",
    [
        {"num_modes": 2, "operations": [{"op": "fuse", "modes": [1, 2]}]},
        {"num_modes": 2, "operations": [{"op": "prepare", "modes": [1]}, {"op": "prepare", "modes": [1]}]},
        {"num_modes": 2, "operations": [{"op": "teleport"}]},
        {"operations": []},
        {"num_modes": 1, "operations": [{"op": "prepare", "modes": [1, 2], "state": "pair"}]},
    ],
)
def test_malformed_networks(doc):
    with pytest.raises(ValueError):
        FusionNetwork.from_dict(doc)
