"""One-way (cluster-state) simulation of the Deutsch-Jozsa and Bernstein-Vazirani algorithms."""

from .core import MeasurementBasis, StateVector
from .graphs import Graph, ResourceLayout, cluster_from_graph, dj_bv_graph, six_qubit_resource
from .mbqc import MeasurementPattern, enumerate_branches, pattern_for_bb, run_pattern
from .oracles import BlackBoxId, OracleSpec, bb_truth_table, bv_oracle, classify
from .verify import verify_all

__all__ = [
    "BlackBoxId",
    "Graph",
    "MeasurementBasis",
    "MeasurementPattern",
    "OracleSpec",
    "ResourceLayout",
    "StateVector",
    "bb_truth_table",
    "bv_oracle",
    "classify",
    "cluster_from_graph",
    "dj_bv_graph",
    "enumerate_branches",
    "pattern_for_bb",
    "run_pattern",
    "six_qubit_resource",
    "verify_all",
]
