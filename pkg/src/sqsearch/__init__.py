"""Structured quantum search: dataset encoding, entanglement maps,
fixed-point subspace search and a statevector simulator to run them on."""

from .emap import EntanglementMap, build as build_emap
from .encoding import Dataset, basis_map, encode
from .engine import SearchProblem, SearchResult, run_sqs, search
from .fpqs import SubspaceSpec, fixed_point_matrix, prep_matrix
from .sim import Circuit, GateOp

__version__ = "0.1.0"
