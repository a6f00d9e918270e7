"""Density amplification for graphs without large clique minors.

Given a dense host, find either a small dense subgraph or a bounded-width
minor that is denser than the host, and emit an exactly checkable
certificate for it.
"""

__version__ = "0.1.0"

from .amplifier import amplify, check_alpha_inequalities, forced_search, lift_exponent, params_from_alpha
from .certificates import Certificate, Verdict, verify_certificate
from .errors import MinorAmpError
from .graph_core import Bipartition, Graph, MinorModel, contract, dense_core, density
from .params import ForcedParams, Mode, Params

__all__ = [
    "Bipartition",
    "Certificate",
    "ForcedParams",
    "Graph",
    "MinorAmpError",
    "MinorModel",
    "Mode",
    "Params",
    "Verdict",
    "amplify",
    "check_alpha_inequalities",
    "contract",
    "dense_core",
    "density",
    "forced_search",
    "lift_exponent",
    "params_from_alpha",
    "verify_certificate",
]
