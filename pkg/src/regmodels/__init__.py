"""Regular and minimal normal crossings models of superelliptic curves
z^d = f(t) over Q_p, built from finite sets of Mac Lane valuations."""

from .arith import INF, QPoly
from .cover import CoverSpec, build_vreg, minimize, removability_pass, run_pipeline, validate_normalize
from .errors import RegModelsError
from .fiber import dual_graph
from .maclane import MacLaneVal, maclane_chain

__all__ = [
    "INF",
    "CoverSpec",
    "MacLaneVal",
    "QPoly",
    "RegModelsError",
    "build_vreg",
    "dual_graph",
    "maclane_chain",
    "minimize",
    "removability_pass",
    "run_pipeline",
    "validate_normalize",
]
