"""Large-deviation toolkit for sparse marked random graphs."""
from .kernels import BACKEND
from .core import (
    BallTooLargeError,
    GraphError,
    MarkedGraph,
    MarkSpace,
    NotATreeError,
    RootedBall,
    ball,
    canonical_code,
    load_graph,
    local_distance,
    save_graph,
)
from .rng import make_rng, stream

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BallTooLargeError", "GraphError", "MarkedGraph", "MarkSpace", "NotATreeError", "RootedBall",
    "ball", "canonical_code", "load_graph", "local_distance", "save_graph", "make_rng", "stream", "__version__",
]
