"""Kernel backend selection.

The compiled extension is used when it was built; set
``GRAPHLDP_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

if os.environ.get("GRAPHLDP_PURE_PYTHON") == "1":
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as _impl
        BACKEND = "python"

bfs_ball = _impl.bfs_ball
ball_sizes = _impl.ball_sizes

__all__ = ["BACKEND", "bfs_ball", "ball_sizes"]
