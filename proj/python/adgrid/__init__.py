"""Dyadic cube systems, adapted grids, rearrangement and stripe operators."""

try:
    from ._core import *  # noqa: F401,F403  (installed layout)
except ImportError:
    from _core import *  # noqa: F401,F403  (in-tree build)
