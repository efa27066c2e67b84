"""Abstract dynamic programming with weak (Ciric) contractions and randomized lambda-policy iteration."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
