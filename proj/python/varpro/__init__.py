"""Separable optimization via variable elimination."""

from ._varpro import *  # noqa: F401,F403
from ._varpro import __version__  # noqa: F401
