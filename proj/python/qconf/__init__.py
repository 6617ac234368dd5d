"""Borel-Laplace and q-Borel-Laplace summation (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import QconfError, QMode, version

__version__ = version.split()[-1].lstrip("v")
