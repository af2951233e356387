"""Stationary discrete-time Volterra processes."""

from ._volterra import *  # noqa: F401,F403
from ._volterra import __version__  # noqa: F401
