"""Periodic degenerate convection-diffusion solver and diagnostics."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
