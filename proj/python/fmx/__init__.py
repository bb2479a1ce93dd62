"""Python bindings for the fmx link-level simulator."""

from ._fmx import *  # noqa: F401,F403
from ._fmx import __version__  # noqa: F401
