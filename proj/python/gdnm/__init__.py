"""Python bindings for the drainage network simulator."""

from ._gdnm import *  # noqa: F401,F403
from ._gdnm import __version__  # noqa: F401
