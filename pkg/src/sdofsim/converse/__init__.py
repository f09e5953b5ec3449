"""Executable checks of the converse machinery."""

from .linear import *  # noqa: F401,F403
from .aligned import *  # noqa: F401,F403
