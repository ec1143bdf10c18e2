"""Python bindings for the spadcorr coincidence-imaging library."""

from ._spadcorr import *  # noqa: F401,F403
from ._spadcorr import __doc__  # noqa: F401

__version__ = "0.1.0"
