"""LiGME-regularized least squares."""

from ._ligme import *  # noqa: F401,F403
from ._ligme import __doc__  # noqa: F401

__version__ = "0.1.0"
