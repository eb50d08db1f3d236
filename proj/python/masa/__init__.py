"""Multi-agent stochastic approximation (GCSA, DSA, DSA-S, CISA)."""

from ._masa import *  # noqa: F401,F403
from ._masa import __doc__  # noqa: F401
