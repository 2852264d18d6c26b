"""Fever screening pipeline bindings.

Thermal sensor simulation, synthetic cohort generation, lag-window detector
training, evaluation metrics, and fixed-point Verilog generation.
"""

from ._feverscreen import *  # noqa: F401,F403
from ._feverscreen import __doc__ as _doc

__doc__ = _doc
