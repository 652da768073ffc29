"""Numerical toolkit for quaternionic Fock spaces of slice regular functions."""
from __future__ import annotations

from .quat_core import I_UNIT, J_UNIT, K_UNIT, ImaginaryUnit, Quaternion
from .slice_fn import RegularPolynomial, SliceFunction, StemFunction

__all__ = ["Quaternion", "ImaginaryUnit", "I_UNIT", "J_UNIT", "K_UNIT", "SliceFunction", "StemFunction",
           "RegularPolynomial"]
__version__ = "0.1.0"
