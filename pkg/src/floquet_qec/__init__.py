"""Honeycomb Z2/ZN Floquet codes with condensation defect lines."""

from .pauli import ModParams, PauliWord
from .stabilizer import MembershipResult, StabilizerGroup

__all__ = ["PauliWord", "ModParams", "StabilizerGroup", "MembershipResult"]
