"""Ordered factorizations of integers: exact counts, analytic constants, checks."""

from .counting import Convention, m_signature, m_value
from .analytic import constants, solve_rho

__all__ = ["Convention", "m_signature", "m_value", "constants", "solve_rho"]
__version__ = "0.1.0"
