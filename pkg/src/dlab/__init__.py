"""Exact finite laboratory for disjointness from minimal systems."""

from .core import FiniteSystem, Partition, StateSet, cycle_system, make_finite_system, product
from .errors import CapExceeded, DlabError, InputError

__version__ = "0.1.0"
