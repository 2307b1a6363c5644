"""Hilbert C*-modules over finite sums of matrix algebras and their operators."""

from .algebra import AlgebraElement, CStarAlgebra, make_algebra, minimal_projection
from .hilbert_module import HilbertModule, ModuleVector, Submodule, make_module
from .operators import BoundedOperator

__version__ = "0.1.0"
