"""Exact workbench for cross effects, cotriple towers, and excisive
approximation of functors on factorization categories of chain complexes."""

from .field import Field, prime_field, rational_field, DEFAULT_PRIME
from .matrix import Matrix, quotient_map
from .complexes import (
    ChainComplex,
    ChainMap,
    cone,
    direct_sum,
    hofib,
    map_connectivity,
    pushout,
    tensor,
    tensor_map,
)

__all__ = [
    "Field",
    "prime_field",
    "rational_field",
    "DEFAULT_PRIME",
    "Matrix",
    "quotient_map",
    "ChainComplex",
    "ChainMap",
    "cone",
    "direct_sum",
    "hofib",
    "map_connectivity",
    "pushout",
    "tensor",
    "tensor_map",
]

__version__ = "0.1.0"
