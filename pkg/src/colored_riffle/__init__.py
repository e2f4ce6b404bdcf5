"""Riffle shuffles on colored permutation groups: exact descent statistics,
lattice paths, carries chains, group-algebra checks and cutoff curves."""

from __future__ import annotations

import sys

__version__ = "0.1.0"

# descent class sizes and TV numerators at n ~ 10^4 have tens of thousands of digits
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

from .core import (  # noqa: E402
    ColoredPermutation,
    DomainError,
    ResourceError,
    ShuffleParams,
    UnsupportedCombination,
    binom,
    d,
    d_dash,
    d_descent_set,
    format_rational,
    parse_rational,
)
from .formulas import dash_descent_prob, descent_prob, fraction_free_det, uniform_descent_prob  # noqa: E402
from .shuffle import compose, gsr, reverse_colors, sample_walk, single_probability  # noqa: E402

__all__ = [
    "ColoredPermutation",
    "DomainError",
    "ResourceError",
    "ShuffleParams",
    "UnsupportedCombination",
    "binom",
    "compose",
    "d",
    "d_dash",
    "d_descent_set",
    "dash_descent_prob",
    "descent_prob",
    "format_rational",
    "fraction_free_det",
    "gsr",
    "parse_rational",
    "reverse_colors",
    "sample_walk",
    "single_probability",
    "uniform_descent_prob",
]
