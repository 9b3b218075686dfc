"""Exact size-expansion algebra of normalized multi-trace observables.

The package computes operator products, moments, connected parts,
brackets and ordering-kernel shifts of normal-ordered trace words of a
single random hermitian matrix, as exact polynomial (or Laurent) data
in the inverse matrix size, with every claim checkable against a
brute-force finite-size oracle.
"""

from .coeffring import (Coefficient, CoefficientError, KernelSymbol, Monomial,
                        ONE, ZERO)
from .observables import (Generator, KERNEL, MATRIX, Mode, ObservableError,
                          Series, Slot, TraceWord, UNIT_GENERATOR,
                          classical_product, forget_labels, make_generator,
                          series_degree, star, star_generator)
from .ribbon import (ComponentStats, EnumerationStats, LegId, LoopReport,
                     RibbonError, analyze, enumerate_pairings, legs_of,
                     result_generator)
from .algebra import (AlgebraError, commutator, connected_product, expectation,
                      moment, nested_commutator_sym, poisson_bracket, product,
                      product_chain, restrict_colors, strip_colors,
                      substitute_block_ratio)
from .transport import transport, transport_roundtrip_check
from .oracle import (OracleConfig, OracleError, OracleReport, eval_environment,
                     moment_with_ordering, oracle_check, oracle_moment,
                     sample_matrix_identity)
from .scaling import (FieldDescriptor, ScalingError, connected_degree_bound,
                      free_normalization_exponent,
                      interacting_normalization_exponent, rg_strength_exponent,
                      thooft_coupling_exponent)
from .exprparse import (ParseError, parse_coefficient, parse_series,
                        render_series, series_from_json, series_to_json)

__all__ = [
    "AlgebraError",
    "Coefficient",
    "CoefficientError",
    "ComponentStats",
    "EnumerationStats",
    "FieldDescriptor",
    "Generator",
    "KERNEL",
    "KernelSymbol",
    "LegId",
    "LoopReport",
    "MATRIX",
    "Mode",
    "Monomial",
    "ONE",
    "ObservableError",
    "OracleConfig",
    "OracleError",
    "OracleReport",
    "ParseError",
    "RibbonError",
    "ScalingError",
    "Series",
    "Slot",
    "TraceWord",
    "UNIT_GENERATOR",
    "ZERO",
    "analyze",
    "classical_product",
    "commutator",
    "connected_degree_bound",
    "connected_product",
    "enumerate_pairings",
    "eval_environment",
    "expectation",
    "forget_labels",
    "free_normalization_exponent",
    "interacting_normalization_exponent",
    "legs_of",
    "make_generator",
    "moment",
    "moment_with_ordering",
    "nested_commutator_sym",
    "oracle_check",
    "oracle_moment",
    "parse_coefficient",
    "parse_series",
    "poisson_bracket",
    "product",
    "product_chain",
    "render_series",
    "restrict_colors",
    "result_generator",
    "rg_strength_exponent",
    "sample_matrix_identity",
    "series_degree",
    "series_from_json",
    "series_to_json",
    "star",
    "star_generator",
    "strip_colors",
    "substitute_block_ratio",
    "thooft_coupling_exponent",
    "transport",
    "transport_roundtrip_check",
]

__version__ = "0.1.0"
