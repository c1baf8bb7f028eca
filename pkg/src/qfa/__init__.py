"""Computational quadratic Fourier analysis over F_p^n."""

from .core import (
    CapacityError,
    GroupSpec,
    GroupSubset,
    ShapeError,
    bilin_eval,
    dft,
    gauss_sum,
    idft,
    matrix_rank,
    quad_eval,
)
from .factors import (
    AtomLabel,
    GeneralQuadraticFactor,
    LinearFactor,
    QuadraticFactor,
    RankFunction,
    atom_label,
    atom_members,
    atom_sizes,
    factor_rank,
    make_high_rank,
    pad_with_high_rank,
    pullback_factor,
    refines,
)
from .setspec import parse_set_spec
from .suites import SUITES, emit_report, run_suite

__all__ = [
    "AtomLabel",
    "CapacityError",
    "GeneralQuadraticFactor",
    "GroupSpec",
    "GroupSubset",
    "LinearFactor",
    "QuadraticFactor",
    "RankFunction",
    "SUITES",
    "ShapeError",
    "atom_label",
    "atom_members",
    "atom_sizes",
    "bilin_eval",
    "dft",
    "emit_report",
    "factor_rank",
    "gauss_sum",
    "idft",
    "make_high_rank",
    "matrix_rank",
    "pad_with_high_rank",
    "parse_set_spec",
    "pullback_factor",
    "quad_eval",
    "refines",
    "run_suite",
]
