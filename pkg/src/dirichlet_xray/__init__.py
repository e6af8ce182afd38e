"""General Dirichlet series: evaluation, zeros, X-ray curves and theorem experiments."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .series import (
    DirichletCharacter,
    SeriesSpec,
    abscissa_of_convergence,
    character_spec,
    character_table,
    euler_partial_product,
    parse_spec,
    partial_sum,
    zeta_spec,
)
from .evaluator import (
    EMParams,
    FunctionHandle,
    davenport_heilbronn,
    derivative,
    dirichlet_l,
    evaluate,
    functional_equation_residual,
    hurwitz,
    parse_handle,
    riemann_zeta,
    truncated_general,
)
from .zeros import SearchRegion, ZeroPair, ZeroRecord, count_zeros, locate_zeros, pair_zeros
from .xray import TraceConfig, classify_component, detect_embracing, strip_report, trace_component, xray
from .theorems import (
    euler_product_residual,
    ratio_product_trace,
    segment_derivative_zero,
    sieve_step_check,
    solve_conjugate_point,
)

__all__ = [name for name in dir() if not name.startswith("_")]
