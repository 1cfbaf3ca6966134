"""Corrected impulse-invariance discretization and its numerical checks.

The sampled impulse response takes the mean of its one-sided limits at
``t = 0``; for a strictly proper plant this sets the discrete feedthrough
to ``CB/2``.  The subpackages verify that model against the aliasing
series, contour integrals of the resolvent and a closed-loop benchmark.
"""

__version__ = "0.1.0"

from .aliasing import (
    TransferEvaluator,
    aliasing_sum,
    aliasing_tail_bound,
    cotangent_check,
    half_part_check,
    kernel_expansion_check,
    neumann_expansion_check,
    poisson_zero_phase_check,
)
from .config import DEFAULT_CONFIG, RunConfig, Tolerances, load_config
from .contour import (
    BromwichLine,
    CircleContour,
    big_arc_check,
    bromwich_resolvent_t,
    bromwich_resolvent_t0,
    riesz_projection,
)
from .discretize import (
    HeavisideConvention,
    discretize,
    discretize_corrected,
    discretize_right_limit,
    forward_shift_realization,
    sampled_value,
)
from .errors import *  # noqa: F401,F403
from .lemmas import LemmaReport, run_all
from .linalg import expm, resolvent, spectral_radius
from .rmcf import (
    UNBOUNDED,
    GainAnalysis,
    RmcfPlant,
    critical_gain_eff,
    gain_map,
    gain_unmap,
    search_dramatic,
    stability_gap_report,
)
from .spectral import SpectralDecomposition, spectral_decomposition
from .statespace import (
    ETA_CORRECTED,
    ETA_RIGHT_LIMIT,
    ContinuousStateSpace,
    DiscreteStateSpace,
    model_from_json,
    model_to_json,
    transfer_eval_c,
    transfer_eval_d,
)
