"""dascof: compute-and-forward rate library for distributed antenna systems.

The package computes achievable sum rates of compute-and-forward (uplink),
reverse compute-and-forward (downlink), their quantized variants and
integer-forcing beamforming, together with the information-theoretic
reference schemes and a Monte Carlo harness.

Hot kernels (complex LLL and lattice enumeration) come from a compiled
extension when it is available and from pure Python otherwise; see
:func:`dascof.backend_name`.
"""
from ._backend import backend_name
from .gfield import FqElem, FqMatrix, GaussianInt, GaussianPrime, RowSpace, fq_inverse_matrix, fq_rank, fq_solve
from .lattice import (
    CofSolution,
    computation_rate,
    effective_noise_variance,
    find_best_coefficients,
    lll_reduce,
)
from .schemes import (
    RateReport,
    SystemMatrix,
    build_system_matrix,
    cof_sum_rate,
    network_decompose,
    rcof_sum_rate,
)
from .quantized import QuantGrid, lqf_sum_rate, noise_pmf, qcof_sum_rate, rqcof_sum_rate
from .selection import at_select_cof, at_select_lqf, greedy_select, ut_select_downlink
from .ifb import IfbDesign, ifb_design, ifb_sum_rate
from .channels import ChannelModel, draw_channel
from .config import SimConfig, load_config
from .montecarlo import ResultRow, run_montecarlo

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "GaussianInt",
    "GaussianPrime",
    "FqElem",
    "FqMatrix",
    "RowSpace",
    "fq_rank",
    "fq_solve",
    "fq_inverse_matrix",
    "CofSolution",
    "effective_noise_variance",
    "computation_rate",
    "find_best_coefficients",
    "lll_reduce",
    "RateReport",
    "SystemMatrix",
    "build_system_matrix",
    "network_decompose",
    "cof_sum_rate",
    "rcof_sum_rate",
    "QuantGrid",
    "noise_pmf",
    "qcof_sum_rate",
    "lqf_sum_rate",
    "rqcof_sum_rate",
    "greedy_select",
    "at_select_cof",
    "at_select_lqf",
    "ut_select_downlink",
    "IfbDesign",
    "ifb_design",
    "ifb_sum_rate",
    "ChannelModel",
    "draw_channel",
    "SimConfig",
    "load_config",
    "ResultRow",
    "run_montecarlo",
]
