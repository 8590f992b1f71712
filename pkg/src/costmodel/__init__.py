"""Analytical resource, bandwidth and frequency models of the profiling IP"""

from .resources import (
    CostConstants,
    ResourceEstimate,
    decode_cost,
    delta_r_util,
    estimate_allocation,
    estimate_resources,
    r_util_components,
)
from .bandwidth import baseline_bandwidth, profiling_bandwidth, worst_case_bandwidth
from .fmax import fmax_model
from .adapt import adapt_allocation

__all__ = [
    'CostConstants',
    'ResourceEstimate',
    'decode_cost',
    'delta_r_util',
    'estimate_allocation',
    'estimate_resources',
    'r_util_components',
    'baseline_bandwidth',
    'profiling_bandwidth',
    'worst_case_bandwidth',
    'fmax_model',
    'adapt_allocation',
]
