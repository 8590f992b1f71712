"""
DRAM Bandwidth Models
Kernel baseline, profiling overhead and worst-case dump bandwidth
"""

from src.manifest.model import DesignManifest

GB = 1e9
# The worst-case bound is quoted with 1 KB = 1024 B and 1 GB = 10^6 KB.
_WORST_CASE_KB = 1024
_WORST_CASE_GB_IN_KB = 1e6


def baseline_bandwidth(m: DesignManifest, trace) -> float:
    """
    Kernel DRAM bandwidth of an unprofiled run in GB/s.

    Burst bytes moved by the kernel over total_cycles at the design clock.
    """
    if trace.total_cycles == 0:
        return 0.0
    return trace.kernel_bytes / (trace.total_cycles * m.t_cycle_seconds) / GB


def profiling_bandwidth(s_dram: float, t_total: int, t_cycle: float) -> float:
    """Bandwidth added by profiler dumps in GB/s (S_dram over the run time)"""
    if s_dram == 0 or t_total == 0:
        return 0.0
    return s_dram / (t_total * t_cycle) / GB


def worst_case_bandwidth(
    n_modules: int,
    k_cycles: float,
    depth: int = 64,
    entry_bits: int = 64,
    f_hz: float = 100e6
) -> float:
    """
    Upper bound on dump bandwidth when every module toggles every K cycles.

    Each queue fills every depth*K/f seconds and ships depth*entry_bits/8
    bytes, so the rate is f*N*entry_bits/(8K) bytes per second.

    Args:
        n_modules: Profiled modules N
        k_cycles: Mean cycles between toggles K (> 0)
        depth: Queue depth
        entry_bits: Timestamp width
        f_hz: Clock frequency

    Returns:
        Bandwidth in GB/s (KB = 1024 B, GB = 10^6 KB)
    """
    if k_cycles <= 0:
        raise ValueError("k_cycles must be > 0")
    dumps_per_second = (f_hz / depth) / k_cycles
    bytes_per_second = dumps_per_second * n_modules * depth * entry_bits / 8
    return bytes_per_second / _WORST_CASE_KB / _WORST_CASE_GB_IN_KB
