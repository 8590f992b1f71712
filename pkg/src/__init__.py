"""
probe-forge - HLS profiling toolchain and cycle-level simulator
"""

__version__ = "0.1.0"
__author__ = "probe-forge developers"
