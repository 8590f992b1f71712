"""Profiler IP model: global counter, performance counters and DRAM dumps"""

from .timestamp_log import DumpRecord, Edge, RawTimestampLog, TimestampEntry
from .profiler_ip import ProfilerState

__all__ = ['DumpRecord', 'Edge', 'RawTimestampLog', 'TimestampEntry', 'ProfilerState']
