"""
Run Metrics
Prometheus textfile gauges for one profiling run
"""

import logging
from pathlib import Path

from prometheus_client import CollectorRegistry, Gauge, write_to_textfile

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.prom"


def write_run_metrics(
    out_dir: str,
    design: str,
    mode: str,
    total_cycles: int,
    wall_cycles: int,
    dumps: int,
    dumped_bytes: int,
    probes: int,
    lossy: bool
) -> Path:
    """
    Write the run's gauges to <out_dir>/metrics.prom.

    A private registry keeps the file limited to this run.

    Returns:
        Path of the metrics file
    """
    registry = CollectorRegistry()
    labels = ["design", "mode"]

    def gauge(name: str, doc: str, value: float) -> None:
        g = Gauge(f"probe_forge_{name}", doc, labels, registry=registry)
        g.labels(design=design, mode=mode).set(value)

    gauge("total_cycles", "Total cycles of the profiled root", total_cycles)
    gauge("wall_cycles", "Wall cycles of the profiled run", wall_cycles)
    gauge("dumps", "Counter queue dumps issued", dumps)
    gauge("dumped_bytes", "Bytes offloaded to DRAM by the profiler", dumped_bytes)
    gauge("probes", "Performance counters in the allocation", probes)
    gauge("lossy", "1 when the timestamp log lost entries", 1 if lossy else 0)

    path = Path(out_dir) / METRICS_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), registry)
    logger.debug(f"Metrics written to {path}")
    return path
