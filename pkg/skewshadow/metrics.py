"""Prometheus metrics for skewshadow simulations (optional).

Usage:
    metrics = get_metrics(enabled=True)

    from prometheus_client import generate_latest
    print(generate_latest())
"""

import time
from contextlib import contextmanager
from typing import Iterator, Optional

try:
    from prometheus_client import Counter, Histogram

    HAS_PROMETHEUS = True
except ImportError:
    HAS_PROMETHEUS = False


class SimulationMetrics:
    """Prometheus metrics. Does nothing if prometheus_client not installed."""

    def __init__(self, enabled: bool = True, prefix: str = "skewshadow"):
        self.enabled = enabled and HAS_PROMETHEUS
        if not self.enabled:
            return

        self.samples_total = Counter(
            f"{prefix}_samples_total", "Monte Carlo samples drawn", ["estimator"]
        )
        self.guard_recomputations = Counter(
            f"{prefix}_guard_recomputations_total",
            "Samples recomputed with the exact pairwise statistic",
        )
        self.chunk_latency = Histogram(
            f"{prefix}_chunk_seconds", "Sample chunk latency", ["estimator"]
        )

    @contextmanager
    def track_chunk(self, estimator: str, samples: int) -> Iterator[None]:
        if not self.enabled:
            yield
            return
        start = time.perf_counter()
        try:
            yield
            self.samples_total.labels(estimator=estimator).inc(samples)
        finally:
            self.chunk_latency.labels(estimator=estimator).observe(
                time.perf_counter() - start
            )

    def record_guard(self, count: int = 1) -> None:
        if self.enabled and count:
            self.guard_recomputations.inc(count)


# Singleton
_metrics: Optional[SimulationMetrics] = None


def get_metrics(enabled: bool = True) -> SimulationMetrics:
    """Get or create metrics instance."""
    global _metrics
    if _metrics is None:
        _metrics = SimulationMetrics(enabled=enabled)
    return _metrics
