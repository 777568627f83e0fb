"""
BFMLIFT — Observability: structured logging, counters, stage timing

Provides:
- structlog configuration (JSON or console renderer, always on stderr)
- in-process counts and duration samples per stage and label set
- stage tracing with short trace ids, feeding the report's timing section
"""
from __future__ import annotations

import logging
import sys
import time
import uuid
from collections import Counter, deque
from contextlib import contextmanager
from typing import Any, Deque, Dict, Iterator, Optional, Tuple

import structlog

logger = structlog.get_logger(__name__)


def _stderr_logger(*args: Any) -> structlog.PrintLogger:
    # resolved per call so a swapped sys.stderr is honored
    return structlog.PrintLogger(file=sys.stderr)


def configure_logging(level: str = "WARNING", json: bool = True) -> None:
    """Install the structlog processor chain. stdout is reserved for reports."""
    renderer = structlog.processors.JSONRenderer() if json else structlog.dev.ConsoleRenderer()
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        numeric_level = logging.WARNING
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        context_class=dict,
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )


# ============================================
# METRICS COLLECTOR
# ============================================

MetricKey = Tuple[str, Tuple[Tuple[str, str], ...]]


def _key(name: str, labels: Dict[str, Any]) -> MetricKey:
    return name, tuple(sorted((k, str(v)) for k, v in labels.items()))


def _render(key: MetricKey) -> str:
    name, labels = key
    return f"{name}[{','.join(f'{k}={v}' for k, v in labels)}]" if labels else name


class MetricsCollector:
    """Per-process counts and duration samples, keyed by metric name and label set.

    Only the most recent `window` samples of each series are kept.
    """

    def __init__(self, window: int = 512) -> None:
        self.window = window
        self._counts: Counter = Counter()
        self._samples: Dict[MetricKey, Deque[float]] = {}

    def increment(self, name: str, value: int = 1, **labels: Any) -> None:
        self._counts[_key(name, labels)] += value

    def observe(self, name: str, value: float, **labels: Any) -> None:
        series = self._samples.setdefault(_key(name, labels), deque(maxlen=self.window))
        series.append(value)

    def count(self, name: str, **labels: Any) -> int:
        return self._counts[_key(name, labels)]

    def summary(self, name: str, **labels: Any) -> Dict[str, float]:
        values = self._samples.get(_key(name, labels), ())
        return {
            "count": len(values),
            "total": round(sum(values), 3),
            "max": round(max(values, default=0.0), 3),
        }

    def snapshot(self) -> Dict[str, Any]:
        """Flat view for the run log: `name[label=value,...]` -> count or summary."""
        return {
            "counters": {_render(k): v for k, v in sorted(self._counts.items())},
            "durations": {_render(k): self.summary(k[0], **dict(k[1])) for k in sorted(self._samples)},
        }

    def reset(self) -> None:
        self._counts.clear()
        self._samples.clear()


# ============================================
# STAGE TRACER
# ============================================

class StageTracer:
    """Times pipeline stages; durations land in the report's timing section."""

    SLOW_STAGE_MS = 5000.0

    def __init__(self, metrics: MetricsCollector):
        self.metrics = metrics
        self.durations_ms: Dict[str, float] = {}

    @contextmanager
    def trace(self, stage: str, **metadata: Any) -> Iterator[str]:
        trace_id = str(uuid.uuid4())[:8]
        start = time.perf_counter()
        bound_logger = logger.bind(trace_id=trace_id, stage=stage)
        bound_logger.debug("span_start", **metadata)
        self.metrics.increment("stages_total", stage=stage)

        error = None
        try:
            yield trace_id
        except Exception as e:
            error = str(e)
            self.metrics.increment("stage_errors_total", stage=stage)
            raise
        finally:
            elapsed_ms = (time.perf_counter() - start) * 1000
            self.durations_ms[stage] = round(self.durations_ms.get(stage, 0.0) + elapsed_ms, 3)
            self.metrics.observe("stage_duration_ms", elapsed_ms, stage=stage)
            if error:
                bound_logger.error("span_end", elapsed_ms=round(elapsed_ms, 3), error=error)
            elif elapsed_ms > self.SLOW_STAGE_MS:
                bound_logger.warning("slow_stage", elapsed_ms=round(elapsed_ms, 3))
            else:
                bound_logger.debug("span_end", elapsed_ms=round(elapsed_ms, 3))


# Singleton
_metrics: Optional[MetricsCollector] = None


def get_metrics() -> MetricsCollector:
    global _metrics
    if _metrics is None:
        _metrics = MetricsCollector()
    return _metrics
