"""
Harness Module - experiment presets, validation, orchestration, artifacts and the CLI
"""

__version__ = "1.0.0"

from .config import DEFAULTS, load_config, thread_cap
from .presets import PRESET_NAMES, ExperimentSpec, build_init, build_target, preset
from .validator import SpecValidator
from .run_logger import EventCategory, EventLevel, RunLogger
from .recorder import TRACE_COLUMNS, TraceRecorder, write_cloud
from .aggregator import AGGREGATE_COLUMNS, TraceAggregator
from .orchestrator import ExperimentOrchestrator, ExperimentResult

__all__ = [
    "DEFAULTS",
    "load_config",
    "thread_cap",
    "PRESET_NAMES",
    "ExperimentSpec",
    "build_init",
    "build_target",
    "preset",
    "SpecValidator",
    "EventCategory",
    "EventLevel",
    "RunLogger",
    "TRACE_COLUMNS",
    "TraceRecorder",
    "write_cloud",
    "AGGREGATE_COLUMNS",
    "TraceAggregator",
    "ExperimentOrchestrator",
    "ExperimentResult",
]
