"""
Run Logger - structured event log for experiment runs
Writes events.jsonl into each artifact directory
"""

import json
import logging
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from threading import Lock
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


class EventLevel(Enum):
    """Run event severity levels"""
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


class EventCategory(Enum):
    """Run event categories"""
    EXPERIMENT = "experiment"
    REPLICA = "replica"
    DIVERGENCE = "divergence"
    AGGREGATE = "aggregate"
    IO = "io"


class RunLogger:
    """
    JSON-lines event log for one artifact directory

    Events are kept in memory (bounded) for filtering and summaries and appended to
    events.jsonl. Writes never raise; I/O failures go to the Python logger.
    """

    def __init__(self, out_dir: Path, config: Optional[Dict] = None):
        """
        Initialize run logger

        Args:
            out_dir: Artifact directory
            config: Run log configuration
        """
        self.config = config or {}
        self.enabled = self.config.get("enabled", True)
        self.max_events_memory = self.config.get("max_events_memory", 1000)

        self.out_dir = Path(out_dir)
        self.json_log = self.out_dir / "events.jsonl"

        self.events: List[Dict[str, Any]] = []
        self.divergences: Dict[str, int] = {}
        self._lock = Lock()

        # one log per run; a rerun into the same directory starts a fresh file
        if self.enabled:
            self._truncate_json_log()

        logger.info(f"Run Logger initialized (log={self.json_log}, enabled={self.enabled})")

    def log_event(
        self,
        message: str,
        level: EventLevel = EventLevel.INFO,
        category: EventCategory = EventCategory.EXPERIMENT,
        metadata: Optional[Dict[str, Any]] = None,
    ):
        """
        Record one event

        Args:
            message: Event description
            level: Event severity level
            category: Event category
            metadata: Additional event data
        """
        event = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": level.value,
            "category": category.value,
            "message": message,
            "metadata": metadata or {},
        }

        with self._lock:
            self.events.append(event)
            if len(self.events) > self.max_events_memory:
                self.events.pop(0)
            if self.enabled:
                self._write_to_json_log(event)

        log_method = getattr(logger, level.value, logger.info)
        log_method(f"[{category.value}] {message}")

    def log_replica(self, label: str, seed: int, dim: int, iterations: int, diverged: bool):
        """Log a finished replica; diverged replicas also produce a divergence event"""
        metadata = {"algorithm": label, "seed": seed, "dim": dim, "iterations": iterations}
        if diverged:
            with self._lock:
                self.divergences[label] = self.divergences.get(label, 0) + 1
            self.log_event(
                message=f"{label} seed {seed} (d={dim}) diverged after {iterations} iterations",
                level=EventLevel.WARNING,
                category=EventCategory.DIVERGENCE,
                metadata=metadata,
            )
        else:
            self.log_event(
                message=f"{label} seed {seed} (d={dim}) finished {iterations} iterations",
                level=EventLevel.INFO,
                category=EventCategory.REPLICA,
                metadata=metadata,
            )

    def get_events(
        self,
        level: Optional[EventLevel] = None,
        category: Optional[EventCategory] = None,
        limit: int = 100,
    ) -> List[Dict]:
        """
        Retrieve events with filters

        Args:
            level: Filter by level
            category: Filter by category
            limit: Maximum events to return

        Returns:
            List of matching events
        """
        events = self.events
        if level:
            events = [e for e in events if e["level"] == level.value]
        if category:
            events = [e for e in events if e["category"] == category.value]
        return events[-limit:]

    def divergence_summary(self) -> Dict[str, int]:
        """Diverged replica count per algorithm label, independent of the in-memory event bound"""
        with self._lock:
            return dict(self.divergences)

    def _truncate_json_log(self):
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            self.json_log.write_text("")
        except Exception as e:
            logger.error(f"Failed to reset run event log: {e}")

    def _write_to_json_log(self, event: Dict):
        """Append event to the JSON lines log"""
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            with open(self.json_log, "a") as f:
                f.write(json.dumps(event) + "\n")
        except Exception as e:
            logger.error(f"Failed to write run event log: {e}")
