"""
Trace Recorder - per-replica CSV traces with a fixed schema
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from diagnostics.variance import EstimatorCloud
from inference.optimizers import Trace

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["iter", "kl", "f", "w2sq", "var_mc", "var_vr", "c_used", "diverged", "wall_ns"]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _parse(column: str, cell: str) -> Any:
    if cell == "":
        return None
    if column in ("iter", "wall_ns"):
        return int(cell)
    if column == "diverged":
        return cell == "1"
    return float(cell)


class TraceRecorder:
    """
    Writes and reads replica traces

    Layout under the artifact directory:
    - traces/<label>_d<dim>_r<replica>.csv
    """

    def __init__(self, out_dir: Path, config: Optional[Dict] = None):
        """
        Initialize trace recorder

        Args:
            out_dir: Artifact directory
            config: Recorder configuration
        """
        self.config = config or {}
        self.out_dir = Path(out_dir)
        self.trace_dir = self.out_dir / self.config.get("trace_subdir", "traces")
        self.trace_dir.mkdir(parents=True, exist_ok=True)

        logger.info(f"Trace Recorder initialized (storage: {self.trace_dir})")

    def trace_path(self, label: str, dim: int, replica: int) -> Path:
        return self.trace_dir / f"{label}_d{dim}_r{replica:02d}.csv"

    def write_trace(self, trace: Trace, dim: int, replica: int) -> Path:
        """
        Write one replica trace

        Args:
            trace: Finished (possibly diverged) trace
            dim: Target dimension
            replica: Replica index within the experiment

        Returns:
            Path of the CSV file
        """
        path = self.trace_path(trace.config.label, dim, replica)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for record in trace.records:
                row = record.to_dict()
                writer.writerow([_cell(row[c]) for c in TRACE_COLUMNS])
        logger.debug(f"Wrote {len(trace.records)} records to {path}")
        return path

    @staticmethod
    def read_trace(path: Path) -> List[Dict[str, Any]]:
        """Read a trace CSV back into typed rows (None for empty cells)"""
        with open(Path(path), "r", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != TRACE_COLUMNS:
                raise ValueError(f"Unexpected trace columns in {path}: {reader.fieldnames}")
            return [{c: _parse(c, row[c]) for c in TRACE_COLUMNS} for row in reader]

    def list_traces(self) -> List[Path]:
        return sorted(self.trace_dir.glob("*.csv"))


def write_cloud(cloud: EstimatorCloud, path: Path) -> Path:
    """Write the paired estimator cloud: estimator, index, g_1..g_d (exact gradient as 'exact')"""
    path = Path(path)
    dim = cloud.mc.shape[1]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["estimator", "index"] + [f"g_{i + 1}" for i in range(dim)])
        for row in cloud.rows():
            writer.writerow([row[0], row[1]] + [repr(v) for v in row[2:]])
        if cloud.exact is not None:
            writer.writerow(["exact", 0] + [repr(float(v)) for v in cloud.exact])
    logger.info(f"Wrote estimator cloud ({cloud.mc.shape[0]} draws, c={cloud.c}) to {path}")
    return path
