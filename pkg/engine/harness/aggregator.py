"""
Trace Aggregator - median and quartile curves across replicas
Single-writer reduction over finished replica traces
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

AGGREGATE_COLUMNS = ["algorithm", "dim", "iter", "metric", "n", "n_diverged", "median", "q25", "q75"]

# aggregate metric name -> trace columns it reads
METRIC_COLUMNS = {
    "kl": ["kl"],
    "f_rel": ["f"],
    "w2": ["w2sq"],
    "var_trace": ["var_mc", "var_vr"],
    "c_trace": ["c_used"],
}

GroupKey = Tuple[str, int]
Rows = List[Dict[str, Any]]


def quartiles(values: Sequence[float]) -> Tuple[float, float, float]:
    """(q25, median, q75) with linear interpolation"""
    q25, median, q75 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q25), float(median), float(q75)


def best_objective(groups: Dict[GroupKey, List[Rows]], dim: int) -> Optional[float]:
    """Smallest F estimate over all iterations of all algorithms at one dimension"""
    values = [
        row["f"]
        for (_, d), replicas in groups.items() if d == dim
        for rows in replicas
        for row in rows
        if row["f"] is not None and not row["diverged"]
    ]
    return min(values) if values else None


class TraceAggregator:
    """
    Reduces replica traces to per-iteration statistics

    Diverged rows are excluded from the statistics; n_diverged counts replicas that
    diverged at or before each iteration.
    """

    def __init__(self, config: Optional[Dict] = None):
        """
        Initialize trace aggregator

        Args:
            config: Aggregator configuration
        """
        self.config = config or {}
        self.metrics = list(self.config.get("metrics", ["kl", "w2", "c_trace"]))

        logger.info(f"Trace Aggregator initialized (metrics={self.metrics})")

    def aggregate(self, groups: Dict[GroupKey, List[Rows]]) -> List[Dict[str, Any]]:
        """
        Aggregate replica rows

        Args:
            groups: (algorithm label, dim) -> list of replica rows (as read from CSV)

        Returns:
            Aggregate rows with AGGREGATE_COLUMNS
        """
        rows: List[Dict[str, Any]] = []
        best = {dim: best_objective(groups, dim) for _, dim in groups}

        for (label, dim), replicas in sorted(groups.items()):
            divergence_iters = [
                min((r["iter"] for r in reps if r["diverged"]), default=None) for reps in replicas
            ]
            iterations = sorted({r["iter"] for reps in replicas for r in reps})
            for metric in self.metrics:
                for column in METRIC_COLUMNS[metric]:
                    name = metric if len(METRIC_COLUMNS[metric]) == 1 else column
                    offset = best[dim] if metric == "f_rel" else 0.0
                    if metric == "f_rel" and offset is None:
                        continue
                    rows.extend(self._series(label, dim, name, column, offset, replicas, iterations, divergence_iters))

        logger.info(f"Aggregated {len(groups)} algorithm groups into {len(rows)} rows")
        return rows

    def _series(
        self,
        label: str,
        dim: int,
        name: str,
        column: str,
        offset: float,
        replicas: List[Rows],
        iterations: List[int],
        divergence_iters: List[Optional[int]],
    ) -> List[Dict[str, Any]]:
        by_iter: Dict[int, List[float]] = {k: [] for k in iterations}
        for reps in replicas:
            for r in reps:
                if not r["diverged"] and r[column] is not None:
                    by_iter[r["iter"]].append(r[column] - offset)

        series = []
        for k in iterations:
            values = by_iter[k]
            if not values:
                continue
            q25, median, q75 = quartiles(values)
            series.append({
                "algorithm": label,
                "dim": dim,
                "iter": k,
                "metric": name,
                "n": len(values),
                "n_diverged": sum(1 for d in divergence_iters if d is not None and d <= k),
                "median": median,
                "q25": q25,
                "q75": q75,
            })
        return series

    def final_summary(self, groups: Dict[GroupKey, List[Rows]], column: str = "kl") -> Dict[str, Dict[str, Any]]:
        """
        Median and quartiles of the last recorded value of each surviving replica

        Returns:
            "<label>@d<dim>" -> {median, q25, q75, n, n_diverged}
        """
        summary = {}
        for (label, dim), replicas in sorted(groups.items()):
            finals = []
            diverged = 0
            for reps in replicas:
                if any(r["diverged"] for r in reps):
                    diverged += 1
                    continue
                if reps and reps[-1][column] is not None:
                    finals.append(reps[-1][column])
            entry: Dict[str, Any] = {"n": len(finals), "n_diverged": diverged}
            if finals:
                q25, median, q75 = quartiles(finals)
                entry.update({"median": median, "q25": q25, "q75": q75})
            summary[f"{label}@d{dim}"] = entry
        return summary

    @staticmethod
    def write_csv(rows: List[Dict[str, Any]], path: Path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=AGGREGATE_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        return path
