"""
Experiment Orchestrator - runs every replica of an experiment and writes the artifact
Validation, concurrent replicas, trace CSVs, aggregates, manifest and the Laplace baseline
"""

import json
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy

from diagnostics.laplace import laplace_approx
from diagnostics.variance import objective_f
from geometry import __version__ as engine_version
from geometry.exceptions import BWVIError, SpecError
from geometry.gaussian import Gaussian, kl_gaussian
from geometry.rng import RngState
from inference.optimizers import Trace, run
from inference.targets import LogRegTarget, Target

from .aggregator import TraceAggregator
from .config import DEFAULTS, thread_cap
from .presets import ExperimentSpec, build_init, build_target
from .recorder import TraceRecorder
from .run_logger import EventCategory, EventLevel, RunLogger
from .validator import SpecValidator

logger = logging.getLogger(__name__)

LAPLACE_SEED_KEY = 7919


@dataclass
class ExperimentResult:
    """Where an experiment landed and what it found"""
    out_dir: Path
    manifest: Dict[str, Any]
    trace_files: List[Path]

    @property
    def summary(self) -> Dict[str, Any]:
        return self.manifest["summary"]


class ExperimentOrchestrator:
    """
    Coordinates one experiment run

    Features:
    - Fail-fast spec validation
    - Replicas executed concurrently, capped by the configured thread count
    - Divergence recorded per replica, never fatal
    - Laplace baseline stored in the manifest
    """

    def __init__(self, config: Optional[Dict] = None):
        """
        Initialize experiment orchestrator

        Args:
            config: Full configuration (see harness.config.load_config)
        """
        self.config = config or DEFAULTS
        self.threads = thread_cap(self.config)
        self.validator = SpecValidator(self.config.get("validator", {}))

        logger.info(f"Experiment Orchestrator initialized (threads={self.threads})")

    def run_experiment(self, spec: Union[ExperimentSpec, Dict[str, Any]], out_dir: Path) -> ExperimentResult:
        """
        Run every (algorithm, dim, seed) replica of spec and write the artifact directory

        Args:
            spec: Experiment specification, or a raw document completed from this configuration
            out_dir: Artifact directory (created)

        Returns:
            ExperimentResult

        Raises:
            SpecError: spec fails validation
        """
        if not isinstance(spec, ExperimentSpec):
            is_valid, reason = self.validator.validate_document(spec, self.config)
            if not is_valid:
                raise SpecError(reason)
            spec = ExperimentSpec.from_dict(spec, self.config)
        is_valid, reason = self.validator.validate_spec(spec)
        if not is_valid:
            raise SpecError(reason)

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        run_log = RunLogger(out_dir, self.config.get("harness", {}).get("run_log", {}))
        recorder = TraceRecorder(out_dir)
        configs = spec.run_configs(self.config)
        run_log.log_event(
            f"Experiment {spec.name}: {len(configs)} algorithms x {len(spec.dims)} dims x {len(spec.seeds)} seeds",
            category=EventCategory.EXPERIMENT,
            metadata={"algorithms": [c.label for c in configs], "dims": spec.dims},
        )

        targets: Dict[str, Any] = {}
        baselines: Dict[str, Any] = {}
        trace_files: List[Path] = []
        groups: Dict[Tuple[str, int], List[List[Dict[str, Any]]]] = {}

        for dim in spec.dims:
            target = build_target(spec.target, dim, self.config)
            init = build_init(spec.init, dim)
            targets[str(dim)] = self._describe_target(target, out_dir, dim, run_log)
            baselines[str(dim)] = self._laplace_baseline(target, init, spec, dim, run_log)

            jobs = [
                (config, replica, replace(config, seed=seed))
                for config in configs
                for replica, seed in enumerate(spec.seeds)
            ]
            traces = self._run_replicas(jobs, target, init)

            for (config, replica, seeded), trace in zip(jobs, traces):
                path = recorder.write_trace(trace, dim, replica)
                trace_files.append(path)
                run_log.log_replica(config.label, seeded.seed, dim, trace.records[-1].iter, trace.diverged)
                groups.setdefault((config.label, dim), []).append(recorder.read_trace(path))

        aggregator = TraceAggregator({"metrics": spec.metrics})
        aggregate_path = aggregator.write_csv(aggregator.aggregate(groups), out_dir / "aggregate.csv")
        final_column = "kl" if all(t["has_optimum"] for t in targets.values()) else "f"
        summary = aggregator.final_summary(groups, final_column)
        run_log.log_event(
            f"Aggregated {len(trace_files)} traces into {aggregate_path.name}",
            category=EventCategory.AGGREGATE,
            metadata={"divergences": run_log.divergence_summary()},
        )

        manifest = {
            "spec": spec.to_dict(),
            "seeds": list(spec.seeds),
            "runs": [c.to_dict() for c in configs],
            "versions": {
                "engine": engine_version,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "targets": targets,
            "baselines": {"laplace": baselines},
            "summary": {"metric": final_column, "final": summary},
            "divergences": run_log.divergence_summary(),
            "files": {
                "traces": [p.relative_to(out_dir).as_posix() for p in trace_files],
                "aggregate": aggregate_path.name,
                "events": run_log.json_log.name,
            },
        }
        manifest_path = out_dir / "manifest.json"
        with open(manifest_path, "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
        run_log.log_event(f"Wrote manifest to {manifest_path}", category=EventCategory.IO)

        return ExperimentResult(out_dir=out_dir, manifest=manifest, trace_files=trace_files)

    def _run_replicas(self, jobs, target: Target, init: Gaussian) -> List[Trace]:
        if self.threads <= 1 or len(jobs) <= 1:
            return [run(seeded, target, init) for _, _, seeded in jobs]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            futures = [pool.submit(run, seeded, target, init) for _, _, seeded in jobs]
            return [f.result() for f in futures]

    def _describe_target(self, target: Target, out_dir: Path, dim: int, run_log: RunLogger) -> Dict[str, Any]:
        description = target.metadata()
        if target.alpha and target.beta:
            description["condition_number"] = target.beta / target.alpha
        description["generator"] = dict(self.config.get("targets", {}))
        if isinstance(target, LogRegTarget):
            data_path = out_dir / f"data_d{dim}.csv"
            target.data.to_csv(data_path)
            description["data"] = data_path.name
            run_log.log_event(f"Wrote logistic regression data to {data_path.name}", category=EventCategory.IO)
        return description

    def _laplace_baseline(
        self,
        target: Target,
        init: Gaussian,
        spec: ExperimentSpec,
        dim: int,
        run_log: RunLogger,
    ) -> Dict[str, Any]:
        """Laplace approximation from the initial mean; failures are recorded, not raised"""
        try:
            approx = laplace_approx(target, init.mean)
        except BWVIError as e:
            run_log.log_event(
                f"Laplace baseline failed at d={dim}: {e}",
                level=EventLevel.WARNING,
                category=EventCategory.EXPERIMENT,
            )
            return {"ok": False, "error": f"{type(e).__name__}: {e}"}

        if target.optimum is not None:
            return {"ok": True, "kl": kl_gaussian(approx, target.optimum)}
        rng = RngState(spec.master_seed, key=(int(dim), LAPLACE_SEED_KEY))
        return {"ok": True, "f": objective_f(target, approx, spec.objective_samples, rng)}

