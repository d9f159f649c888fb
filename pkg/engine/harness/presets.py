"""
Experiment specifications and the named presets
Presets are YAML documents under presets/, loaded with yaml.safe_load
"""

import copy
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from geometry.exceptions import UnknownPreset
from geometry.gaussian import Gaussian
from geometry.rng import RngState, child_seed
from inference.estimators import CPolicy
from inference.optimizers import Algorithm, RunConfig
from inference.targets import (
    LogRegTarget,
    Target,
    generate_logreg_data,
    random_gaussian_target,
    random_student_t_target,
)

from .config import DEFAULTS

logger = logging.getLogger(__name__)

PRESET_NAMES = [
    "gaussian-d10",
    "gaussian-d50",
    "gaussian-d200",
    "student-d200",
    "logreg-d200",
    "c-sweep",
    "eta-sweep",
    "minibatch",
    "var-trace",
    "c-sweep-student",
    "c-sweep-logreg",
    "var-trace-student",
]

SWEEP_AXES = ("c", "eta", "minibatch")
METRICS = ("kl", "f_rel", "w2", "var_trace", "c_trace")


@dataclass
class ExperimentSpec:
    """
    A full experiment: one target family, a set of algorithm templates, replicate seeds

    Algorithm templates are partial RunConfig dicts (algorithm, c_policy, minibatch,
    optionally eta); the sweep axis multiplies them out.
    """
    name: str
    target: Dict[str, Any]
    dims: List[int]
    algorithms: List[Dict[str, Any]]
    seeds: List[int]
    eta: float = 1.0
    steps: int = 300
    sweep: Optional[Dict[str, Any]] = None
    metrics: List[str] = field(default_factory=lambda: ["kl", "w2", "c_trace"])
    description: str = ""
    record_every: int = 1
    track_variance: bool = False
    variance_draws: int = 5000
    objective_samples: int = 256
    record_timing: bool = True
    init: Dict[str, Any] = field(default_factory=lambda: {"kind": "standard"})
    full_scale: Dict[str, Any] = field(default_factory=dict)
    master_seed: int = DEFAULTS["harness"]["master_seed"]

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(asdict(self))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], config: Optional[Dict] = None) -> "ExperimentSpec":
        """
        Build a spec, filling omitted fields from the configuration

        Replicate seeds are derived from master_seed when no list is given. Step size, step
        count, record cadence, initial distribution, metric sample counts, timing, replicate
        count and master seed default to the optimizers, diagnostics and harness sections.

        Args:
            data: Parsed JSON/YAML document
            config: Configuration (see harness.config.load_config); built-in defaults when omitted

        Returns:
            ExperimentSpec
        """
        data = copy.deepcopy(data)
        harness = _section(config, "harness")
        optimizers = _section(config, "optimizers")
        diagnostics = _section(config, "diagnostics")

        master_seed = data.setdefault("master_seed", int(harness["master_seed"]))
        replicates = data.pop("replicates", int(harness["seeds"]))
        if "seeds" not in data:
            data["seeds"] = replicate_seeds(master_seed, replicates)
        data.setdefault("record_timing", bool(harness["record_timing"]))
        data.setdefault("eta", float(optimizers["eta"]))
        data.setdefault("steps", int(optimizers["steps"]))
        data.setdefault("record_every", int(optimizers["record_every"]))
        data.setdefault("init", {"kind": optimizers["init"]})
        data.setdefault("objective_samples", int(diagnostics["objective_samples"]))
        data.setdefault("variance_draws", int(diagnostics["variance_draws"]))

        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown experiment fields: {sorted(unknown)}")
        return cls(**data)

    def with_overrides(
        self,
        replicates: Optional[int] = None,
        steps: Optional[int] = None,
        record_timing: Optional[bool] = None,
        master_seed: Optional[int] = None,
    ) -> "ExperimentSpec":
        """Copy with CLI-level overrides applied"""
        spec = ExperimentSpec(**self.to_dict())
        if replicates is not None or master_seed is not None:
            seed = master_seed if master_seed is not None else self.master_seed
            spec.master_seed = seed
            spec.seeds = replicate_seeds(seed, replicates if replicates is not None else len(self.seeds))
        if steps is not None:
            spec.steps = int(steps)
        if record_timing is not None:
            spec.record_timing = bool(record_timing)
        return spec

    def at_full_scale(self) -> "ExperimentSpec":
        """Copy with the full_scale block applied (dims, steps, target parameters)"""
        if not self.full_scale:
            return self
        data = self.to_dict()
        overrides = copy.deepcopy(self.full_scale)
        target_overrides = overrides.pop("target", {})
        data.update(overrides)
        data["target"].update(target_overrides)
        data["full_scale"] = {}
        return ExperimentSpec(**data)

    def run_configs(self, config: Optional[Dict] = None) -> List[RunConfig]:
        """
        Expand algorithm templates and the sweep axis into seedless RunConfigs

        The divergence threshold (numerics) and the clamp of adaptive policies without an
        explicit one (estimators) come from config.

        c sweeps apply to svrgvi templates (c = 0 becomes sgvi); minibatch sweeps apply
        to sgvi templates; eta sweeps apply to every template. Templates the axis does
        not touch appear once.
        """
        defaults = {
            "divergence_threshold": float(_section(config, "numerics")["divergence_threshold"]),
            "clamp": tuple(float(v) for v in _section(config, "estimators")["adaptive_clamp"]),
        }
        configs: List[RunConfig] = []
        axis = (self.sweep or {}).get("axis")
        values = (self.sweep or {}).get("values", [])
        for template in self.algorithms:
            algorithm = Algorithm(template["algorithm"])
            if axis == "c" and algorithm == Algorithm.SVRGVI:
                for c in values:
                    if c == 0:
                        configs.append(self._config(template, defaults, algorithm=Algorithm.SGVI,
                                                    c_policy=CPolicy.zero(), name="sgvi-c0"))
                    else:
                        configs.append(self._config(template, defaults,
                                                    c_policy=CPolicy.fixed(c), name=f"svrgvi-c{c:g}"))
            elif axis == "minibatch" and algorithm == Algorithm.SGVI:
                for m in values:
                    configs.append(self._config(template, defaults, minibatch=int(m), name=f"sgvi-m{int(m)}"))
            elif axis == "eta":
                for eta in values:
                    base = self._config(template, defaults)
                    configs.append(replace(base, eta=float(eta), name=f"{base.label}-eta{eta:g}"))
            else:
                configs.append(self._config(template, defaults))
        return configs

    def _config(self, template: Dict[str, Any], defaults: Dict[str, Any], **overrides) -> RunConfig:
        policy = overrides.pop("c_policy", None) or CPolicy.from_dict(
            template.get("c_policy") or {"variant": "zero"}, default_clamp=defaults["clamp"]
        )
        fields = {
            "algorithm": Algorithm(template["algorithm"]),
            "eta": float(template.get("eta", self.eta)),
            "steps": self.steps,
            "c_policy": policy,
            "minibatch": int(template.get("minibatch", 1)),
            "record_every": self.record_every,
            "track_variance": self.track_variance,
            "variance_draws": self.variance_draws,
            "objective_samples": self.objective_samples,
            "divergence_threshold": defaults["divergence_threshold"],
            "record_timing": self.record_timing,
            "name": template.get("name"),
        }
        fields.update(overrides)
        return RunConfig(**fields)


def _section(config: Optional[Dict], name: str) -> Dict[str, Any]:
    """Config section merged over its built-in defaults"""
    return {**DEFAULTS[name], **((config or {}).get(name) or {})}


def replicate_seeds(master_seed: int, replicates: int) -> List[int]:
    """Replicate seeds hashed from the master seed"""
    if replicates < 1:
        raise ValueError(f"Need at least one replicate, got {replicates}")
    return [child_seed(master_seed, i) for i in range(replicates)]


def build_target(target_spec: Dict[str, Any], dim: int, config: Optional[Dict] = None) -> Target:
    """
    Instantiate the target described by a spec for one dimension

    Args:
        target_spec: {kind: gaussian|student_t|logreg, seed, ...}
        dim: Dimension
        config: Configuration (targets.scale / targets.floor for generated covariances)

    Returns:
        Target
    """
    config = config or {}
    generator = config.get("targets", {})
    scale = float(target_spec.get("scale", generator.get("scale", 10.0)))
    floor = float(target_spec.get("floor", generator.get("floor", 20.0)))
    rng = RngState(int(target_spec.get("seed", 0)), key=(int(dim),))
    kind = target_spec.get("kind")

    if kind == "gaussian":
        return random_gaussian_target(dim, rng, scale=scale, floor=floor)
    if kind == "student_t":
        return random_student_t_target(dim, rng, nu=float(target_spec.get("nu", 4.0)), scale=scale, floor=floor)
    if kind == "logreg":
        data = generate_logreg_data(int(target_spec.get("n", 1000)), dim, rng)
        return LogRegTarget(data)
    raise ValueError(f"Unknown target kind: {kind}")


def build_init(init_spec: Dict[str, Any], dim: int) -> Gaussian:
    """Initial distribution: standard N(0, I) or isotropic N(mean, scale * I)"""
    kind = (init_spec or {}).get("kind", "standard")
    if kind == "standard":
        return Gaussian.standard(dim)
    if kind == "isotropic":
        mean = [float(init_spec.get("mean", 0.0))] * dim
        return Gaussian(mean, float(init_spec.get("scale", 1.0)) * np.eye(dim))
    raise ValueError(f"Unknown initial distribution kind: {kind}")


def preset_path(name: str, config: Optional[Dict] = None) -> Path:
    presets_dir = Path((config or DEFAULTS)["harness"]["presets_dir"])
    return presets_dir / f"{name}.yaml"


def preset(name: str, config: Optional[Dict] = None) -> ExperimentSpec:
    """
    Load a named preset

    Raises:
        UnknownPreset: name is not a shipped preset
    """
    if name not in PRESET_NAMES:
        raise UnknownPreset(name)
    path = preset_path(name, config)
    if not path.exists():
        raise UnknownPreset(name)
    with open(path, "r") as f:
        data = yaml.safe_load(f) or {}
    data.setdefault("name", name)
    spec = ExperimentSpec.from_dict(data, config)
    logger.debug(f"Loaded preset {name} from {path}")
    return spec
