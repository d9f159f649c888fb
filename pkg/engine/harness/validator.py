"""
Spec Validator - structural and semantic checks for experiment specifications
Rejects malformed specs before any replica runs
"""

import logging
from typing import Any, Dict, Optional, Tuple

from jsonschema import Draft7Validator

from inference.estimators import CPolicy
from inference.optimizers import Algorithm, RunConfig

from .presets import METRICS, SWEEP_AXES, ExperimentSpec

logger = logging.getLogger(__name__)


POLICY_SCHEMA = {
    "type": "object",
    "properties": {
        "variant": {"enum": ["fixed", "adaptive", "zero"]},
        "c": {"type": "number", "minimum": 0, "maximum": 2},
        "clamp": {
            "type": "array",
            "items": {"type": "number", "minimum": 0},
            "minItems": 2,
            "maxItems": 2,
        },
    },
    "required": ["variant"],
}

SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "target": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["gaussian", "student_t", "logreg"]},
                "seed": {"type": "integer"},
                "nu": {"type": "number", "exclusiveMinimum": 0},
                "n": {"type": "integer", "minimum": 1},
                "scale": {"type": "number", "exclusiveMinimum": 0},
                "floor": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["kind"],
        },
        "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "algorithms": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "algorithm": {"enum": [a.value for a in Algorithm]},
                    "c_policy": POLICY_SCHEMA,
                    "minibatch": {"type": "integer", "minimum": 1},
                    "eta": {"type": "number", "exclusiveMinimum": 0},
                    "name": {"type": "string"},
                },
                "required": ["algorithm"],
            },
        },
        "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "replicates": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer"},
        "eta": {"type": "number", "exclusiveMinimum": 0},
        "steps": {"type": "integer", "minimum": 1},
        "sweep": {
            "type": ["object", "null"],
            "properties": {
                "axis": {"enum": list(SWEEP_AXES)},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
            },
            "required": ["axis", "values"],
        },
        "metrics": {"type": "array", "items": {"enum": list(METRICS)}},
        "record_every": {"type": "integer", "minimum": 1},
        "track_variance": {"type": "boolean"},
        "variance_draws": {"type": "integer", "minimum": 100},
        "objective_samples": {"type": "integer", "minimum": 1},
        "record_timing": {"type": "boolean"},
        "init": {"type": "object"},
        "full_scale": {"type": "object"},
    },
    "required": ["name", "target", "dims", "algorithms"],
    "additionalProperties": False,
}


class SpecValidator:
    """
    Validation for experiment specifications

    Checks:
    - JSON structure against SPEC_SCHEMA
    - Every expanded RunConfig constructs
    - Sweep values make sense for their axis
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize spec validator

        Args:
            config: Validator configuration
        """
        self.config = config or {}
        self.max_replicates = self.config.get("max_replicates", 1000)
        self._schema = Draft7Validator(SPEC_SCHEMA)

        logger.info(f"Spec Validator initialized (max_replicates={self.max_replicates})")

    def validate_document(self, data: Dict[str, Any], config: Optional[Dict] = None) -> Tuple[bool, str]:
        """
        Validate a raw spec document (parsed JSON or YAML)

        Args:
            data: Spec document
            config: Configuration supplying defaults for omitted fields

        Returns:
            Tuple of (is_valid, reason)
        """
        if not isinstance(data, dict):
            return False, "Spec must be a mapping"

        errors = sorted(self._schema.iter_errors(data), key=lambda e: list(e.path))
        if errors:
            first = errors[0]
            location = "/".join(str(p) for p in first.path) or "<root>"
            logger.warning(f"Spec rejected at {location}: {first.message}")
            return False, f"Schema violation at {location}: {first.message}"

        try:
            spec = ExperimentSpec.from_dict(data, config)
        except (TypeError, ValueError) as e:
            return False, f"Invalid spec: {e}"
        return self.validate_spec(spec)

    def validate_spec(self, spec: ExperimentSpec) -> Tuple[bool, str]:
        """
        Semantic checks on a constructed spec

        Returns:
            Tuple of (is_valid, reason)
        """
        if not spec.seeds:
            return False, "At least one replicate seed is required"
        if len(spec.seeds) > self.max_replicates:
            return False, f"Too many replicates ({len(spec.seeds)} > {self.max_replicates})"
        if len(set(spec.seeds)) != len(spec.seeds):
            return False, "Replicate seeds must be distinct"

        is_valid, reason = self._validate_sweep(spec.sweep)
        if not is_valid:
            return is_valid, reason

        try:
            configs = spec.run_configs()
        except (KeyError, TypeError, ValueError) as e:
            return False, f"Invalid algorithm template: {e}"

        labels = [c.label for c in configs]
        if len(set(labels)) != len(labels):
            return False, f"Algorithm labels collide: {labels}"

        if spec.track_variance and spec.variance_draws < 100:
            return False, "Variance tracking needs at least 100 draws"

        return True, "Spec validated"

    def validate_run_config(self, data: Dict[str, Any]) -> Tuple[bool, str]:
        """Validate a single serialized RunConfig"""
        try:
            RunConfig.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            return False, f"Invalid run config: {e}"
        return True, "Run config validated"

    def _validate_sweep(self, sweep: Optional[Dict[str, Any]]) -> Tuple[bool, str]:
        if not sweep:
            return True, "No sweep"
        axis = sweep.get("axis")
        values = sweep.get("values", [])
        if axis not in SWEEP_AXES:
            return False, f"Unknown sweep axis: {axis}"
        if not values:
            return False, "Sweep needs at least one value"
        if axis == "c":
            for c in values:
                try:
                    CPolicy.fixed(c)
                except ValueError as e:
                    return False, str(e)
        elif axis == "eta" and any(v <= 0 for v in values):
            return False, "Step sizes must be positive"
        elif axis == "minibatch" and any(int(v) != v or v < 1 for v in values):
            return False, "Minibatch sizes must be positive integers"
        return True, "Sweep validated"
