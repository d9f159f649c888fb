#!/usr/bin/env python3
"""
Harness Tests
Tests configuration, presets, validation, traces, aggregation, orchestration and the CLI
"""

import contextlib
import csv
import io
import json
import os
import shutil
import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np
import yaml

# Add engine to path
sys.path.insert(0, str(Path(__file__).parent.parent / "engine"))

from geometry.exceptions import SpecError, UnknownPreset
from harness.aggregator import AGGREGATE_COLUMNS, TraceAggregator
from harness.cli import main
from harness.config import DEFAULTS, REPO_ROOT, deep_merge, load_config, thread_cap
from harness.orchestrator import ExperimentOrchestrator
from harness.presets import PRESET_NAMES, ExperimentSpec, build_init, build_target, preset, replicate_seeds
from harness.recorder import TRACE_COLUMNS, TraceRecorder
from harness.run_logger import EventCategory, EventLevel, RunLogger
from harness.validator import SpecValidator
from inference.estimators import CPolicy
from inference.optimizers import Algorithm, RunConfig, run


def small_spec_dict(**overrides) -> dict:
    """Three-dimensional Gaussian experiment small enough for unit tests"""
    data = {
        "name": "small",
        "target": {"kind": "gaussian", "seed": 11, "scale": 0.01, "floor": 0.1},
        "dims": [3],
        "algorithms": [
            {"algorithm": "svrgvi", "c_policy": {"variant": "fixed", "c": 0.9}, "eta": 0.05},
            {"algorithm": "bwgd", "eta": 50.0},
        ],
        "seeds": [1, 2, 3],
        "steps": 20,
        "record_timing": False,
        "metrics": ["kl", "w2", "c_trace"],
    }
    data.update(overrides)
    return data


def trace_row(iter, f=None, kl=None, diverged=False) -> dict:
    row = {c: None for c in TRACE_COLUMNS}
    row.update({"iter": iter, "f": f, "kl": kl, "c_used": 0.0, "diverged": diverged, "wall_ns": 0})
    return row


class TestConfig(unittest.TestCase):
    """Test configuration loading"""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_deep_merge(self):
        merged = deep_merge({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"c": 5}})
        self.assertEqual(merged, {"a": {"b": 1, "c": 5}, "d": 3})

    def test_file_and_environment_overrides(self):
        path = self.test_dir / "bwvi.yaml"
        path.write_text(yaml.safe_dump({"optimizers": {"eta": 0.5}, "harness": {"presets_dir": "presets"}}))
        env = {"BWVI_CONFIG": str(path), "BWVI_THREADS": "3", "BWVI_LOG_LEVEL": "debug"}
        with mock.patch.dict(os.environ, env):
            config = load_config()
        self.assertEqual(config["optimizers"]["eta"], 0.5)
        self.assertEqual(config["optimizers"]["steps"], DEFAULTS["optimizers"]["steps"])
        self.assertEqual(config["harness"]["threads"], 3)
        self.assertEqual(config["system"]["log_level"], "DEBUG")
        self.assertEqual(Path(config["harness"]["presets_dir"]), (REPO_ROOT / "presets").resolve())
        self.assertEqual(thread_cap(config), 3)

    def test_missing_explicit_file(self):
        with self.assertRaises(FileNotFoundError):
            load_config(self.test_dir / "absent.yaml")

    def test_shipped_config(self):
        config = load_config(REPO_ROOT / "config" / "bwvi_config.yaml")
        self.assertIn("harness", config)
        self.assertGreaterEqual(thread_cap({"harness": {"threads": None}}), 1)


class TestPresets(unittest.TestCase):
    """Test presets and spec expansion"""

    def test_every_preset_loads_and_validates(self):
        validator = SpecValidator()
        for name in PRESET_NAMES:
            spec = preset(name)
            is_valid, reason = validator.validate_spec(spec)
            self.assertTrue(is_valid, f"{name}: {reason}")
            self.assertEqual(len(spec.seeds), 10)
            self.assertTrue(spec.run_configs())

    def test_unknown_preset(self):
        with self.assertRaises(UnknownPreset):
            preset("nosuch")
        self.assertIsInstance(UnknownPreset("nosuch"), KeyError)

    def test_gaussian_d50(self):
        configs = preset("gaussian-d50").run_configs()
        self.assertEqual([c.label for c in configs], ["bwgd", "sgvi", "svrgvi-c0.9"])
        self.assertTrue(all(c.eta == 1.0 for c in configs))
        self.assertEqual(configs[2].c_policy, CPolicy.fixed(0.9))

    def test_c_sweep(self):
        spec = preset("c-sweep")
        configs = spec.run_configs()
        self.assertEqual(len(configs), 7)
        self.assertEqual(configs[0].algorithm, Algorithm.SGVI)
        self.assertEqual(configs[0].label, "sgvi-c0")
        self.assertEqual(configs[-1].label, "svrgvi-c2")
        self.assertEqual(spec.at_full_scale().dims, [200])

    def test_eta_sweep(self):
        spec = preset("eta-sweep")
        self.assertEqual(spec.dims, [100])
        self.assertEqual(spec.steps, 300)
        configs = spec.run_configs()
        self.assertEqual(len(configs), 12)
        self.assertEqual(sorted({c.eta for c in configs}), [0.125, 0.25, 0.5, 1.0])

    def test_minibatch_sweep(self):
        labels = [c.label for c in preset("minibatch").run_configs()]
        self.assertEqual(labels, ["sgvi-m1", "sgvi-m10", "sgvi-m100", "svrgvi-c0.9"])

    def test_overrides(self):
        spec = preset("gaussian-d10")
        smaller = spec.with_overrides(replicates=3, steps=5, record_timing=False)
        self.assertEqual(smaller.seeds, spec.seeds[:3])
        self.assertEqual(smaller.steps, 5)
        self.assertFalse(smaller.record_timing)
        self.assertEqual(spec.steps, 300)

    def test_spec_round_trip(self):
        spec = ExperimentSpec.from_dict(small_spec_dict())
        self.assertEqual(ExperimentSpec.from_dict(spec.to_dict()).to_dict(), spec.to_dict())
        with self.assertRaises(ValueError):
            ExperimentSpec.from_dict(small_spec_dict(colour="red"))

    def test_omitted_fields_come_from_config(self):
        config = deep_merge(DEFAULTS, {
            "optimizers": {"eta": 0.01, "steps": 7, "record_every": 2, "init": "isotropic"},
            "diagnostics": {"objective_samples": 32, "variance_draws": 400},
            "harness": {"seeds": 4, "master_seed": 5, "record_timing": False},
        })
        data = small_spec_dict()
        for key in ("seeds", "steps", "record_timing"):
            data.pop(key)
        spec = ExperimentSpec.from_dict(data, config)
        self.assertEqual(spec.eta, 0.01)
        self.assertEqual(spec.steps, 7)
        self.assertEqual(spec.record_every, 2)
        self.assertEqual(spec.init, {"kind": "isotropic"})
        self.assertEqual((spec.objective_samples, spec.variance_draws), (32, 400))
        self.assertFalse(spec.record_timing)
        self.assertEqual(spec.master_seed, 5)
        self.assertEqual(spec.seeds, replicate_seeds(5, 4))

        # explicit fields win over the configuration
        explicit = ExperimentSpec.from_dict(small_spec_dict(eta=0.3), config)
        self.assertEqual(explicit.eta, 0.3)
        self.assertEqual(explicit.steps, 20)
        self.assertEqual(explicit.seeds, [1, 2, 3])

    def test_run_configs_use_numerics_and_clamp(self):
        config = deep_merge(DEFAULTS, {
            "numerics": {"divergence_threshold": 1e3},
            "estimators": {"adaptive_clamp": [0.2, 0.6]},
        })
        spec = ExperimentSpec.from_dict(small_spec_dict(algorithms=[
            {"algorithm": "svrgvi", "c_policy": {"variant": "adaptive"}},
            {"algorithm": "svrgvi", "c_policy": {"variant": "adaptive", "clamp": [0.1, 0.9]}, "name": "own"},
        ]))
        configured, own = spec.run_configs(config)
        self.assertEqual(configured.c_policy.clamp, (0.2, 0.6))
        self.assertEqual(own.c_policy.clamp, (0.1, 0.9))
        self.assertEqual(configured.divergence_threshold, 1e3)
        default, _ = spec.run_configs()
        self.assertEqual(default.c_policy.clamp, (0.05, 1.0))
        self.assertEqual(default.divergence_threshold, DEFAULTS["numerics"]["divergence_threshold"])

    def test_build_target_and_init(self):
        target = build_target({"kind": "student_t", "seed": 23, "nu": 5.0}, 4)
        self.assertEqual(target.dim, 4)
        self.assertIsNone(target.optimum)
        init = build_init({"kind": "isotropic", "mean": 1.0, "scale": 2.0}, 3)
        np.testing.assert_array_equal(init.mean, np.ones(3))
        np.testing.assert_array_equal(init.cov, 2.0 * np.eye(3))
        with self.assertRaises(ValueError):
            build_target({"kind": "banana"}, 2)


class TestSpecValidator(unittest.TestCase):
    """Test SpecValidator"""

    def setUp(self):
        self.validator = SpecValidator()

    def test_valid_document(self):
        is_valid, reason = self.validator.validate_document(small_spec_dict())
        self.assertTrue(is_valid, reason)

    def test_schema_violations(self):
        data = small_spec_dict()
        del data["name"]
        self.assertFalse(self.validator.validate_document(data)[0])
        self.assertFalse(self.validator.validate_document(small_spec_dict(colour="red"))[0])
        self.assertFalse(self.validator.validate_document(small_spec_dict(dims=[0]))[0])
        self.assertFalse(self.validator.validate_document(["not", "a", "mapping"])[0])

    def test_semantic_violations(self):
        sweep = {"axis": "c", "values": [0.5, 2.5]}
        is_valid, _ = self.validator.validate_document(small_spec_dict(sweep=sweep))
        self.assertFalse(is_valid)

        bad_policy = [{"algorithm": "sgvi", "c_policy": {"variant": "fixed", "c": 0.9}}]
        is_valid, reason = self.validator.validate_document(small_spec_dict(algorithms=bad_policy))
        self.assertFalse(is_valid)
        self.assertIn("algorithm template", reason)

        is_valid, reason = self.validator.validate_document(small_spec_dict(seeds=[1, 1]))
        self.assertFalse(is_valid)
        self.assertIn("distinct", reason)

        duplicate = [{"algorithm": "bwgd"}, {"algorithm": "bwgd", "eta": 0.5}]
        self.assertFalse(self.validator.validate_document(small_spec_dict(algorithms=duplicate))[0])

    def test_run_config(self):
        config = RunConfig(Algorithm.SVRGVI, 1.0, 10, CPolicy.adaptive())
        self.assertTrue(self.validator.validate_run_config(config.to_dict())[0])
        self.assertFalse(self.validator.validate_run_config({"algorithm": "nope"})[0])


class TestTraceRecorder(unittest.TestCase):
    """Test TraceRecorder"""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())
        self.recorder = TraceRecorder(self.test_dir)

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_write_and_read(self):
        target = build_target({"kind": "gaussian", "seed": 11}, 3)
        trace = run(RunConfig(Algorithm.SVRGVI, 1.0, 6, CPolicy.fixed(0.9), seed=4, record_timing=False), target)
        path = self.recorder.write_trace(trace, 3, 0)
        self.assertEqual(path.name, "svrgvi-c0.9_d3_r00.csv")
        rows = TraceRecorder.read_trace(path)
        self.assertEqual([r["iter"] for r in rows], [r.iter for r in trace.records])
        self.assertEqual([r["kl"] for r in rows], [r.kl for r in trace.records])
        self.assertTrue(all(r["wall_ns"] == 0 and r["diverged"] is False for r in rows))
        self.assertEqual(self.recorder.list_traces(), [path])

    def test_rejects_foreign_header(self):
        path = self.test_dir / "foreign.csv"
        path.write_text("a,b\n1,2\n")
        with self.assertRaises(ValueError):
            TraceRecorder.read_trace(path)


class TestRunLogger(unittest.TestCase):
    """Test RunLogger"""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())
        self.run_log = RunLogger(self.test_dir)

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_replica_events(self):
        self.run_log.log_replica("sgvi", 1, 10, 300, diverged=False)
        self.run_log.log_replica("bwgd", 1, 10, 4, diverged=True)
        self.run_log.log_replica("bwgd", 2, 10, 5, diverged=True)
        self.assertEqual(self.run_log.divergence_summary(), {"bwgd": 2})
        self.assertEqual(len(self.run_log.get_events(level=EventLevel.WARNING)), 2)
        self.assertEqual(len(self.run_log.get_events(category=EventCategory.REPLICA)), 1)

        lines = self.run_log.json_log.read_text().splitlines()
        self.assertEqual(len(lines), 3)
        self.assertEqual(json.loads(lines[1])["metadata"]["iterations"], 4)

    def test_memory_bound(self):
        run_log = RunLogger(self.test_dir, {"enabled": False, "max_events_memory": 5})
        for i in range(8):
            run_log.log_event(f"event {i}")
        self.assertEqual(len(run_log.events), 5)
        self.assertEqual(run_log.events[0]["message"], "event 3")

    def test_divergence_count_survives_memory_bound(self):
        run_log = RunLogger(self.test_dir, {"enabled": False, "max_events_memory": 3})
        for seed in range(6):
            run_log.log_replica("bwgd", seed, 10, 2, diverged=True)
        run_log.log_replica("sgvi", 0, 10, 300, diverged=False)
        self.assertEqual(len(run_log.events), 3)
        self.assertEqual(run_log.divergence_summary(), {"bwgd": 6})

    def test_rerun_starts_fresh_log(self):
        self.run_log.log_event("first run")
        self.run_log.log_event("first run again")
        second = RunLogger(self.test_dir)
        second.log_event("second run")
        lines = second.json_log.read_text().splitlines()
        self.assertEqual(len(lines), 1)
        self.assertEqual(json.loads(lines[0])["message"], "second run")


class TestTraceAggregator(unittest.TestCase):
    """Test TraceAggregator"""

    def test_median_and_divergence_counts(self):
        groups = {
            ("a", 2): [
                [trace_row(0, kl=1.0), trace_row(1, kl=0.5)],
                [trace_row(0, kl=3.0), trace_row(1, kl=0.1)],
                [trace_row(0, kl=2.0), trace_row(1, kl=1e13, diverged=True)],
            ]
        }
        rows = TraceAggregator({"metrics": ["kl"]}).aggregate(groups)
        by_iter = {r["iter"]: r for r in rows}
        self.assertEqual(by_iter[0]["median"], 2.0)
        self.assertEqual(by_iter[0]["n"], 3)
        self.assertEqual(by_iter[0]["n_diverged"], 0)
        self.assertAlmostEqual(by_iter[1]["median"], 0.3, places=12)
        self.assertEqual(by_iter[1]["n"], 2)
        self.assertEqual(by_iter[1]["n_diverged"], 1)

        summary = TraceAggregator().final_summary(groups)
        self.assertEqual(summary["a@d2"]["n_diverged"], 1)
        self.assertAlmostEqual(summary["a@d2"]["median"], 0.3, places=12)

    def test_relative_objective(self):
        groups = {
            ("a", 2): [[trace_row(0, f=5.0), trace_row(1, f=2.0)]],
            ("b", 2): [[trace_row(0, f=5.0), trace_row(1, f=1.5)]],
        }
        rows = TraceAggregator({"metrics": ["f_rel"]}).aggregate(groups)
        final = {r["algorithm"]: r["median"] for r in rows if r["iter"] == 1}
        self.assertEqual(final, {"a": 0.5, "b": 0.0})
        self.assertTrue(all(r["metric"] == "f_rel" for r in rows))

    def test_variance_columns(self):
        row = trace_row(0)
        row.update({"var_mc": 4.0, "var_vr": 1.0})
        rows = TraceAggregator({"metrics": ["var_trace"]}).aggregate({("a", 2): [[row]]})
        self.assertEqual({r["metric"]: r["median"] for r in rows}, {"var_mc": 4.0, "var_vr": 1.0})


class TestOrchestrator(unittest.TestCase):
    """Test ExperimentOrchestrator end to end on a small spec"""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())
        self.config = deep_merge(DEFAULTS, {"harness": {"threads": 2}})
        self.spec = ExperimentSpec.from_dict(small_spec_dict())

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_artifact(self):
        out_dir = self.test_dir / "first"
        result = ExperimentOrchestrator(self.config).run_experiment(self.spec, out_dir)

        self.assertEqual(len(result.trace_files), 6)
        self.assertEqual(len(list((out_dir / "traces").glob("*.csv"))), 6)
        for name in ("aggregate.csv", "manifest.json", "events.jsonl"):
            self.assertTrue((out_dir / name).exists(), name)

        with open(out_dir / "manifest.json") as f:
            manifest = json.load(f)
        for key in ("spec", "seeds", "runs", "versions", "targets", "baselines", "summary", "divergences", "files"):
            self.assertIn(key, manifest)
        self.assertEqual(manifest["seeds"], [1, 2, 3])
        self.assertTrue(manifest["baselines"]["laplace"]["3"]["ok"])
        self.assertLess(manifest["baselines"]["laplace"]["3"]["kl"], 1e-8)

        # the oversized BWGD step diverges in every replica without stopping the experiment
        self.assertEqual(manifest["divergences"], {"bwgd": 3})
        self.assertEqual(result.summary["final"]["bwgd@d3"]["n_diverged"], 3)
        self.assertEqual(result.summary["final"]["svrgvi-c0.9@d3"]["n"], 3)

    def test_aggregate_matches_traces(self):
        out_dir = self.test_dir / "agg"
        result = ExperimentOrchestrator(self.config).run_experiment(self.spec, out_dir)
        finals = [
            TraceRecorder.read_trace(p)[-1]["kl"] for p in result.trace_files if p.name.startswith("svrgvi")
        ]
        with open(out_dir / "aggregate.csv", newline="") as f:
            reader = csv.DictReader(f)
            self.assertEqual(reader.fieldnames, AGGREGATE_COLUMNS)
            rows = [
                r for r in reader
                if r["algorithm"] == "svrgvi-c0.9" and r["metric"] == "kl" and r["iter"] == "20"
            ]
        self.assertEqual(len(rows), 1)
        self.assertAlmostEqual(float(rows[0]["median"]), float(np.median(finals)), delta=1e-12)

    def test_reruns_are_byte_identical(self):
        first = self.test_dir / "a"
        second = self.test_dir / "b"
        ExperimentOrchestrator(self.config).run_experiment(self.spec, first)
        ExperimentOrchestrator(deep_merge(self.config, {"harness": {"threads": 1}})).run_experiment(self.spec, second)
        for path in sorted((first / "traces").glob("*.csv")):
            self.assertEqual(path.read_bytes(), (second / "traces" / path.name).read_bytes(), path.name)
        self.assertEqual((first / "aggregate.csv").read_bytes(), (second / "aggregate.csv").read_bytes())

    def test_invalid_spec_rejected(self):
        spec = ExperimentSpec.from_dict(small_spec_dict(seeds=[4, 4]))
        with self.assertRaises(SpecError):
            ExperimentOrchestrator(self.config).run_experiment(spec, self.test_dir / "bad")
        self.assertFalse((self.test_dir / "bad").exists())

    def test_configuration_reaches_every_replica(self):
        config = deep_merge(self.config, {
            "optimizers": {"eta": 0.01},
            "estimators": {"adaptive_clamp": [0.5, 0.5]},
        })
        document = small_spec_dict(algorithms=[{"algorithm": "svrgvi", "c_policy": {"variant": "adaptive"}}])
        out_dir = self.test_dir / "configured"
        result = ExperimentOrchestrator(config).run_experiment(document, out_dir)

        with open(out_dir / "manifest.json") as f:
            manifest = json.load(f)
        self.assertEqual(manifest["runs"][0]["eta"], 0.01)
        self.assertEqual(manifest["runs"][0]["c_policy"]["clamp"], [0.5, 0.5])
        self.assertEqual(len(result.trace_files), 3)
        for path in result.trace_files:
            for row in TraceRecorder.read_trace(path):
                self.assertAlmostEqual(row["c_used"], 0.5, places=12)

    def test_configured_divergence_threshold(self):
        config = deep_merge(self.config, {"numerics": {"divergence_threshold": 1e-30}})
        out_dir = self.test_dir / "strict"
        result = ExperimentOrchestrator(config).run_experiment(small_spec_dict(), out_dir)
        with open(out_dir / "manifest.json") as f:
            manifest = json.load(f)
        self.assertEqual(manifest["divergences"], {"svrgvi-c0.9": 3, "bwgd": 3})
        for path in result.trace_files:
            rows = TraceRecorder.read_trace(path)
            self.assertEqual(len(rows), 1)
            self.assertTrue(rows[0]["diverged"])

    def test_rerun_into_same_directory_replaces_event_log(self):
        out_dir = self.test_dir / "again"
        orchestrator = ExperimentOrchestrator(self.config)
        orchestrator.run_experiment(self.spec, out_dir)
        first = (out_dir / "events.jsonl").read_text().splitlines()
        orchestrator.run_experiment(self.spec, out_dir)
        second = (out_dir / "events.jsonl").read_text().splitlines()
        self.assertEqual(len(first), len(second))


class TestCli(unittest.TestCase):
    """Test the command-line entry point and its exit codes"""

    def setUp(self):
        self.test_dir = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def invoke(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()

    def test_unknown_preset(self):
        code, _, err = self.invoke("run", "--preset", "nosuch", "--out", str(self.test_dir / "x"))
        self.assertEqual(code, 1)
        self.assertIn("nosuch", err)

    def test_bad_flag(self):
        self.assertEqual(self.invoke("run", "--frobnicate")[0], 1)

    def test_missing_spec_file(self):
        self.assertEqual(self.invoke("run", "--spec", str(self.test_dir / "absent.json"))[0], 1)

    def test_invalid_spec_file(self):
        path = self.test_dir / "bad.json"
        path.write_text(json.dumps(small_spec_dict(dims=[])))
        self.assertEqual(self.invoke("run", "--spec", str(path))[0], 1)

    def test_run_spec_file(self):
        path = self.test_dir / "small.yaml"
        path.write_text(yaml.safe_dump(small_spec_dict(steps=5)))
        out_dir = self.test_dir / "out"
        code, out, _ = self.invoke("run", "--config", str(path), "--out", str(out_dir), "--threads", "1", "--no-timing")
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["out_dir"], str(out_dir))
        self.assertTrue((out_dir / "manifest.json").exists())

    def test_diag_bounds(self):
        code, out, _ = self.invoke("diag", "bounds", "--alpha", "1", "--beta", "1", "--eta", "0.01",
                                   "--N", "100", "--d", "2", "--tau-inf", "0.5", "--tau-e", "0.5")
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertLess(payload["convex"], payload["convex_sgvi"])
        self.assertLess(payload["strongly_convex"], payload["strongly_convex_sgvi"])

    def test_diag_bounds_outside_range(self):
        code, out, _ = self.invoke("diag", "bounds", "--alpha", "1", "--beta", "1", "--eta", "0.1", "--N", "10", "--d", "2")
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertIsNone(payload["strongly_convex"])
        self.assertIn("strongly_convex_skipped", payload)

    def test_diag_variance(self):
        code, out, _ = self.invoke("diag", "variance", "--dim", "3", "--n", "1000", "--c", "0.5")
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(payload["n_samples"], 1000)
        self.assertAlmostEqual(payload["gap_analytic"], 2 * 0.5 * 3 - 0.25 * 1.5, places=10)

    def test_diag_variance_too_few_draws(self):
        self.assertEqual(self.invoke("diag", "variance", "--n", "10")[0], 1)

    def test_diag_cloud(self):
        path = self.test_dir / "cloud.csv"
        code, _, _ = self.invoke("diag", "cloud", "--dim", "2", "--n", "20", "--out", str(path))
        self.assertEqual(code, 0)
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "estimator,index,g_1,g_2")
        self.assertEqual(len(lines), 1 + 40 + 1)

    def test_laplace(self):
        path = self.test_dir / "laplace.json"
        code, out, _ = self.invoke("laplace", "--target", "gaussian", "--dim", "4", "--out", str(path))
        self.assertEqual(code, 0)
        self.assertLess(json.loads(out)["kl"], 1e-8)
        self.assertIn("mean", json.loads(path.read_text()))

    def test_region_rejects_non_gaussian(self):
        self.assertEqual(self.invoke("diag", "region", "--target", "student_t", "--dim", "2")[0], 1)


if __name__ == '__main__':
    unittest.main()
