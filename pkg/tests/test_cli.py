import json
import os
import tempfile
import unittest
from pathlib import Path

import pandas as pd
from typer.testing import CliRunner

from syllobench import dataio
from syllobench.cli import app
from syllobench.synthetic import generate_noisy_population

RESOURCES = Path(os.path.dirname(__file__)) / "resources"

runner = CliRunner()


def invoke(*args, env=None):
    environment = {"SYLLOBENCH_SEED": None}
    environment.update(env or {})
    return runner.invoke(app, [str(arg) for arg in args], env=environment)


class TestGen(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.out = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_zero_noise_population(self):
        result = invoke("gen", "--noise", 0, "--seed", 1, "--out", self.out)
        self.assertEqual(result.exit_code, 0, result.output)
        frame = pd.read_csv(self.out / "population.csv")
        self.assertEqual(len(frame), 256 * 64)

    def test_same_seed_same_file(self):
        invoke("gen", "--noise", 0.3, "--seed", 1, "--out", self.out / "a")
        invoke("gen", "--noise", 0.3, "--seed", 1, "--out", self.out / "b")
        self.assertEqual(
            (self.out / "a" / "population.csv").read_bytes(),
            (self.out / "b" / "population.csv").read_bytes(),
        )

    def test_seed_from_environment(self):
        invoke("gen", "--noise", 0.3, "--seed", 4, "--out", self.out / "flag")
        result = invoke("gen", "--noise", 0.3, "--out", self.out / "env", env={"SYLLOBENCH_SEED": "4"})
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(
            (self.out / "flag" / "population.csv").read_bytes(),
            (self.out / "env" / "population.csv").read_bytes(),
        )

    def test_noise_out_of_range_is_usage_error(self):
        self.assertEqual(invoke("gen", "--noise", 1.5, "--seed", 1, "--out", self.out).exit_code, 2)

    def test_noise_without_seed_is_usage_error(self):
        self.assertEqual(invoke("gen", "--noise", 0.3, "--out", self.out).exit_code, 2)


class TestRun(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.directory = tempfile.TemporaryDirectory()
        cls.root = Path(cls.directory.name)
        cls.data = dataio.save_dataset(generate_noisy_population(0.2, 1)[:10], cls.root / "synth.csv")

    @classmethod
    def tearDownClass(cls):
        cls.directory.cleanup()

    def test_summary_has_one_entry_per_model(self):
        out = self.root / "three"
        result = invoke("run", "--data", self.data, "--models", "mfa,ubcf,ibcf", "--seed", 7, "--jobs", 1,
                        "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out / "summary.json", "r") as summary_file:
            summary = json.load(summary_file)
        self.assertEqual([m["model"] for m in summary["models"]], ["ibcf", "mfa", "ubcf"])
        self.assertEqual(summary["seed"], 7)
        self.assertEqual(summary["config"]["models"], ["mfa", "ubcf", "ibcf"])
        self.assertEqual(len(pd.read_csv(out / "trials.csv")), 3 * 10 * 64)

    def test_rerun_is_byte_identical(self):
        for name in ("first", "second"):
            invoke("run", "--data", self.data, "--models", "random,ubcf-fit", "--seed", 3, "--jobs", 1,
                   "--out", self.root / name)
        self.assertEqual(
            (self.root / "first" / "trials.csv").read_bytes(),
            (self.root / "second" / "trials.csv").read_bytes(),
        )

    def test_bundled_table_model(self):
        result = invoke("run", "--data", self.data, "--models", "table:phm_min_illustrative", "--seed", 3,
                        "--jobs", 1, "--out", self.root / "table")
        self.assertEqual(result.exit_code, 0, result.output)

    def test_unknown_model_is_usage_error(self):
        result = invoke("run", "--data", self.data, "--models", "mfa,psycop", "--seed", 7, "--out", self.root)
        self.assertEqual(result.exit_code, 2)

    def test_invalid_table_is_runtime_error(self):
        table = RESOURCES / "tables" / "missing_task.json"
        result = invoke("run", "--data", self.data, "--models", f"table:{table}", "--seed", 7, "--jobs", 1,
                        "--out", self.root / "bad")
        self.assertEqual(result.exit_code, 1)

    def test_invalid_dataset_is_runtime_error(self):
        result = invoke("run", "--data", RESOURCES / "datasets" / "bad_response.csv", "--models", "mfa",
                        "--seed", 7, "--jobs", 1, "--out", self.root / "bad")
        self.assertEqual(result.exit_code, 1)

    def test_missing_seed_is_usage_error(self):
        result = invoke("run", "--data", self.data, "--models", "mfa", "--out", self.root)
        self.assertEqual(result.exit_code, 2)

    def test_config_file_with_flag_overrides(self):
        out = self.root / "configured"
        result = invoke("run", "--config", RESOURCES / "configs" / "run_config.yaml", "--data", self.data,
                        "--out", out, "--jobs", 1)
        self.assertEqual(result.exit_code, 0, result.output)
        with open(out / "summary.json", "r") as summary_file:
            summary = json.load(summary_file)
        self.assertEqual(summary["seed"], 7)
        self.assertEqual(summary["config"]["data"], [str(self.data)])
        self.assertEqual([m["model"] for m in summary["models"]], ["mfa", "ubcf"])

    def test_dump_matrix(self):
        matrix = self.root / "matrix.csv"
        result = invoke("run", "--data", self.data, "--models", "ibcf", "--seed", 1, "--jobs", 1,
                        "--out", self.root / "dump", "--dump-matrix", matrix)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(pd.read_csv(matrix, index_col="item").shape, (576, 576))

    def test_entropy_with_results(self):
        out = self.root / "entropy"
        invoke("run", "--data", self.data, "--models", "mfa", "--seed", 1, "--jobs", 1, "--out", out)
        result = invoke("entropy", "--data", self.data, "--results", out, "--bins", 4, "--out", out)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(len(pd.read_csv(out / "entropy.csv")), 64)
        curve = pd.read_csv(out / "entropy_curve.csv")
        self.assertEqual(list(curve.columns), ["x", "model", "accuracy", "n"])
        self.assertLessEqual(len(curve), 4)
        self.assertEqual(len(pd.read_csv(out / "entropy_scatter.csv")), 64)


class TestCurve(unittest.TestCase):
    def test_empty_grid_is_usage_error(self):
        self.assertEqual(invoke("curve", "--grid", "", "--seed", 1).exit_code, 2)

    def test_grid_out_of_range_is_usage_error(self):
        self.assertEqual(invoke("curve", "--grid", "0,1.5", "--seed", 1).exit_code, 2)

    def test_small_grid(self):
        with tempfile.TemporaryDirectory() as directory:
            result = invoke("curve", "--grid", "0,1", "--models", "mfa", "--seed", 3, "--jobs", 1,
                            "--out", directory)
            self.assertEqual(result.exit_code, 0, result.output)
            curve = pd.read_csv(Path(directory) / "noise_curve.csv")
            self.assertEqual(list(curve["x"]), [0.0, 1.0])
            self.assertEqual(list(curve["n"]), [256 * 64] * 2)
            self.assertTrue((Path(directory) / "noise_entropy_curve.csv").exists())

    def test_target_accuracy_out_of_range_is_usage_error(self):
        self.assertEqual(invoke("curve", "--grid", "0,1", "--seed", 1, "--target-accuracy", 1.5).exit_code, 2)

    def test_target_accuracy_writes_noise_equivalents(self):
        with tempfile.TemporaryDirectory() as directory:
            result = invoke("curve", "--grid", "0,1", "--models", "mfa", "--seed", 3, "--jobs", 1,
                            "--target-accuracy", 0.5, "--out", directory)
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("noise_equivalent.csv", " ".join(result.output.split()))
            equivalents = pd.read_csv(Path(directory) / "noise_equivalent.csv")
            self.assertEqual(list(equivalents.columns), ["model", "target_accuracy", "noise"])
            self.assertEqual(list(equivalents["model"]), ["mfa"])
            self.assertTrue(0.0 <= equivalents["noise"][0] <= 1.0)


class TestValidate(unittest.TestCase):
    def test_valid_dataset(self):
        result = invoke("validate", RESOURCES / "datasets" / "small.csv")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("3 subjects", " ".join(result.output.split()))

    def test_invalid_dataset(self):
        self.assertEqual(invoke("validate", RESOURCES / "datasets" / "duplicate_task.csv").exit_code, 1)

    def test_valid_table(self):
        table = Path(dataio.__file__).parent / "tables" / "phm_min_illustrative.json"
        self.assertEqual(invoke("validate", "--table", table).exit_code, 0)

    def test_invalid_table(self):
        self.assertEqual(invoke("validate", "--table", RESOURCES / "tables" / "bad_code.json").exit_code, 1)
