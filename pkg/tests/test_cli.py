import unittest
import sys
import os
import json
import tempfile

# Add the src directory and the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from cli import (EXIT_AUDIT, EXIT_CONFIG, EXIT_OK, RunConfig, build_parser, dims_rows, main,
                 verify_actions, verify_nilpotency, verify_orthogonality, verify_pairing, verify_relations)

class TestRunConfig(unittest.TestCase):
    """Test cases for run configuration validation"""

    def _config(self, **overrides):
        values = dict(N=2, r=1, max_dim=None, truncation=3, cache_dir=None, probe_seed=1, jobs=1)
        values.update(overrides)
        return RunConfig(**values)

    def test_valid_configuration(self):
        """Test a valid configuration"""
        cfg = self._config()
        self.assertEqual(cfg.format, "json")
        self.assertEqual(cfg.max_n, 4)

    def test_invalid_values(self):
        """Test that invalid parameters raise ValueError"""
        for overrides in ({"r": 2}, {"r": 0}, {"N": 5, "r": 1}, {"truncation": 0},
                          {"jobs": 0}, {"max_dim": -1}, {"format": "xml"}):
            with self.subTest(**overrides):
                with self.assertRaises(ValueError):
                    self._config(**overrides)

    def test_dimension_rows(self):
        """Test computed and predicted dimensions at (2, 1)"""
        rows = dims_rows(self._config(), 2)
        self.assertEqual([row["computed"] for row in rows], [1, 3, 6])
        self.assertTrue(all(row["match"] for row in rows))

    def test_verification_suites(self):
        """Test two inexpensive suites at (2, 1)"""
        self.assertTrue(verify_actions(self._config())["passed"])
        self.assertTrue(verify_orthogonality(self._config(truncation=2))["passed"])

    def test_suites_up_to_four(self):
        """Test relation soundness, orthogonality and the action formulas for every case with N <= 4"""
        for N, r in [(2, 1), (3, 1), (4, 1), (4, 2)]:
            with self.subTest(N=N, r=r):
                self.assertTrue(verify_relations(self._config(N=N, r=r, truncation=3))["passed"])
                self.assertTrue(verify_orthogonality(self._config(N=N, r=r, truncation=2))["passed"])
                self.assertTrue(verify_actions(self._config(N=N, r=r))["passed"])

    def test_pairing_and_nilpotency_suites(self):
        """Test the pairing and nilpotency suites at (2, 1) and (3, 1)"""
        for N in (2, 3):
            with self.subTest(N=N):
                self.assertTrue(verify_pairing(self._config(N=N))["passed"])
                result = verify_nilpotency(self._config(N=N))
                self.assertTrue(result["passed"], result["witness"])

class TestCommandLine(unittest.TestCase):
    """Test cases for the command-line entry point"""

    def setUp(self):
        """Set up test fixtures"""
        self.tmp = tempfile.TemporaryDirectory()
        self.previous = os.environ.get('QGR_CACHE_DIR')
        os.environ['QGR_CACHE_DIR'] = os.path.join(self.tmp.name, 'cache')

    def tearDown(self):
        """Restore the environment"""
        if self.previous is None:
            os.environ.pop('QGR_CACHE_DIR', None)
        else:
            os.environ['QGR_CACHE_DIR'] = self.previous
        self.tmp.cleanup()

    def _output(self, name):
        return os.path.join(self.tmp.name, name)

    def test_parser_subcommands(self):
        """Test argument parsing"""
        args = build_parser().parse_args(["verify", "rank", "--N", "3", "--r", "1"])
        self.assertEqual(args.command, "verify")
        self.assertEqual(args.suite, "rank")
        self.assertEqual(args.max_dim, "auto")
        with self.assertRaises(SystemExit):
            build_parser().parse_args(["verify", "unknown", "--N", "3", "--r", "1"])

    def test_dims_command(self):
        """Test the dims command writes a JSON report"""
        path = self._output("dims.json")
        code = main(["dims", "--N", "2", "--r", "1", "--k", "2", "--output", path])
        self.assertEqual(code, EXIT_OK)
        with open(path, 'r') as f:
            report = json.load(f)
        self.assertEqual([row["predicted"] for row in report["rows"]], [1, 3, 6])

    def test_dims_csv(self):
        """Test CSV output"""
        path = self._output("dims.csv")
        code = main(["dims", "--N", "2", "--r", "1", "--k", "1", "--format", "csv", "--output", path])
        self.assertEqual(code, EXIT_OK)
        with open(path, 'r') as f:
            lines = f.read().strip().splitlines()
        self.assertEqual(lines[0], "k,computed,predicted,match")
        self.assertEqual(len(lines), 3)

    def test_classify_command(self):
        """Test a full classification run at (2, 1)"""
        path = self._output("classify.json")
        code = main(["classify", "--N", "2", "--r", "1", "--output", path])
        self.assertEqual(code, EXIT_OK)
        with open(path, 'r') as f:
            report = json.load(f)
        self.assertTrue(report["certified"])
        names = sorted(space["name"] for space in report["spaces"])
        self.assertEqual(names, sorted(["T0", "T+", "T-", "T", "T1,+", "T1,-"]))

    def test_audit_refusal_exit_code(self):
        """Test exit code 2 when the truncation is too low"""
        code = main(["audit", "--N", "2", "--r", "1", "--truncation", "1", "--output", self._output("a.json")])
        self.assertEqual(code, EXIT_AUDIT)
        code = main(["classify", "--N", "2", "--r", "1", "--truncation", "1",
                     "--output", self._output("c.json")])
        self.assertEqual(code, EXIT_AUDIT)

    def test_audit_max_dim_beyond_range(self):
        """Test that max-dim above 2r(N-r) is refused"""
        code = main(["audit", "--N", "3", "--r", "1", "--max-dim", "9", "--output", self._output("a.json")])
        self.assertEqual(code, EXIT_AUDIT)

    def test_invalid_configuration_exit_code(self):
        """Test exit code 4 for parameters out of range"""
        self.assertEqual(main(["audit", "--N", "3", "--r", "3"]), EXIT_CONFIG)
        self.assertEqual(main(["audit", "--N", "9", "--r", "2"]), EXIT_CONFIG)
        self.assertEqual(main(["dims", "--N", "2", "--r", "1", "--k", "-1"]), EXIT_CONFIG)

    def test_verify_command(self):
        """Test a verification suite through main"""
        path = self._output("verify.json")
        code = main(["verify", "relations", "--N", "2", "--r", "1", "--truncation", "2",
                     "--output", path, "--export", self._output("rules.json")])
        self.assertEqual(code, EXIT_OK)
        with open(path, 'r') as f:
            self.assertTrue(json.load(f)["passed"])
        with open(self._output("rules.json"), 'r') as f:
            rules = json.load(f)
        self.assertTrue(any(rule["case_tag"] == "trace" for rule in rules))

if __name__ == '__main__':
    unittest.main()
