#!/usr/bin/python

import json
import math
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import MagicMock, patch

import pandas as pd

from config_module import CONFIG_ENV
from nco_cli import EXIT_ENGINE, EXIT_ERROR, EXIT_OK, main


class TestNcoCli(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.out_dir = Path(self.test_dir)
        self.environ = patch.dict(os.environ)
        self.environ.start()
        os.environ.pop(CONFIG_ENV, None)

    def tearDown(self):
        self.environ.stop()
        shutil.rmtree(self.test_dir)

    def run_cli(self, *argv):
        return main(list(argv) + ["--log-dir", str(self.out_dir / "logs")])

    @patch('nco_cli.Logger')
    def test_expand(self, mock_logger_class):
        mock_logger_instance = MagicMock()
        mock_logger_class.return_value.get_logger.return_value = mock_logger_instance

        out = self.out_dir / "expand.txt"
        self.assertEqual(self.run_cli("expand", "-o", str(out)), EXIT_OK)
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], "alpha^2 * H0")
        for label in ("eta/hbar * H_eta", "theta/hbar * H_theta", "theta*eta/hbar^2 * H_eta_theta"):
            self.assertIn(label, lines)
        self.assertTrue(lines[1].startswith("    "))

    @patch('nco_cli.Logger')
    def test_expand_json(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        out = self.out_dir / "expand.json"
        self.assertEqual(self.run_cli("expand", "-f", "json", "-o", str(out)), EXIT_OK)
        groups = json.loads(out.read_text())["groups"]
        self.assertEqual([group["order"] for group in groups], [[0, 0], [0, 1], [1, 0], [1, 1], [0, 2], [2, 0]])

    @patch('nco_cli.Logger')
    def test_spectrum(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        out = self.out_dir / "spectrum.csv"
        code = self.run_cli("spectrum", "--omega-c", "8", "--omega", "3", "--cutoff-xy", "2", "--cutoff-z", "1", "-o", str(out))
        self.assertEqual(code, EXIT_OK)
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], "# omega_tilde=5")
        self.assertEqual(lines[1], "level,energy")
        self.assertEqual(len(lines), 2 + 12)
        self.assertAlmostEqual(float(lines[2].split(",")[1]), 6.5, places=12)

    @patch('nco_cli.Logger')
    def test_pt(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        out = self.out_dir / "pt.csv"
        code = self.run_cli("pt", "--omega-c", "1", "--eta", "1e-3", "--cutoff-xy", "8", "--cutoff-z", "4", "-o", str(out))
        self.assertEqual(code, EXIT_OK)
        frame = pd.read_csv(out)
        self.assertEqual(len(frame), 30)
        ground = frame[(frame.n_rho == 0) & (frame.mu == 0) & (frame.n_z == 0)].iloc[0]
        self.assertAlmostEqual(ground.dE_pt, 2.2360679775e-4, delta=1e-12)
        self.assertAlmostEqual(ground.dE_paper, -2.2360679775e-4, delta=1e-12)

    @patch('nco_cli.Logger')
    def test_verify(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        out = self.out_dir / "report.json"
        code = self.run_cli("verify", "--theta", "1e-3", "--eta", "1e-3", "--cutoff-xy", "8", "--cutoff-z", "4",
                            "-f", "json", "-o", str(out))
        self.assertEqual(code, EXIT_OK)
        document = json.loads(out.read_text())
        statuses = {item["name"]: item["status"] for item in document["identities"]}
        self.assertEqual(statuses["H_eta_theta"], "MISMATCH")
        self.assertEqual(statuses["H_eta"], "MATCH")
        self.assertEqual(len(document["corrections"]), 30)
        summary = (self.out_dir / "report.summary.txt").read_text()
        self.assertIn("Engine checks passed", summary)

    @patch('nco_cli.Logger')
    def test_verify_is_reproducible(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        outputs = []
        for run in ("first", "second"):
            out = self.out_dir / f"{run}.csv"
            code = self.run_cli("verify", "--theta", "1e-3", "--eta", "1e-3", "--cutoff-xy", "8", "--cutoff-z", "4",
                                "-o", str(out))
            self.assertEqual(code, EXIT_OK)
            outputs.append(out.read_bytes())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(len(outputs[0].decode().splitlines()), 31)

    @patch('nco_cli.correction_failures', return_value=["(n_rho=0, mu=0, n_z=0): forced"])
    @patch('nco_cli.Logger')
    def test_verify_engine_failure(self, mock_logger_class, mock_failures):
        mock_logger_instance = MagicMock()
        mock_logger_class.return_value.get_logger.return_value = mock_logger_instance

        out = self.out_dir / "report.csv"
        code = self.run_cli("verify", "--cutoff-xy", "6", "--cutoff-z", "2", "-o", str(out))
        self.assertEqual(code, EXIT_ENGINE)
        mock_logger_instance.error.assert_called_with("(n_rho=0, mu=0, n_z=0): forced")
        self.assertIn("FAILED", (self.out_dir / "report.summary.txt").read_text())

    @patch('nco_cli.Logger')
    def test_sweep(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        out = self.out_dir / "sweep.csv"
        code = self.run_cli("sweep", "--sweep", "omega_c:0:2:5", "--cutoff-xy", "4", "--cutoff-z", "2",
                            "--sweep-levels", "1", "-o", str(out))
        self.assertEqual(code, EXIT_OK)
        frame = pd.read_csv(out)
        self.assertEqual(list(frame.columns), ["point", "param", "value", "omega_tilde", "level", "energy"])
        self.assertEqual(len(frame), 5)
        for _, row in frame.iterrows():
            self.assertAlmostEqual(row["energy"], math.sqrt(1 + row["value"] ** 2 / 4) + 0.5, places=10)

    @patch('nco_cli.Logger')
    def test_deterministic_output(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        outputs = []
        for workers in ("1", "4"):
            out = self.out_dir / f"sweep_{workers}.csv"
            self.run_cli("sweep", "--sweep", "eta:0:0.002:4", "--theta", "1e-3", "--cutoff-xy", "4", "--cutoff-z", "2",
                         "--workers", workers, "-o", str(out))
            outputs.append(out.read_bytes())
        self.assertEqual(outputs[0], outputs[1])

    @patch('nco_cli.Logger')
    def test_sweep_without_axis(self, mock_logger_class):
        mock_logger_instance = MagicMock()
        mock_logger_class.return_value.get_logger.return_value = mock_logger_instance

        self.assertEqual(self.run_cli("sweep"), EXIT_ERROR)
        mock_logger_instance.error.assert_called()

    @patch('nco_cli.Logger')
    def test_configuration_errors(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        self.assertEqual(self.run_cli("spectrum", "--alpha", "1.5"), EXIT_ERROR)
        self.assertEqual(self.run_cli("spectrum", "--config", str(self.out_dir / "missing.conf")), EXIT_ERROR)
        bad = self.out_dir / "bad.conf"
        bad.write_text("omega_c 1\n")
        self.assertEqual(self.run_cli("spectrum", "--config", str(bad)), EXIT_ERROR)
        self.assertEqual(self.run_cli("spectrum", "--max-states", "10"), EXIT_ERROR)

    @patch('nco_cli.Logger')
    def test_correction_tables_respect_capacity(self, mock_logger_class):
        mock_logger_instance = MagicMock()
        mock_logger_class.return_value.get_logger.return_value = mock_logger_instance

        # the (4, 2) basis holds 45 states; the padded operator basis (6, 4) holds 140
        for command in ("pt", "verify"):
            out = self.out_dir / f"{command}.csv"
            code = self.run_cli(command, "--eta", "1e-3", "--cutoff-xy", "4", "--cutoff-z", "2",
                                "--max-states", "45", "-o", str(out))
            self.assertEqual(code, EXIT_ERROR, msg=command)
            self.assertFalse(out.exists())
        mock_logger_instance.error.assert_any_call("Basis (6, 4) has 140 states, limit is 45")

    @patch('nco_cli.Logger')
    def test_zero_degeneracy_tolerance_rejected(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        out = self.out_dir / "pt.csv"
        code = self.run_cli("pt", "--omega-c", "0", "--theta", "1e-3", "--deg-tol", "0", "-o", str(out))
        self.assertEqual(code, EXIT_ERROR)
        self.assertFalse(out.exists())

    @patch('nco_cli.Logger')
    def test_config_file_from_environment(self, mock_logger_class):
        mock_logger_class.return_value.get_logger.return_value = MagicMock()

        config = self.out_dir / "nco.conf"
        config.write_text("omega_c = 8\nomega = 3\ncutoff_xy = 1\ncutoff_z = 0\n")
        os.environ[CONFIG_ENV] = str(config)
        out = self.out_dir / "spectrum.csv"
        self.assertEqual(self.run_cli("spectrum", "-o", str(out)), EXIT_OK)
        self.assertEqual(out.read_text().splitlines()[0], "# omega_tilde=5")

    def test_usage_error(self):
        with self.assertRaises(SystemExit) as context:
            main(["bogus"])
        self.assertEqual(context.exception.code, EXIT_ERROR)


if __name__ == '__main__':
    unittest.main()
