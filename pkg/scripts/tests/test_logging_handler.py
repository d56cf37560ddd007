#!/usr/bin/python

import logging
import shutil
import tempfile
import unittest
from logging.handlers import RotatingFileHandler
from pathlib import Path

from logging_handler import Logger


class TestLogger(unittest.TestCase):

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.log_folder = Path(self.test_dir) / "nco" / "logs"

    def tearDown(self):
        for handler in list(logging.getLogger("nco_test").handlers):
            logging.getLogger("nco_test").removeHandler(handler)
            handler.close()
        shutil.rmtree(self.test_dir)

    def test_creates_log_file(self):
        logger = Logger("nco_test", self.log_folder).get_logger()
        logger.info("hello")
        self.assertTrue((self.log_folder / "application.log").exists())
        self.assertIn("INFO - nco_test - hello", (self.log_folder / "application.log").read_text())

    def test_handlers_not_duplicated(self):
        Logger("nco_test", self.log_folder)
        logger = Logger("nco_test", self.log_folder, verbosity=True).get_logger()
        self.assertEqual(len(logger.handlers), 2)
        file_handler = next(h for h in logger.handlers if isinstance(h, RotatingFileHandler))
        self.assertEqual(file_handler.level, logging.DEBUG)

    def test_quiet_console(self):
        logger = Logger("nco_test", self.log_folder).get_logger()
        console = next(h for h in logger.handlers if not isinstance(h, RotatingFileHandler))
        self.assertEqual(console.level, logging.WARNING)


if __name__ == '__main__':
    unittest.main()
