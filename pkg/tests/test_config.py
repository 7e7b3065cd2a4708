import unittest
import sys
import os
from unittest.mock import patch

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from config.config import Config

class TestConfig(unittest.TestCase):
    """Test cases for environment-driven configuration"""

    def test_defaults(self):
        """Test default values when no overrides are set"""
        with patch.dict(os.environ, {}, clear=True):
            Config.initialize()
            self.assertEqual(Config.MAX_N, 4)
            self.assertEqual(Config.TRUNCATION, 3)
            self.assertEqual(Config.JOBS, 1)
            self.assertEqual(Config.LOG_LEVEL, 'INFO')

    def test_overrides(self):
        """Test that QGR_* variables are read"""
        with patch.dict(os.environ, {'QGR_JOBS': '3', 'QGR_PROBE_SEED': '11', 'LOG_LEVEL': 'debug'}):
            Config.initialize()
            self.assertEqual(Config.JOBS, 3)
            self.assertEqual(Config.PROBE_SEED, 11)
            self.assertEqual(Config.LOG_LEVEL, 'DEBUG')
        Config.initialize()

    def test_validation_rejects_bad_values(self):
        """Test that invalid values raise ValueError"""
        for key, value in [('QGR_JOBS', '0'), ('QGR_TRUNCATION', '0'), ('QGR_MAX_N', 'four'),
                           ('QGR_REWRITE_BUDGET', '-5')]:
            with self.subTest(key=key):
                with patch.dict(os.environ, {key: value, 'QGR_CACHE_DIR': ''}):
                    with self.assertRaises(ValueError):
                        Config.validate_config()
        Config.initialize()

    def test_suites_and_formats(self):
        """Test the advertised suites and formats"""
        self.assertEqual(len(Config.VERIFY_SUITES), 7)
        self.assertIn('csv', Config.OUTPUT_FORMATS)
        self.assertIn((4, 2), Config.IMPLEMENTED_CASES)

if __name__ == '__main__':
    unittest.main()
