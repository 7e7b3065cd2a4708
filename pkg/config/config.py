import os
from dotenv import load_dotenv

# Load environment variables from .env file if running locally
load_dotenv()

class Config:
    """Configuration class for the quantum Grassmannian toolkit"""

    @staticmethod
    def get_config_value(key: str, default: str = None):
        """Get configuration value from environment variables"""
        return os.getenv(key, default)

    # Runtime configuration (environment driven, see initialize)
    CACHE_DIR = '.qgr_cache'
    MAX_N = 4
    JOBS = 1
    PROBE_SEED = 20240607
    REWRITE_BUDGET = 10000
    TRUNCATION = 3
    LOG_LEVEL = 'INFO'

    @classmethod
    def initialize(cls):
        """Initialize configuration values"""
        cls.CACHE_DIR = cls.get_config_value('QGR_CACHE_DIR', '.qgr_cache')
        cls.MAX_N = int(cls.get_config_value('QGR_MAX_N', '4'))
        cls.JOBS = int(cls.get_config_value('QGR_JOBS', '1'))
        cls.PROBE_SEED = int(cls.get_config_value('QGR_PROBE_SEED', '20240607'))
        cls.REWRITE_BUDGET = int(cls.get_config_value('QGR_REWRITE_BUDGET', '10000'))
        cls.TRUNCATION = int(cls.get_config_value('QGR_TRUNCATION', '3'))
        cls.LOG_LEVEL = cls.get_config_value('LOG_LEVEL', 'INFO').upper()

    # Application Configuration
    APP_NAME = 'Quantum Grassmannian Tangent Spaces'
    APP_VERSION = '1.0.0'

    # Cases with golden classification data
    IMPLEMENTED_CASES = [(2, 1), (3, 1), (4, 1), (4, 2)]

    VERIFY_SUITES = [
        'relations', 'pairing', 'primitives', 'actions',
        'nilpotency', 'rank', 'orthogonality'
    ]

    OUTPUT_FORMATS = ['json', 'csv', 'text']

    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    @classmethod
    def validate_config(cls):
        """Validate essential configuration"""
        try:
            cls.initialize()
        except ValueError as e:
            raise ValueError(f"Invalid numeric configuration value: {e}")

        if cls.JOBS < 1:
            raise ValueError("QGR_JOBS must be a positive integer")
        if cls.REWRITE_BUDGET < 1:
            raise ValueError("QGR_REWRITE_BUDGET must be a positive integer")
        if cls.PROBE_SEED < 0:
            raise ValueError("QGR_PROBE_SEED must be non-negative")
        if cls.TRUNCATION < 1:
            raise ValueError("QGR_TRUNCATION must be at least 1")
        if cls.CACHE_DIR:
            try:
                os.makedirs(cls.CACHE_DIR, exist_ok=True)
            except OSError as e:
                raise ValueError(f"Cache directory {cls.CACHE_DIR} is not writable: {e}")
            if not os.access(cls.CACHE_DIR, os.W_OK):
                raise ValueError(f"Cache directory {cls.CACHE_DIR} is not writable")
        return True
