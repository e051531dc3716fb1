import os
from dotenv import load_dotenv

# Load environment variables from .env file in the root directory
load_dotenv(os.path.join(os.path.dirname(__file__), '..', '.env'))


def _int_env(name, default):
    value = os.getenv(name)
    if value is None or value.strip() == '':
        return default
    return int(value)


# Configuration class or variables
class Config:
    def __init__(self):
        # Single override for every materialization cap
        override = _int_env('CROSS_SDP_CAP', None)

        self.JOHNSON_CAP = override if override is not None else _int_env('CROSS_SDP_JOHNSON_CAP', 150)
        self.CUBE_CAP = override if override is not None else _int_env('CROSS_SDP_CUBE_CAP', 128)
        self.ASSEMBLY_CAP = override if override is not None else _int_env('CROSS_SDP_ASSEMBLY_CAP', 150)

        # Exhaustive search domains
        self.ORACLE_CAP = _int_env('CROSS_SDP_ORACLE_CAP', 128)
        self.ORACLE_CUBE_N = _int_env('CROSS_SDP_ORACLE_CUBE_N', 5)

        self.LOG_LEVEL = os.getenv('CROSS_SDP_LOG_LEVEL', 'WARNING')
        self.JOBS = _int_env('CROSS_SDP_JOBS', 1)


# Create a global config instance
config = Config()


# Function to get config instance
def get_config():
    return config


def reload_config():
    """
    Re-read the environment and replace the global config instance
    """
    global config
    config = Config()
    return config
