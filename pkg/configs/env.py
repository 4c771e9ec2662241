# configs/env.py
"""
Environment Configuration

Load environment variables and set runtime mode.
"""

import os

# Load .env file if python-dotenv available
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass


# ==================== Environment ====================
RUN_ENV = os.getenv("REBOUND_ENV", "development")


# ==================== Logging ====================
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "[%(name)s] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
