import logging
import os
from importlib import import_module

from rbcsched.sim_config import SimConfig

LOG_ENV = "RBC_SCHED_LOG"
PROVIDER_NAMES = {"tdma": "TDMA", "alternative": "Alternative"}


def create_provider(config: SimConfig):
    name = PROVIDER_NAMES[config.scheduler]
    module = import_module(f"rbcsched.{name}.provider")
    class_ = getattr(module, f"{name}Provider")
    return class_(config)


def setup_logging(level=None):
    """Configure the root logger once; level falls back to $RBC_SCHED_LOG, then WARNING."""
    level = level or os.environ.get(LOG_ENV) or "WARNING"
    if isinstance(level, str) and level.isdigit():
        level = int(level)
    elif isinstance(level, str):
        level = level.upper()
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
