import pytest

from rbcsched.sim_config import BatterySpec, SimConfig


@pytest.fixture
def small_config():
    """10 mAh cells charge in about 90 s, so whole runs stay fast."""

    def make(**changes):
        changes.setdefault("battery", BatterySpec(full_capacity_mah=10.0))
        changes.setdefault("n_receivers", 3)
        return SimConfig(**changes)

    return make
