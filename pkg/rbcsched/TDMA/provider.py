import logging

import numpy as np

from rbcsched.battery import integrate_array
from rbcsched.engine import Segment
from rbcsched.scheduler import Registry, allocate

logger = logging.getLogger(__name__)


class TDMAProvider:
    """OUTPUTTING for one segment: the allocated frame, repeated for T_g."""

    def __init__(self, config):
        self.config = config

    def operate(self, registry: Registry, efficiency: float, duration: float) -> Segment:
        drive = self.config.drive
        frame, rows = allocate(registry, drive.slots_per_frame)
        # the DC-DC stage regulates to P_c; a clamped receiver gets all eta * P_d
        power = np.minimum(registry.power[rows], efficiency * drive.drive_power_w)
        registry.residual[rows] = integrate_array(
            registry.residual[rows],
            power,
            duration,
            self.config.battery,
            voltage=registry.voltage[rows],
        )
        energy = np.zeros(len(registry))
        energy[rows] = power * duration
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("frame %s, %d idle slots", frame.pulses, frame.idle_slots)
        return Segment(
            duration_s=duration,
            psi=frame.multiplexing_number,
            active_receivers=len(registry),
            delivered_power_w=float(power.sum()),
            transmitter_energy_j=drive.drive_power_w
            * frame.used_slots
            / drive.slots_per_frame
            * duration,
            device_energy_j=energy,
            power_limited=bool(registry.limited[rows].any()),
        )
