import numpy as np

from rbcsched.battery import integrate_array
from rbcsched.engine import Segment
from rbcsched.scheduler import Registry, alternative_rotation


class AlternativeProvider:
    """Round-robin baseline: every frame goes to one receiver at its own P_c.

    A macro step of many frames deals the frames out in cyclic id order; a receiver
    holds its desired power for its frames only. The driving power follows P_c / eta.
    """

    def __init__(self, config):
        self.config = config
        self.cursor = None

    def operate(self, registry: Registry, efficiency: float, duration: float) -> Segment:
        frame_width = self.config.drive.frame_width_s
        frames = self.config.frames_per_step
        active = len(registry)
        base, remainder = divmod(frames, active)
        if remainder:
            share = np.full(active, base, dtype=np.int64)
            extra, self.cursor = alternative_rotation(registry, self.cursor, remainder)
            share[registry.rows_of(extra)] += 1
            on_time = share * frame_width
        else:
            # an even deal leaves the cursor where it is
            on_time = base * frame_width

        power = registry.power
        registry.residual = integrate_array(
            registry.residual,
            power,
            on_time,
            self.config.battery,
            voltage=registry.voltage,
        )
        energy = power * on_time
        return Segment(
            duration_s=duration,
            psi=1,
            active_receivers=active,
            delivered_power_w=float(energy.sum() / duration),
            transmitter_energy_j=float(energy.sum() / efficiency),
            device_energy_j=energy,
        )
