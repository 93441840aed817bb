"""Closed-form power conversion of the charging link.

Transmitter driving power P_d reaches a battery as P_c = eta * delta * P_d, where eta
is the product of the six stage efficiencies and delta the duty cycle of the beam
pulses a receiver sees. The power buffer is an ideal lossless averager.
"""

import math
from dataclasses import dataclass

import numpy as np

from rbcsched.sim_config import EfficiencyChain

# relative slack before the slot ceiling, so 84.00000000000001 counts as 84
SLOT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PwmWave:
    peak_power_w: float
    pulse_width_s: float
    period_s: float

    def __post_init__(self):
        if np.any(np.asarray(self.period_s) <= 0):
            raise ValueError("period_s must be > 0")
        pulse = np.asarray(self.pulse_width_s)
        if np.any(pulse < 0) or np.any(pulse > self.period_s):
            raise ValueError("pulse_width_s must lie in [0, period_s]")
        if np.any(np.asarray(self.peak_power_w) < 0):
            raise ValueError("peak_power_w must be >= 0")

    @property
    def duty_cycle(self) -> float:
        return self.pulse_width_s / self.period_s


def overall_efficiency(chain: EfficiencyChain) -> float:
    chain.validate()
    return math.prod(
        (chain.eta_s, chain.eta_pc, chain.eta_t, chain.eta_r, chain.eta_pb, chain.eta_dc)
    )


def buffer_output(wave: PwmWave) -> float:
    return wave.duty_cycle * wave.peak_power_w


def charging_power(drive_power, duty, efficiency):
    return efficiency * duty * drive_power


def duty_for_power(power, drive_power, efficiency):
    if np.any(np.asarray(drive_power) <= 0) or np.any(np.asarray(efficiency) <= 0):
        raise ValueError("drive_power and efficiency must be > 0")
    if np.any(np.asarray(power) < 0):
        raise ValueError("desired power must be >= 0")
    return power / (efficiency * drive_power)


def slots_for_power(power, drive_power, efficiency, num_slots: int):
    """Desired slot number N_c = ceil(delta * N_s), clamped to the frame.

    Works on a scalar or an array of powers. Returns (slots, power_limited); a
    receiver asking for more than eta * P_d gets the whole frame and the flag.
    """
    if num_slots < 1:
        raise ValueError("num_slots must be >= 1")
    duty = duty_for_power(power, drive_power, efficiency)
    exact = np.asarray(duty, dtype=np.float64) * num_slots
    wanted = np.ceil(exact * (1.0 - SLOT_TOLERANCE))
    limited = wanted > num_slots
    slots = np.minimum(wanted, num_slots).astype(np.int64)
    if slots.ndim == 0:
        return int(slots), bool(limited)
    return slots, limited
