"""Parametric CC-CV Li-ion charging profile and coulomb-counting integrator.

The profile has four stages over state of charge (soc):

    TC  soc < tc_soc_end           trickle current at v_min
    CC  tc_soc_end <= soc < cc_soc_end  1C current, voltage ramps v_min -> v_max
    CV  cc_soc_end <= soc < 1      v_max, current decays linearly to a floor
    CT  soc >= 1                   no charging

The peak desired power is v_max * I_1c, reached at the CC/CV boundary. Every
function below that has an ``_array`` suffix works elementwise on numpy arrays and
skips argument checks; the simulator runs on those.
"""

import enum
from dataclasses import dataclass

import numpy as np

from rbcsched.sim_config import BatterySpec

SECONDS_PER_HOUR = 3600.0
MAH_PER_AH = 1000.0


class ChargeStage(enum.IntEnum):
    TC = 0
    CC = 1
    CV = 2
    CT = 3


@dataclass(frozen=True)
class BatteryState:
    residual_capacity_mah: float
    full_capacity_mah: float

    def __post_init__(self):
        if self.full_capacity_mah <= 0:
            raise ValueError("full_capacity_mah must be > 0")
        if not 0 <= self.residual_capacity_mah <= self.full_capacity_mah:
            raise ValueError("residual capacity must lie in [0, full capacity]")

    @property
    def soc(self) -> float:
        return self.residual_capacity_mah / self.full_capacity_mah


def _check_soc(soc: float):
    if not 0.0 <= soc <= 1.0:
        raise ValueError(f"soc {soc} outside [0, 1]")


def stage_array(soc, spec: BatterySpec):
    soc = np.asarray(soc, dtype=np.float64)
    return np.select(
        [soc < spec.tc_soc_end, soc < spec.cc_soc_end, soc < 1.0],
        [ChargeStage.TC, ChargeStage.CC, ChargeStage.CV],
        ChargeStage.CT,
    )


def voltage_array(soc, spec: BatterySpec):
    """Charging voltage: v_min in TC, the CC ramp, v_max from CV on."""
    soc = np.asarray(soc, dtype=np.float64)
    ramp = spec.v_min + (spec.v_max - spec.v_min) * (soc - spec.tc_soc_end) / (
        spec.cc_soc_end - spec.tc_soc_end
    )
    return np.where(soc < spec.cc_soc_end, np.maximum(ramp, spec.v_min), spec.v_max)


def current_array(soc, spec: BatterySpec):
    """Desired charging current in amps; 1C through CC, then the CV decay and floor."""
    soc = np.asarray(soc, dtype=np.float64)
    current_1c = spec.c_rate_current_a
    decay = current_1c * np.maximum(
        spec.cv_current_floor_c, (1.0 - soc) / (1.0 - spec.cc_soc_end)
    )
    current = np.where(
        soc < spec.tc_soc_end,
        spec.tc_current_c * current_1c,
        np.minimum(current_1c, decay),
    )
    return np.where(soc < 1.0, current, 0.0)


def profile_arrays(soc, spec: BatterySpec):
    """(voltage, desired power) for every soc in one pass."""
    soc = np.asarray(soc, dtype=np.float64)
    voltage = voltage_array(soc, spec)
    return voltage, current_array(soc, spec) * voltage


def power_array(soc, spec: BatterySpec):
    return profile_arrays(soc, spec)[1]


def integrate_array(residual_mah, power_w, dt_s, spec: BatterySpec, voltage=None):
    """Zero-order hold over dt_s: I = P / V(soc at start), clamped at full.

    ``voltage`` may carry V(soc) already computed for the same residuals.
    """
    residual_mah = np.asarray(residual_mah, dtype=np.float64)
    if voltage is None:
        voltage = voltage_array(residual_mah / spec.full_capacity_mah, spec)
    current_a = np.asarray(power_w, dtype=np.float64) / voltage
    gained = current_a * np.asarray(dt_s, dtype=np.float64) / SECONDS_PER_HOUR * MAH_PER_AH
    charged = np.minimum(spec.full_capacity_mah, residual_mah + gained)
    return np.where(residual_mah >= spec.full_capacity_mah, residual_mah, charged)


def stage_of(soc: float, spec: BatterySpec) -> ChargeStage:
    _check_soc(soc)
    return ChargeStage(int(stage_array(soc, spec)))


def desired_power(soc: float, spec: BatterySpec) -> float:
    _check_soc(soc)
    return float(power_array(soc, spec))


def integrate(
    state: BatteryState, power_w: float, dt_s: float, spec: BatterySpec
) -> BatteryState:
    if state.full_capacity_mah != spec.full_capacity_mah:
        raise ValueError(
            f"state capacity {state.full_capacity_mah} mAh does not match "
            f"the profile's {spec.full_capacity_mah} mAh"
        )
    if power_w < 0 or dt_s < 0:
        raise ValueError("power and dt must be >= 0")
    residual = float(integrate_array(state.residual_capacity_mah, power_w, dt_s, spec))
    return BatteryState(residual, state.full_capacity_mah)


def reference_charge_time(
    spec: BatterySpec, step_s: float = 0.1, initial_mah: float = 0.0
) -> float:
    """Time for one receiver to charge to full at its desired power.

    Fine-step reference for single-receiver runs of either scheduler.
    """
    residual = initial_mah
    elapsed = 0.0
    while residual < spec.full_capacity_mah:
        soc = residual / spec.full_capacity_mah
        power = float(power_array(soc, spec))
        voltage = float(voltage_array(soc, spec))
        residual = min(
            spec.full_capacity_mah,
            residual + power / voltage * step_s / SECONDS_PER_HOUR * MAH_PER_AH,
        )
        elapsed += step_s
    return elapsed


def profile_curve(spec: BatterySpec, soc_step: float = 0.01):
    """Rows of (soc, stage name, desired power) from soc 0 to 1 inclusive."""
    if not 0 < soc_step <= 1:
        raise ValueError("soc_step must lie in (0, 1]")
    count = int(round(1.0 / soc_step))
    socs = np.minimum(np.arange(count + 1) * soc_step, 1.0)
    if socs[-1] < 1.0:
        socs = np.append(socs, 1.0)
    stages = stage_array(socs, spec)
    powers = power_array(socs, spec)
    return [
        (float(soc), ChargeStage(int(stage)).name, float(power))
        for soc, stage, power in zip(socs, stages, powers)
    ]
