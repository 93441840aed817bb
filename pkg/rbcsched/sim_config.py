import math
from dataclasses import dataclass, field, fields
from typing import Optional

SCHEDULERS = ("tdma", "alternative")
INIT_MODES = ("zero", "uniform")
OUTPUT_FORMATS = ("csv", "json")
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, key: str, message: str, line: Optional[int] = None):
        self.key = key
        self.line = line
        self.message = message
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}{where}: {message}")


@dataclass
class EfficiencyChain:
    eta_s: float = 0.4  # driver, electrical -> beam
    eta_pc: float = 1.0
    eta_t: float = 1.0
    eta_r: float = 0.5  # PV cell
    eta_pb: float = 1.0
    eta_dc: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not 0.0 < value <= 1.0:
                raise ConfigError(item.name, f"{item.name} out of range (0,1]")


@dataclass
class DriveSettings:
    drive_power_w: float = 21.0  # 4.2 W peak / 20%
    slots_per_frame: int = 200
    slot_width_s: float = 1e-6
    segment_width_s: float = 1.0

    def __post_init__(self):
        if self.drive_power_w < 0:
            raise ConfigError("drive_power_w", "drive_power_w must be >= 0")
        if self.slots_per_frame < 1:
            raise ConfigError("slots_per_frame", "slots_per_frame must be >= 1")
        if self.slot_width_s <= 0:
            raise ConfigError("slot_width_s", "slot_width_s must be > 0")
        if self.segment_width_s <= 0:
            raise ConfigError("segment_width_s", "segment_width_s must be > 0")
        frames = self.segment_width_s / self.frame_width_s
        if not math.isclose(frames, round(frames), rel_tol=1e-9) or round(frames) < 1:
            raise ConfigError(
                "segment_width_s",
                f"segment_width_s must be a multiple of the frame width "
                f"{self.frame_width_s:g} s",
            )

    @property
    def frame_width_s(self) -> float:
        # T_f = N_s * T_s, also the PWM period T_w of every receiver
        return self.slots_per_frame * self.slot_width_s

    @property
    def frames_per_segment(self) -> int:
        return round(self.segment_width_s / self.frame_width_s)


@dataclass
class BatterySpec:
    full_capacity_mah: float = 1000.0
    c_rate_current_a: float = 1.0
    tc_soc_end: float = 0.1
    cc_soc_end: float = 0.8
    v_min: float = 3.0
    v_max: float = 4.2
    tc_current_c: float = 0.1
    cv_current_floor_c: float = 0.05

    def __post_init__(self):
        if self.full_capacity_mah <= 0:
            raise ConfigError("full_capacity_mah", "full_capacity_mah must be > 0")
        if self.c_rate_current_a <= 0:
            raise ConfigError("c_rate_current_a", "c_rate_current_a must be > 0")
        if not 0.0 < self.tc_soc_end < self.cc_soc_end:
            raise ConfigError("tc_soc_end", "need 0 < tc_soc_end < cc_soc_end")
        if not self.cc_soc_end < 1.0:
            raise ConfigError("cc_soc_end", "need cc_soc_end < 1")
        if not 0.0 < self.v_min < self.v_max:
            raise ConfigError("v_min", "need 0 < v_min < v_max")
        if not 0.0 < self.tc_current_c <= 1.0:
            raise ConfigError("tc_current_c", "tc_current_c out of range (0,1]")
        if not 0.0 < self.cv_current_floor_c <= 1.0:
            raise ConfigError(
                "cv_current_floor_c", "cv_current_floor_c out of range (0,1]"
            )

    @property
    def peak_power_w(self) -> float:
        return self.v_max * self.c_rate_current_a


@dataclass
class SimConfig:
    scheduler: str = "tdma"
    n_receivers: int = 50
    init_mode: str = "zero"
    seed: Optional[int] = None
    runs: int = 10  # seeds per random-init cell
    efficiency: EfficiencyChain = field(default_factory=EfficiencyChain)
    drive: DriveSettings = field(default_factory=DriveSettings)
    battery: BatterySpec = field(default_factory=BatterySpec)
    refresh_period_s: Optional[float] = None  # None -> segment width
    max_time_s: float = 1e7
    trace_interval_s: float = 60.0
    denied_receivers: tuple = ()

    def __post_init__(self):
        self.scheduler = self.scheduler.lower()
        if self.scheduler not in SCHEDULERS:
            raise ConfigError("scheduler", f"scheduler must be one of {SCHEDULERS}")
        if self.n_receivers < 0:
            raise ConfigError("n_receivers", "n_receivers must be >= 0")
        if self.init_mode not in INIT_MODES:
            raise ConfigError("init_mode", f"init_mode must be one of {INIT_MODES}")
        if self.init_mode == "uniform" and self.seed is None:
            raise ConfigError("seed", "seed is required when init_mode is uniform")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "seed must be an unsigned 64-bit integer")
        if self.runs < 1:
            raise ConfigError("runs", "runs must be >= 1")
        if self.refresh_period_s is not None:
            if self.refresh_period_s <= 0:
                raise ConfigError("refresh_period_s", "refresh_period_s must be > 0")
            frames = self.refresh_period_s / self.drive.frame_width_s
            if not math.isclose(frames, round(frames), rel_tol=1e-9) or round(frames) < 1:
                raise ConfigError(
                    "refresh_period_s",
                    "refresh_period_s must be a multiple of the frame width",
                )
        if self.max_time_s <= 0:
            raise ConfigError("max_time_s", "max_time_s must be > 0")
        if self.trace_interval_s <= 0:
            raise ConfigError("trace_interval_s", "trace_interval_s must be > 0")
        self.denied_receivers = tuple(self.denied_receivers)

    @property
    def step_s(self) -> float:
        if self.scheduler == "tdma" or self.refresh_period_s is None:
            return self.drive.segment_width_s
        return self.refresh_period_s

    @property
    def frames_per_step(self) -> int:
        return round(self.step_s / self.drive.frame_width_s)

    @property
    def seeds(self) -> list:
        if self.init_mode == "zero":
            return [None]
        return [self.seed + k for k in range(self.runs)]


@dataclass
class RunManifest:
    config_path: Optional[str]
    command: str
    out_dir: str = "out"
    output_format: str = "csv"
    verbosity: Optional[str] = None

    def __post_init__(self):
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError("format", f"format must be one of {OUTPUT_FORMATS}")
