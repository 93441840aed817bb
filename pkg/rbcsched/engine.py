import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from multiprocessing import Pool
from typing import Optional

import numpy as np
from tqdm import tqdm

from rbcsched.power_chain import overall_efficiency
from rbcsched.scheduler import AccessRequest, Registry, access, deny_list, refresh
from rbcsched.sim_config import SimConfig
from rbcsched.utils import create_provider

logger = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    def __init__(self, message: str, result: "SimResult"):
        super().__init__(message)
        self.result = result


@dataclass
class Segment:
    """What a provider reports for one segment (TDMA) or macro step (alternative)."""

    duration_s: float
    psi: int
    active_receivers: int
    delivered_power_w: float
    transmitter_energy_j: float
    device_energy_j: np.ndarray  # per registry row
    power_limited: bool = False


@dataclass
class SimResult:
    scheduler: str
    n_receivers: int
    drive_power_w: float
    init_mode: str
    seed: Optional[int]
    t_charge_s: float
    avg_multiplexing: float
    start_s: np.ndarray
    duration_s: np.ndarray
    psi: np.ndarray
    active_receivers: np.ndarray
    delivered_power_w: np.ndarray
    device_energy_j: np.ndarray  # indexed by receiver id
    transmitter_energy_j: float
    power_limited_any: bool
    # receiver id -> [(t, C_r, P_c, N_c), ...]
    traces: dict = field(default_factory=dict)
    complete: bool = True

    @property
    def delivered_energy_j(self) -> float:
        return float(self.device_energy_j.sum())

    @property
    def status(self) -> str:
        return "ok" if self.complete else "incomplete"


def init_capacities(
    count: int, mode: str, seed: Optional[int] = None, full_capacity_mah: float = 1000.0
) -> list:
    """Initial residual capacities: all zero, or uniform on [0, C_full).

    Uniform draws come from PCG64, one child stream per receiver spawned from the
    seed, so receiver i gets the same capacity whatever the fleet size.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if mode == "zero":
        return [0.0] * count
    if mode != "uniform":
        raise ValueError(f"unknown init mode {mode!r}")
    if seed is None:
        raise ValueError("seed is required for uniform init")
    children = np.random.SeedSequence(seed).spawn(count)
    return [
        float(np.random.Generator(np.random.PCG64(child)).uniform(0.0, full_capacity_mah))
        for child in children
    ]


def average_multiplexing(psi, durations, total_s: float) -> float:
    """Time-weighted mean multiplexing number over a run of length total_s."""
    if total_s <= 0:
        raise ValueError("T_u must be > 0")
    psi = np.asarray(psi, dtype=np.float64)
    durations = np.asarray(durations, dtype=np.float64)
    if not math.isclose(durations.sum(), total_s, rel_tol=1e-9):
        raise ValueError("segment durations must add up to T_u")
    return float(np.dot(psi, durations) / total_s)


class Simulator:
    def __init__(self, config: SimConfig):
        self.config = config
        self.efficiency = overall_efficiency(config.efficiency)
        self.provider = create_provider(config)

    def init(self) -> Registry:
        config = self.config
        capacities = init_capacities(
            config.n_receivers,
            config.init_mode,
            config.seed,
            config.battery.full_capacity_mah,
        )
        requests = [AccessRequest(index, capacity) for index, capacity in enumerate(capacities)]
        registry = Registry(config.battery.full_capacity_mah)
        return access(requests, registry, deny_list(config.denied_receivers))

    def run(self) -> SimResult:
        config = self.config
        full = config.battery.full_capacity_mah
        step = config.step_s
        registry = self.init()
        logger.info(
            "start %s run: %d receivers, P_d %.1f W, eta %.3f",
            config.scheduler,
            len(registry),
            config.drive.drive_power_w,
            self.efficiency,
        )

        series = {"start": [], "psi": [], "active": [], "power": []}
        traces = {int(receiver_id): [] for receiver_id in registry.ids}
        device_energy = np.zeros(config.n_receivers)
        transmitter_energy = 0.0
        limited_any = False
        done = 0
        next_trace = 0.0

        def build(elapsed, complete):
            durations = np.full(len(series["start"]), step)
            psi = np.asarray(series["psi"], dtype=np.int64)
            return SimResult(
                scheduler=config.scheduler,
                n_receivers=config.n_receivers,
                drive_power_w=config.drive.drive_power_w,
                init_mode=config.init_mode,
                seed=config.seed if config.init_mode == "uniform" else None,
                t_charge_s=elapsed,
                avg_multiplexing=average_multiplexing(psi, durations, elapsed)
                if elapsed > 0
                else 0.0,
                start_s=np.asarray(series["start"], dtype=np.float64),
                duration_s=durations,
                psi=psi,
                active_receivers=np.asarray(series["active"], dtype=np.int64),
                delivered_power_w=np.asarray(series["power"], dtype=np.float64),
                device_energy_j=device_energy,
                transmitter_energy_j=transmitter_energy,
                power_limited_any=limited_any,
                traces=traces,
                complete=complete,
            )

        while True:
            elapsed = done * step
            before = registry.ids
            refresh(registry, config.drive, self.efficiency, config.battery)
            if len(registry) < len(before):
                for receiver_id in np.setdiff1d(before, registry.ids):
                    traces[int(receiver_id)].append((elapsed, full, 0.0, 0))
            if registry.empty:
                break
            if elapsed + step > config.max_time_s:
                result = build(elapsed, complete=False)
                raise SimulationError(
                    f"{len(registry)} receivers still charging after {elapsed:g} s",
                    result,
                )
            if elapsed >= next_trace:
                for profile in registry:
                    traces[profile.receiver_id].append(
                        (
                            elapsed,
                            profile.residual_capacity_mah,
                            profile.desired_power_w,
                            profile.desired_slots,
                        )
                    )
                next_trace += config.trace_interval_s

            segment = self.provider.operate(registry, self.efficiency, step)
            device_energy[registry.ids] += segment.device_energy_j
            transmitter_energy += segment.transmitter_energy_j
            limited_any = limited_any or segment.power_limited
            series["start"].append(elapsed)
            series["psi"].append(segment.psi)
            series["active"].append(segment.active_receivers)
            series["power"].append(segment.delivered_power_w)
            done += 1

        result = build(elapsed, complete=True)
        logger.info(
            "%s run finished: T_charge %.0f s, average multiplexing %.3f",
            config.scheduler,
            result.t_charge_s,
            result.avg_multiplexing,
        )
        return result


def run_tdma(config: SimConfig) -> SimResult:
    if config.scheduler != "tdma":
        raise ValueError("config.scheduler must be 'tdma'")
    return Simulator(config).run()


def run_alternative(config: SimConfig) -> SimResult:
    if config.scheduler != "alternative":
        raise ValueError("config.scheduler must be 'alternative'")
    return Simulator(config).run()


@dataclass(frozen=True)
class SweepCell:
    scheduler: str
    n_receivers: int
    drive_power_w: float
    seed: Optional[int]

    @property
    def sort_key(self):
        return (
            self.scheduler,
            self.n_receivers,
            self.drive_power_w,
            -1 if self.seed is None else self.seed,
        )


@dataclass
class SweepRow:
    cell: SweepCell
    init_mode: str
    result: Optional[SimResult] = None
    error: Optional[str] = None

    @property
    def status(self) -> str:
        return "failed" if self.error else self.result.status


def cell_config(base: SimConfig, cell: SweepCell) -> SimConfig:
    return replace(
        base,
        scheduler=cell.scheduler,
        n_receivers=cell.n_receivers,
        seed=cell.seed if cell.seed is not None else base.seed,
        drive=replace(base.drive, drive_power_w=cell.drive_power_w),
    )


def run_cell(base: SimConfig, cell: SweepCell) -> SweepRow:
    try:
        result = Simulator(cell_config(base, cell)).run()
    except SimulationError as ex:
        logger.warning("cell %s failed: %s", cell, ex)
        return SweepRow(cell, base.init_mode, ex.result, str(ex))
    except ValueError as ex:
        logger.warning("cell %s failed: %s", cell, ex)
        return SweepRow(cell, base.init_mode, None, str(ex))
    return SweepRow(cell, base.init_mode, result)


def sweep(
    base: SimConfig,
    n_values,
    drive_powers,
    schedulers=("tdma",),
    seeds=None,
    jobs: int = 1,
) -> list:
    """Run every (scheduler, N, P_d, seed) cell; rows come back in that order.

    Zero-init cells ignore the seed list and run once. Parallel and serial runs
    give the same rows.
    """
    if seeds is None or base.init_mode == "zero":
        seeds = base.seeds
    cells = [
        SweepCell(scheduler, int(n_receivers), float(drive_power), seed)
        for scheduler in schedulers
        for n_receivers in n_values
        for drive_power in drive_powers
        for seed in seeds
    ]
    if not cells:
        raise ValueError("sweep grid is empty")
    worker = partial(run_cell, base)
    if jobs > 1:
        with Pool(jobs) as pool:
            rows = list(tqdm(pool.imap(worker, cells), total=len(cells), desc="sweep"))
    else:
        rows = [worker(cell) for cell in tqdm(cells, desc="sweep")]
    return sorted(rows, key=lambda row: row.cell.sort_key)


def mean_by_cell(rows: list) -> dict:
    """(scheduler, N, P_d) -> (mean T_charge, mean average multiplexing, runs).

    Means are over the seeds of the cell; failed rows are left out.
    """
    grouped = {}
    for row in rows:
        if row.status != "ok":
            continue
        key = (row.cell.scheduler, row.cell.n_receivers, row.cell.drive_power_w)
        grouped.setdefault(key, []).append(row.result)
    return {
        key: (
            float(np.mean([result.t_charge_s for result in results])),
            float(np.mean([result.avg_multiplexing for result in results])),
            len(results),
        )
        for key, results in grouped.items()
    }
