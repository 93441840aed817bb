import logging
import os
import sys

import fire

from rbcsched.battery import profile_curve
from rbcsched.config_io import override, parse_config
from rbcsched.emit import emit_results, write_table
from rbcsched.engine import (
    SimulationError,
    Simulator,
    SweepCell,
    SweepRow,
    mean_by_cell,
    sweep as run_sweep,
)
from rbcsched.sim_config import RunManifest, SimConfig
from rbcsched.utils import setup_logging

logger = logging.getLogger("rbcsched")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
COMPARE_COLUMNS = (
    "n_receivers",
    "drive_power_w",
    "t_alt_s",
    "t_tdma_s",
    "ratio",
    "avg_multiplexing_alt",
    "avg_multiplexing_tdma",
)
MEANS_COLUMNS = (
    "scheduler",
    "n_receivers",
    "drive_power_w",
    "runs",
    "t_charge_s",
    "avg_multiplexing",
)


def as_list(value, cast):
    """Fire hands over 5, (5, 10) or "5,10"; always return a list."""
    if value is None:
        return None
    if isinstance(value, str):
        value = [item for item in value.split(",") if item.strip()]
    elif not isinstance(value, (list, tuple)):
        value = [value]
    return [cast(item) for item in value]


def compare_table(rows) -> list:
    """Per (N, P_d): seed-averaged T_charge of both schedulers and their ratio."""
    means = mean_by_cell(rows)
    table = []
    for n_receivers, drive_power in sorted(
        {(row.cell.n_receivers, row.cell.drive_power_w) for row in rows}
    ):
        alt = means.get(("alternative", n_receivers, drive_power))
        tdma = means.get(("tdma", n_receivers, drive_power))
        if alt is None or tdma is None:
            logger.warning(
                "N=%d, P_d=%g: a scheduler failed, no ratio", n_receivers, drive_power
            )
            continue
        ratio = tdma[0] / alt[0] if alt[0] > 0 else None
        table.append((n_receivers, drive_power, alt[0], tdma[0], ratio, alt[1], tdma[1]))
    return table


def means_table(rows) -> list:
    """One seed-averaged row per (scheduler, N, P_d) cell that has a finished run."""
    return [
        (scheduler, n_receivers, drive_power, runs, t_charge, avg_multiplexing)
        for (scheduler, n_receivers, drive_power), (t_charge, avg_multiplexing, runs) in sorted(
            mean_by_cell(rows).items()
        )
    ]


def write_means(rows, manifest: RunManifest) -> str:
    return write_table(
        os.path.join(manifest.out_dir, "means"),
        MEANS_COLUMNS,
        means_table(rows),
        manifest.output_format,
    )


class Commands:
    """Experiments of the TDMA charging scheduler.

    Exit codes: 0 success, 1 invalid input, 2 simulation or I/O failure.
    """

    @staticmethod
    def _load(command, config, out, fmt, verbose, **changes):
        manifest = RunManifest(config, command, out, fmt, verbose)
        setup_logging(manifest.verbosity)
        sim_config = parse_config(config) if config else SimConfig()
        changes = {key: value for key, value in changes.items() if value is not None}
        if changes:
            sim_config = override(sim_config, **changes)
        return manifest, sim_config

    def run(
        self,
        config=None,
        out="out",
        format="csv",  # pylint: disable=redefined-builtin
        seed=None,
        n=None,
        drive_power=None,
        scheduler=None,
        verbose=None,
    ):
        """One charging run of the configured scheduler."""
        manifest, sim_config = self._load(
            "run",
            config,
            out,
            format,
            verbose,
            seed=seed,
            n_receivers=n,
            drive_power_w=drive_power,
            scheduler=scheduler,
        )
        cell = SweepCell(
            sim_config.scheduler,
            sim_config.n_receivers,
            sim_config.drive.drive_power_w,
            sim_config.seed if sim_config.init_mode == "uniform" else None,
        )
        try:
            result = Simulator(sim_config).run()
        except SimulationError as ex:
            row = SweepRow(cell, sim_config.init_mode, ex.result, str(ex))
            emit_results([row], manifest.output_format, manifest.out_dir, sim_config)
            raise
        row = SweepRow(cell, sim_config.init_mode, result)
        emit_results([row], manifest.output_format, manifest.out_dir, sim_config)
        print(
            f"{result.scheduler}: T_charge {result.t_charge_s:.0f} s, "
            f"average multiplexing {result.avg_multiplexing:.3f}"
        )

    def compare(
        self,
        config=None,
        out="out",
        format="csv",  # pylint: disable=redefined-builtin
        seed=None,
        n=None,
        drive_power=None,
        runs=None,
        jobs=1,
        verbose=None,
    ):
        """Both schedulers for every (N, P_d); writes compare, means and summary tables."""
        manifest, sim_config = self._load(
            "compare", config, out, format, verbose, seed=seed, runs=runs
        )
        rows = run_sweep(
            sim_config,
            as_list(n, int) or [sim_config.n_receivers],
            as_list(drive_power, float) or [sim_config.drive.drive_power_w],
            ("alternative", "tdma"),
            jobs=jobs,
        )
        emit_results(rows, manifest.output_format, manifest.out_dir, sim_config)
        table = compare_table(rows)
        write_table(
            os.path.join(manifest.out_dir, "compare"),
            COMPARE_COLUMNS,
            table,
            manifest.output_format,
        )
        write_means(rows, manifest)
        for n_receivers, drive_power, t_alt, t_tdma, ratio, _, _ in table:
            ratio = "-" if ratio is None else f"{ratio:.3f}"
            print(
                f"N={n_receivers}, P_d={drive_power:g} W: "
                f"alternative {t_alt:.0f} s, tdma {t_tdma:.0f} s, ratio {ratio}"
            )
        if any(row.status != "ok" for row in rows):
            raise SimulationError("some cells failed, see summary", None)

    def sweep(
        self,
        config=None,
        out="out",
        format="csv",  # pylint: disable=redefined-builtin
        seed=None,
        n=None,
        drive_power=None,
        scheduler=None,
        runs=None,
        jobs=1,
        verbose=None,
    ):
        """Every (scheduler, N, P_d, seed) cell of the grid."""
        manifest, sim_config = self._load(
            "sweep", config, out, format, verbose, seed=seed, runs=runs
        )
        rows = run_sweep(
            sim_config,
            as_list(n, int) or [sim_config.n_receivers],
            as_list(drive_power, float) or [sim_config.drive.drive_power_w],
            as_list(scheduler, str) or [sim_config.scheduler],
            jobs=jobs,
        )
        emit_results(rows, manifest.output_format, manifest.out_dir, sim_config)
        write_means(rows, manifest)
        failed = [row for row in rows if row.status != "ok"]
        print(f"{len(rows)} cells, {len(failed)} failed")
        if failed:
            raise SimulationError("some cells failed, see summary", None)

    def profile(
        self,
        config=None,
        out="out",
        format="csv",  # pylint: disable=redefined-builtin
        step=0.01,
        verbose=None,
    ):
        """The desired charging power curve over state of charge."""
        manifest, sim_config = self._load("profile", config, out, format, verbose)
        os.makedirs(manifest.out_dir, exist_ok=True)
        path = write_table(
            os.path.join(manifest.out_dir, "profile"),
            ("soc", "stage", "desired_power_w"),
            profile_curve(sim_config.battery, float(step)),
            manifest.output_format,
        )
        print(path)


def main(argv=None) -> int:
    try:
        setup_logging()
        fire.Fire(Commands, command=argv)
    except fire.core.FireExit as ex:
        return EXIT_OK if ex.code == 0 else EXIT_INVALID
    except ValueError as ex:  # ConfigError, RegistryError and bad arguments
        logger.error("%s", ex)
        return EXIT_INVALID
    except (SimulationError, OSError) as ex:
        logger.error("%s", ex)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
