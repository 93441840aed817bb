import csv
import json
import logging
import os

from rbcsched.config_io import dump_config

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = (
    "scheduler",
    "n_receivers",
    "drive_power_w",
    "init_mode",
    "seed",
    "t_charge_s",
    "avg_multiplexing",
    "power_limited_any",
    "status",
)
TIMESERIES_COLUMNS = ("t_s", "psi", "active_receivers", "delivered_power_w")
TRACE_COLUMNS = (
    "receiver_id",
    "t_s",
    "residual_capacity_mah",
    "desired_power_w",
    "desired_slots",
)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path_stem: str, columns, rows, fmt: str) -> str:
    """Write rows (sequences in column order) as CSV or as a JSON list of records."""
    if fmt == "csv":
        path = path_stem + ".csv"
        with open(path, "w", encoding="utf-8", newline="") as fp:
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
    elif fmt == "json":
        path = path_stem + ".json"
        records = [dict(zip(columns, row)) for row in rows]
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            json.dump(records, fp, indent=1)
            fp.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def result_stem(row) -> str:
    cell = row.cell
    seed = "none" if cell.seed is None else cell.seed
    return f"{cell.scheduler}_n{cell.n_receivers}_pd{cell.drive_power_w:g}_seed{seed}"


def summary_record(row) -> tuple:
    cell, result = row.cell, row.result
    return (
        cell.scheduler,
        cell.n_receivers,
        cell.drive_power_w,
        row.init_mode,
        cell.seed,
        result.t_charge_s if result else None,
        result.avg_multiplexing if result else None,
        result.power_limited_any if result else None,
        row.status,
    )


def timeseries_records(result):
    return zip(
        result.start_s.tolist(),
        result.psi.tolist(),
        result.active_receivers.tolist(),
        result.delivered_power_w.tolist(),
    )


def trace_records(result):
    for receiver_id in sorted(result.traces):
        for t_s, residual, power, slots in result.traces[receiver_id]:
            yield (receiver_id, float(t_s), float(residual), float(power), int(slots))


def emit_results(rows, fmt: str, directory: str, config=None) -> list:
    """Write the summary table plus one timeseries and one trace table per result.

    Rows must already be in their final order; output depends only on the rows.
    """
    if not rows:
        raise ValueError("nothing to emit")
    os.makedirs(directory, exist_ok=True)
    paths = [
        write_table(
            os.path.join(directory, "summary"),
            SUMMARY_COLUMNS,
            [summary_record(row) for row in rows],
            fmt,
        )
    ]
    for row in rows:
        if row.result is None:
            continue
        stem = result_stem(row)
        paths.append(
            write_table(
                os.path.join(directory, f"timeseries_{stem}"),
                TIMESERIES_COLUMNS,
                timeseries_records(row.result),
                fmt,
            )
        )
        paths.append(
            write_table(
                os.path.join(directory, f"traces_{stem}"),
                TRACE_COLUMNS,
                trace_records(row.result),
                fmt,
            )
        )
    if config is not None:
        path = os.path.join(directory, "config.yaml")
        dump_config(config, path)
        paths.append(path)
    logger.info("wrote %d files to %s", len(paths), directory)
    return paths
