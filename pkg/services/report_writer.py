import csv
import json
import logging
import math
import os

from services import __version__

# Configure logging
logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
VALUE_FORMAT = "%.16e"


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    return VALUE_FORMAT % value


def _json_value(value):
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    value = float(value)
    # JSON has no NaN or infinity; an undefined entry is written as null
    if not math.isfinite(value):
        return None
    return float(VALUE_FORMAT % value)


def write_table(path, command, parameters, columns, rows, fmt="csv"):
    """
    Write one table with its run parameters as a header.

    Output is deterministic: parameters are sorted and nothing time-dependent
    is written.

    Args:
        path: file path without extension
        command: subcommand name recorded in the header
        parameters: dict of run parameters
        columns: column names
        rows: iterable of row sequences, one value per column
        fmt: "csv" or "json"

    Returns:
        str: path of the written file
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    target = f"{path}.{fmt}"
    directory = os.path.dirname(target)
    if directory:
        os.makedirs(directory, exist_ok=True)

    rows = [list(row) for row in rows]
    if fmt == "csv":
        with open(target, "w", encoding="utf-8", newline="") as handle:
            handle.write(f"# catwva {__version__}\n")
            handle.write(f"# command: {command}\n")
            for key in sorted(parameters):
                handle.write(f"# {key}: {parameters[key]}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_value(v) for v in row])
    else:
        document = {
            "meta": {"version": __version__, "command": command,
                     "parameters": {k: _json_value(v) for k, v in parameters.items()}},
            "columns": list(columns),
            "rows": [[_json_value(v) for v in row] for row in rows],
        }
        with open(target, "w", encoding="utf-8") as handle:
            json.dump(document, handle, sort_keys=True, indent=1, allow_nan=False)
            handle.write("\n")

    logger.info(f"Wrote {len(rows)} rows to {target}")
    return target


def read_csv_table(path):
    """
    Read a table written by write_table back as (parameters, columns, rows).

    Values stay strings.
    """
    parameters = {}
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            parameters[key] = value
        else:
            body.append(line)
    table = list(csv.reader(body))
    return parameters, table[0], table[1:]
