"""CSV output with 17 significant digits and a provenance comment line."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

import numpy as np

FLOAT_FORMAT = "%.17g"


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if v == 0.0:
            v = 0.0  # drop the sign of negative zero
        return FLOAT_FORMAT % v
    return str(v)


def provenance_line(command: str, config_sha256: str, seed: int) -> str:
    return f"# snailopto {command} config_sha256={config_sha256} seed={seed}"


def write_csv(
    stream,
    header: Sequence[str],
    rows: Iterable[Sequence],
    command: str,
    config_sha256: str,
    seed: int,
    notes: Sequence[str] = (),
) -> None:
    """Comment lines, header row, data rows; line endings are ``\\n``."""
    stream.write(provenance_line(command, config_sha256, seed) + "\n")
    for note in notes:
        stream.write(f"# {note}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(v) for v in row])


def to_string(header, rows, command="", config_sha256="", seed=0, notes=()) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows, command, config_sha256, seed, notes)
    return buf.getvalue()


def read_csv(path_or_stream) -> dict:
    """Read a CSV written by :func:`write_csv` (or any headed CSV) into column arrays.

    Comment lines are skipped; empty cells become NaN; non-numeric columns
    stay as lists of strings.
    """
    if hasattr(path_or_stream, "read"):
        text = path_or_stream.read()
    else:
        with open(path_or_stream, encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValueError("CSV has no header row") from None
    cols = {h: [] for h in header}
    for row in reader:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
        for h, cell in zip(header, row):
            cols[h].append(cell.strip())
    out = {}
    for h, cells in cols.items():
        try:
            out[h] = np.array([float(c) if c != "" else math.nan for c in cells])
        except ValueError:
            out[h] = cells
    return out


def require_columns(table: dict, names: Sequence[str]) -> None:
    missing = [n for n in names if n not in table]
    if missing:
        raise ValueError(f"input CSV lacks columns: {', '.join(missing)}")
