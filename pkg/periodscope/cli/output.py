"""CSV and JSON writers for command results."""

import csv
from collections.abc import Sequence
from typing import Any, TextIO

from periodscope.schemas.common import OutputDocument, RowModel

TRAILING_COLUMNS = ("status", "error_code")


def columns(model: type[RowModel]) -> list[str]:
    """Field order with the status columns moved to the end."""
    names = [name for name in model.model_fields if name not in TRAILING_COLUMNS]
    return names + list(TRAILING_COLUMNS)


def format_cell(value: Any) -> str:
    """17 significant digits for floats, lower-case booleans, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(rows: Sequence[RowModel], model: type[RowModel], stream: TextIO) -> None:
    """Header row then one line per row, comma-separated with LF endings."""
    names = columns(model)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        data = row.model_dump()
        writer.writerow([format_cell(data[name]) for name in names])


def write_json(document: OutputDocument, stream: TextIO) -> None:
    stream.write(document.model_dump_json(indent=2))
    stream.write("\n")
