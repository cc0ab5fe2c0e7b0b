"""Table emitters for CSV and JSON.

Floats are written with 17 significant digits so every value survives a
write/read cycle bit-exactly, and re-emitting a table that was read back
reproduces the original bytes. Missing values are an empty CSV field or JSON
``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Sequence

FORMATS = ("csv", "json")


def format_number(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"cannot serialize non-finite value {v!r}")
        return format(v, ".17g")
    raise TypeError(f"not a number: {v!r}")


def _json_value(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    return format_number(v)


def render(columns: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else format_number(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        lines = ['{"columns": [' + ", ".join(json.dumps(c) for c in columns) + '], "rows": [']
        body = ["[" + ", ".join(_json_value(v) for v in row) + "]" for row in rows]
        lines.append(",\n".join(body))
        lines.append("]}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")


def write_table(path: Path, columns: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str) -> Path:
    path = Path(path)
    if path.suffix != f".{fmt}":
        path = path.with_name(f"{path.name}.{fmt}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(columns, rows, fmt), encoding="utf-8")
    return path


def _parse_field(text: str) -> Any:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path: Path) -> tuple[list[str], list[list[Any]]]:
    """Read a table written by :func:`write_table`; numbers come back typed."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        return list(doc["columns"]), [list(r) for r in doc["rows"]]
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    return columns, [[_parse_field(v) for v in row] for row in reader]
