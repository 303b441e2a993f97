"""Deterministic CSV and JSON emission: 17 significant digits everywhere."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence


def format_number(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if isinstance(x, complex):
        return f"{format(x.real, '.17g')}{'+' if x.imag >= 0 else '-'}" \
               f"{format(abs(x.imag), '.17g')}j"
    return str(x)


def write_csv(path: str | Path, header: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> None:
    """Fixed column order, header row, newline-terminated records."""
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        lines.append(",".join(format_number(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _json_render(value: Any, indent: int) -> str:
    pad = " " * indent
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{k}": {_json_render(value[k], indent + 2)}'
            for k in value)
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = ",\n".join(f"{pad}  {_json_render(v, indent + 2)}"
                           for v in value)
        return "[\n" + items + "\n" + pad + "]"
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value != value:
            return '"nan"'
        if value in (float("inf"), float("-inf")):
            return f'"{value}"'
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        return f'"{format_number(value)}"'
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_json(path: str | Path, payload: Mapping) -> None:
    """Deterministic JSON with the same 17-digit float policy as the CSVs.

    Key order is insertion order of the payload the driver built, which is
    itself deterministic.
    """
    Path(path).write_text(_json_render(payload, 0) + "\n", encoding="utf-8")
