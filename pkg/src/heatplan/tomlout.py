"""Minimal TOML emitter for the toolkit's own config schemas.

Supports the subset used by network and scenario files: scalar values,
lists of scalars, nested tables, and arrays of tables. Enough for a
round-trip through tomllib/tomli; not a general-purpose writer.
"""

from __future__ import annotations


def _format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e16:
            return f"{value:.1f}"
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"unsupported TOML scalar: {type(value).__name__}")


def _is_table(value) -> bool:
    return isinstance(value, dict)


def _is_table_array(value) -> bool:
    return isinstance(value, list) and value and all(isinstance(v, dict) for v in value)


def _emit_table(lines: list[str], table: dict, prefix: str) -> None:
    scalars = {k: v for k, v in table.items() if not _is_table(v) and not _is_table_array(v)}
    subtables = {k: v for k, v in table.items() if _is_table(v)}
    arrays = {k: v for k, v in table.items() if _is_table_array(v)}

    for key, value in scalars.items():
        if isinstance(value, list):
            inner = ", ".join(_format_scalar(v) for v in value)
            lines.append(f"{key} = [{inner}]")
        else:
            lines.append(f"{key} = {_format_scalar(value)}")

    for key, value in subtables.items():
        name = f"{prefix}.{key}" if prefix else key
        lines.append("")
        lines.append(f"[{name}]")
        _emit_table(lines, value, name)

    for key, items in arrays.items():
        name = f"{prefix}.{key}" if prefix else key
        for item in items:
            lines.append("")
            lines.append(f"[[{name}]]")
            _emit_table(lines, item, name)


def dumps(data: dict) -> str:
    lines: list[str] = []
    _emit_table(lines, data, "")
    while lines and not lines[0]:
        lines.pop(0)
    return "\n".join(lines) + "\n"
