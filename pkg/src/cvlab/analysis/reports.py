"""Plain key-value rendering shared by every report."""

from __future__ import annotations

import math
from dataclasses import asdict, is_dataclass


def fmt_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if isinstance(v, bool) else "none"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(fmt_value(x) for x in v) + "]"
    return str(v)


def render(title: str, items) -> str:
    lines = [f"[{title}]"]
    for key, value in items:
        lines.append(f"{key} = {fmt_value(value)}")
    return "\n".join(lines) + "\n"


def flat_items(obj, prefix=""):
    """Scalar fields of a (nested) dataclass as ``(dotted_key, value)`` pairs."""
    data = asdict(obj) if is_dataclass(obj) else obj
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from flat_items(value, name + ".")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                yield from flat_items(item, f"{name}.{i}.")
        else:
            yield name, value
