"""Renders a metrics table as plain text, markdown or JSON.

Non-baseline rows carry the percent change against the baseline next to each
value, e.g. ``0.4493 (+20.3%)``.
"""

import math
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from rigalign.models.base import json_dumps
from rigalign.models.evaluation import MetricsTable


TEMPLATES_DIR = Path(__file__).parent.parent / "templates"

TEMPLATES = {"text": "metrics.txt", "markdown": "metrics.md"}

FORMATS = [*TEMPLATES, "json"]


def header(table: MetricsTable) -> list[str]:
    return [
        "Method",
        "average IoU",
        *[f"Recall@IoU={threshold:g}" for threshold in sorted(table.thresholds)],
        "center-offset (px)",
    ]


def value(number: float, column: int, columns: int) -> str:
    if math.isnan(number):
        return "n/a"
    if column == columns - 1:
        return f"{number:.2f}"
    return f"{number:.4f}"


def delta(pct: float) -> str:
    if math.isnan(pct):
        return "n/a"
    if abs(pct) < 100:
        return f"{pct:+.1f}%"
    return f"{pct:+.0f}%"


def cells(table: MetricsTable) -> list[list[str]]:
    rows = []
    for row in table.rows:
        values = row.values
        formatted = [value(number, i, len(values)) for i, number in enumerate(values)]
        deltas = table.deltas(row)
        if deltas is not None:
            formatted = [f"{text} ({delta(pct)})" for text, pct in zip(formatted, deltas)]
        rows.append([row.name, *formatted])
    return rows


def widths(rows: list[list[str]]) -> list[int]:
    return [max(len(cell) for cell in column) for column in zip(*rows)]


def table_row(row: list[str], widths: list[int]) -> str:
    return " | ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()


def table_rule(widths: list[int]) -> str:
    return "-+-".join("-" * width for width in widths)


def percent(number: float) -> str:
    return f"{number * 100:+.2f} pp"


def get_environment() -> Environment:
    environment = Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        auto_reload=False,
    )
    environment.filters.update(
        dict(table_row=table_row, table_rule=table_rule, percent=percent)
    )
    return environment


def render(table: MetricsTable, format: str = "text") -> str:
    if format == "json":
        return json_dumps(table.to_dict()) + "\n"
    try:
        template_name = TEMPLATES[format]
    except KeyError:
        raise ValueError(f"Unknown report format {format!r}, use one of {FORMATS}")
    head = header(table)
    rows = cells(table)
    template = get_environment().get_template(template_name)
    return template.render(
        header=head,
        rows=rows,
        widths=widths([head, *rows]),
        table=table,
    )
