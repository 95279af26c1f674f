"""
JSON and CSV rendering of command reports.

Floats are written with a fixed number of significant digits and fractions
as "num/den" strings so that identical runs give identical bytes.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from django.conf import settings
from django.core.serializers.json import DjangoJSONEncoder

from .runconfig import RunConfig


def round_float(value: float, digits: Optional[int] = None) -> float:
    if not math.isfinite(value):
        return value
    digits = digits or settings.KSBOX_FLOAT_DIGITS
    return float(f"{value:.{digits}g}")


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class ReportEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also knows fractions and numpy scalars"""

    def default(self, o):
        if isinstance(o, Fraction):
            return format_fraction(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return round_float(float(o))
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)


def prepare(value: Any, exact: bool = True) -> Any:
    """Round floats, and turn fractions into floats unless ``exact``."""
    if isinstance(value, dict):
        return {str(k): prepare(v, exact) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [prepare(v, exact) for v in value]
    if isinstance(value, np.ndarray):
        return [prepare(v, exact) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Fraction):
        return value if exact else round_float(float(value))
    if isinstance(value, (float, np.floating)):
        return round_float(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def format_cell(value: Any, exact: bool = True) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        if exact:
            return format_fraction(value)
        value = float(value)
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{settings.KSBOX_FLOAT_DIGITS}g}"
    return str(value)


@dataclass
class Report:
    """What a command produced: a JSON payload and, optionally, CSV rows."""

    payload: Dict[str, Any]
    columns: Sequence[str] = ()
    rows: List[Sequence[Any]] = field(default_factory=list)
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def render_json(report: Report, config: RunConfig) -> str:
    payload = dict(prepare(report.payload, config.exact))
    payload["meta"] = config.meta()
    return json.dumps(payload, cls=ReportEncoder, sort_keys=True, indent=2)


def render_csv(report: Report, config: RunConfig) -> str:
    """Tabular rows, or key,value pairs for payload-only reports.

    The seed is always present: as a trailing ``seed`` column, or as a
    final ``seed`` row in key,value form.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    columns: Sequence[str] = tuple(report.columns)
    rows: List[Sequence[Any]] = [tuple(row) for row in report.rows]
    if not columns:
        columns = ("key", "value")
        rows = [
            (key, value)
            for key, value in sorted(report.payload.items())
            if not isinstance(value, (dict, list, tuple))
        ]
        if "seed" not in report.payload:
            rows.append(("seed", config.seed))
    elif "seed" not in columns:
        columns = (*columns, "seed")
        rows = [(*row, config.seed) for row in rows]
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(value, config.exact) for value in row])
    return buffer.getvalue().rstrip("\n")


def render(report: Report, config: RunConfig) -> str:
    if config.output_format == "csv":
        return render_csv(report, config)
    return render_json(report, config)
