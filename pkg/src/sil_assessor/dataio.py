"""CSV ingestion with line-numbered error messages.

Two interchange formats, both with a mandatory header row:
``value,label`` for scalar samples and ``x1,x2,label`` for planar points.
Labels are the literals ``left``/``right``, case-insensitive.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .ann import PointSet2D
from .classifier import Label, LabeledSample


class DataFormatError(ValueError):
    """Malformed input data; the message names the file and line."""


def _parse_label(token: str, path: str, line: int) -> Label:
    name = token.strip().lower()
    if name == "left":
        return Label.LEFT
    if name == "right":
        return Label.RIGHT
    raise DataFormatError(f"{path}:{line}: label must be 'left' or 'right', "
                          f"got {token!r}")


def _parse_value(token: str, path: str, line: int, column: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataFormatError(f"{path}:{line}: {column} is not a number: "
                              f"{token!r}") from None
    if not math.isfinite(value):
        raise DataFormatError(f"{path}:{line}: {column} must be finite, got {token!r}")
    return value


def _read_rows(path: str, header: tuple[str, ...]):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path!r}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    rows = [(i + 1, row) for i, row in enumerate(rows) if row]
    if not rows:
        raise DataFormatError(f"{path}: no samples (file is empty)")
    first_line, first = rows[0]
    got = tuple(cell.strip().lower() for cell in first)
    if got != header:
        raise DataFormatError(f"{path}:{first_line}: expected header "
                              f"{','.join(header)!r}, got {','.join(first)!r}")
    if len(rows) == 1:
        raise DataFormatError(f"{path}: no samples (header only)")
    for line, row in rows[1:]:
        if len(row) != len(header):
            raise DataFormatError(f"{path}:{line}: expected {len(header)} "
                                  f"fields, got {len(row)}")
        yield line, row


def read_samples_csv(path: str) -> tuple[LabeledSample, LabeledSample]:
    """Scalar teach-in data grouped into the (left, right) class samples."""
    values: dict[Label, list[float]] = {Label.LEFT: [], Label.RIGHT: []}
    for line, row in _read_rows(path, ("value", "label")):
        label = _parse_label(row[1], path, line)
        values[label].append(_parse_value(row[0], path, line, "value"))
    for label, got in values.items():
        if not got:
            raise DataFormatError(f"{path}: class {label.value!r} has no samples")
        if len(got) < 2:
            raise DataFormatError(f"{path}: class {label.value!r} has a single "
                                  "sample; need at least 2 to estimate spread")
    return (LabeledSample(values=tuple(values[Label.LEFT]), label=Label.LEFT),
            LabeledSample(values=tuple(values[Label.RIGHT]), label=Label.RIGHT))


def read_points_csv(path: str) -> PointSet2D:
    """Planar challenge data as a labeled point set."""
    points: list[tuple[float, float]] = []
    labels: list[Label] = []
    for line, row in _read_rows(path, ("x1", "x2", "label")):
        points.append((_parse_value(row[0], path, line, "x1"),
                       _parse_value(row[1], path, line, "x2")))
        labels.append(_parse_label(row[2], path, line))
    return PointSet2D(points=np.array(points), labels=tuple(labels))


def write_points_csv(path: str, data: PointSet2D):
    lines = ["x1,x2,label"]
    for (x1, x2), label in zip(data.points, data.labels):
        lines.append(f"{float(x1)!r},{float(x2)!r},{label.value}")
    Path(path).write_text("\n".join(lines) + "\n")
