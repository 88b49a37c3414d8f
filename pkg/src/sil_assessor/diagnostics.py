"""Regression diagnostics: the model-validity failure modes a single summary
statistic hides.

Four datasets can share slope, intercept, and R-squared while only one of
them is actually a line plus noise; the others hide curvature, an outlier,
or a single point dictating the whole fit.  This module fits ordinary least
squares and flags the latter two failure modes per point: outliers by
externally studentized residual (the residual scaled by a fit that excludes
the point itself, so one bad point cannot mask itself by inflating the
variance estimate), leverage by hat value against twice the average.

The canonical four-set fixture ships as packaged data with a provenance
note; its values are never fabricated in code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

_P = 2  # fitted parameters: slope and intercept
_EPS = 1e-12


@dataclass(frozen=True)
class XYDataset:
    pairs: tuple[tuple[float, float], ...]
    name: str = ""

    def __post_init__(self):
        pairs = tuple((float(x), float(y)) for x, y in self.pairs)
        if len(pairs) < 3:
            raise ValueError(f"need at least 3 points, got {len(pairs)}")
        for x, y in pairs:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite pair ({x!r}, {y!r})")
        xs = [x for x, _ in pairs]
        if max(xs) - min(xs) == 0.0:
            raise ValueError("all x values identical; no line is determined")
        object.__setattr__(self, "pairs", pairs)

    @property
    def x(self) -> tuple[float, ...]:
        return tuple(x for x, _ in self.pairs)

    @property
    def y(self) -> tuple[float, ...]:
        return tuple(y for _, y in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class PointFlags:
    outlier: bool
    leverage: bool


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    residuals: tuple[float, ...]
    flags: tuple[PointFlags, ...]

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0):
            raise ValueError(f"r_squared must lie in [0, 1], got {self.r_squared!r}")


def _ols(data: XYDataset) -> tuple[float, float, tuple[float, ...], float, float]:
    """Slope, intercept, residuals, SSE, SST by the normal equations."""
    n = len(data)
    xbar = math.fsum(data.x) / n
    ybar = math.fsum(data.y) / n
    sxx = math.fsum((x - xbar) ** 2 for x in data.x)
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in data.pairs)
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    residuals = tuple(y - (intercept + slope * x) for x, y in data.pairs)
    sse = math.fsum(r * r for r in residuals)
    sst = math.fsum((y - ybar) ** 2 for y in data.y)
    return slope, intercept, residuals, sse, sst


def hat_values(data: XYDataset) -> tuple[float, ...]:
    """Diagonal of the projection matrix: 1/n + (x - xbar)^2 / Sxx."""
    n = len(data)
    xbar = math.fsum(data.x) / n
    sxx = math.fsum((x - xbar) ** 2 for x in data.x)
    return tuple(1.0 / n + (x - xbar) ** 2 / sxx for x in data.x)


def studentized_residuals(data: XYDataset) -> tuple[float, ...]:
    """Externally studentized residuals.

    Each residual is scaled by the error variance of the fit with that
    point deleted, t_i = e_i * sqrt((n - 3) / (SSE (1 - h_i) - e_i^2)).
    A point with hat value 1 is reproduced exactly by its own fit and
    carries no outlier information; its studentized residual is 0 by
    convention, as is every residual of an exact-line dataset.
    """
    n = len(data)
    if n <= _P + 1:
        raise ValueError(f"studentization needs more than {_P + 1} points")
    _, _, residuals, sse, _ = _ols(data)
    hats = hat_values(data)
    out = []
    for e, h in zip(residuals, hats):
        if sse <= _EPS or 1.0 - h <= _EPS:
            out.append(0.0)
            continue
        denom = sse * (1.0 - h) - e * e
        if denom <= 0.0:
            # deleted fit is exact while this residual is not: infinitely
            # incompatible with the rest of the data
            out.append(math.copysign(math.inf, e))
            continue
        out.append(e * math.sqrt((n - _P - 1) / denom))
    return tuple(out)


def detect_anomalies(data: XYDataset, outlier_threshold: float = 3.0,
                     leverage_factor: float = 2.0) -> tuple[PointFlags, ...]:
    """Per-point flags: |studentized residual| and hat value against cutoffs.

    The leverage cutoff is ``leverage_factor`` times the average hat value
    p/n.  Both thresholds are conventional defaults and configurable.
    """
    if outlier_threshold <= 0.0 or leverage_factor <= 0.0:
        raise ValueError("thresholds must be positive")
    studentized = studentized_residuals(data)
    hats = hat_values(data)
    cutoff = leverage_factor * _P / len(data)
    return tuple(PointFlags(outlier=abs(t) > outlier_threshold,
                            leverage=h > cutoff)
                 for t, h in zip(studentized, hats))


def fit_line(data: XYDataset, outlier_threshold: float = 3.0,
             leverage_factor: float = 2.0) -> RegressionFit:
    """Ordinary least squares with goodness of fit and per-point flags."""
    slope, intercept, residuals, sse, sst = _ols(data)
    if sst <= _EPS:
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - sse / sst))
    flags = detect_anomalies(data, outlier_threshold, leverage_factor)
    return RegressionFit(slope=slope, intercept=intercept, r_squared=r_squared,
                         residuals=residuals, flags=flags)


def load_anscombe() -> dict[str, XYDataset]:
    """The bundled four-set fixture, keyed '1' through '4'."""
    text = resources.files("sil_assessor").joinpath("data/anscombe.json").read_text()
    doc = json.loads(text)
    out = {}
    for key, block in doc["sets"].items():
        pairs = tuple(zip(block["x"], block["y"]))
        out[key] = XYDataset(pairs=pairs, name=f"anscombe-{key}")
    return out
