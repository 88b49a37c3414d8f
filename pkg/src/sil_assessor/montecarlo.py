"""Empirical oracle for the certification pipeline.

Replays teach-in -> threshold -> certify against a known ground truth many
times and counts how often the certified worst-case first-kind error fails
to cover the true one.  Without contamination that violation rate must stay
below ``2*gamma`` (one miscoverage risk per one-sided bound).

Contamination models the unseen-regime problem: the *operational* left-class
distribution is a two-component normal mixture whose shifted component never
appears in the teach-in data.  The certificate is then computed from samples
of a world that no longer exists, and the violation rate shows it.

Draws use the inverse-CDF transform of uniforms from a counter-based PRNG;
every replicate gets an independent child seed derived from (seed, index),
so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifier import (
    ErrorKind,
    GaussianClassParams,
    ThresholdPolicy,
    certify,
    error_probabilities,
    select_threshold,
)

# Acklam's rational approximation to the standard normal quantile
# (|relative error| < 1.2e-9 over (0, 1)); plenty for variate generation.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def _norm_inv(u: np.ndarray) -> np.ndarray:
    """Vectorized standard normal quantile of uniforms in (0, 1)."""
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    out = np.empty_like(u)
    lo = u < 0.02425
    hi = u > 1.0 - 0.02425
    mid = ~(lo | hi)

    if np.any(mid):
        q = u[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        out[mid] = num * q / den
    for mask, sign in ((lo, 1.0), (hi, -1.0)):
        if np.any(mask):
            p = u[mask] if sign > 0 else 1.0 - u[mask]
            q = np.sqrt(-2.0 * np.log(p))
            num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
            den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
            out[mask] = sign * num / den
    return out


def _child_rngs(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _normal_draws(rng: np.random.Generator, m: float, sigma: float, n: int) -> np.ndarray:
    return m + sigma * _norm_inv(rng.random(n))


@dataclass(frozen=True)
class Contamination:
    """Operational mixture component absent from the teach-in data."""

    fraction: float
    shift: float

    def __post_init__(self):
        if not (0.0 <= self.fraction < 1.0):
            raise ValueError(f"contamination fraction must be in [0, 1), got {self.fraction!r}")
        if not math.isfinite(self.shift):
            raise ValueError("contamination shift must be finite")


@dataclass(frozen=True)
class SimulationConfig:
    true_left: GaussianClassParams
    true_right: GaussianClassParams
    n_left: int
    n_right: int
    gamma: float
    z_policy: ThresholdPolicy
    replications: int
    seed: int
    contamination: Contamination | None = None
    empirical_draws: int = 0  # per-replicate operational draws; 0 disables

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if min(self.n_left, self.n_right) < 2:
            raise ValueError("teach-in sizes must be >= 2")
        if not (0.0 < self.gamma < 0.5):
            raise ValueError(f"gamma must lie in (0, 0.5), got {self.gamma!r}")
        if self.empirical_draws < 0:
            raise ValueError("empirical_draws must be >= 0")


@dataclass(frozen=True)
class ReplicateRecord:
    index: int
    m_left: float | None
    sigma_left: float | None
    m_right: float | None
    sigma_right: float | None
    z: float | None
    alpha_certified: float | None  # worst-case alpha before the gamma surcharge
    true_alpha: float | None
    empirical_alpha: float | None
    violation: bool
    skipped: str | None  # reason, e.g. "zero-variance draw"


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    violation_count: int
    skipped_count: int
    mean_certified: float
    empirical_alpha_error: float | None  # max |empirical - analytic| over replicates
    replicates: tuple[ReplicateRecord, ...] = field(repr=False)

    @property
    def evaluated(self) -> int:
        return self.config.replications - self.skipped_count

    @property
    def violation_rate(self) -> float:
        return self.violation_count / self.evaluated if self.evaluated else math.nan


def true_alpha(config: SimulationConfig, z: float) -> float:
    """Operational first-kind error at threshold ``z``, mixture included."""
    base = error_probabilities(config.true_left, config.true_right, z).alpha
    if config.contamination is None or config.contamination.fraction == 0.0:
        return base
    shifted = GaussianClassParams(
        m=config.true_left.m + config.contamination.shift,
        sigma=config.true_left.sigma,
    )
    tail = error_probabilities(shifted, config.true_right, z).alpha
    f = config.contamination.fraction
    return (1.0 - f) * base + f * tail


def _fit(values: np.ndarray) -> GaussianClassParams | None:
    n = values.size
    m = float(values.mean())
    var = float(((values - m) ** 2).sum()) / (n - 1)
    if var <= 0.0:
        return None
    return GaussianClassParams(m=m, sigma=math.sqrt(var), n=n)


def run(config: SimulationConfig) -> SimulationResult:
    """Replay the lifecycle ``config.replications`` times and tally coverage.

    Replicates that cannot be certified (zero-variance draws, unordered
    fitted means under a solving threshold policy) are recorded and counted
    as skipped, never resampled: resampling would bias the coverage tally.
    """
    rngs = _child_rngs(config.seed, config.replications)
    records: list[ReplicateRecord] = []
    violations = 0
    skipped = 0
    certified_sum = 0.0
    worst_emp_gap: float | None = None

    for i, rng in enumerate(rngs):
        left_draws = _normal_draws(rng, config.true_left.m, config.true_left.sigma,
                                   config.n_left)
        right_draws = _normal_draws(rng, config.true_right.m, config.true_right.sigma,
                                    config.n_right)
        left_fit = _fit(left_draws)
        right_fit = _fit(right_draws)
        if left_fit is None or right_fit is None:
            skipped += 1
            records.append(ReplicateRecord(i, None, None, None, None, None, None,
                                           None, None, False, "zero-variance draw"))
            continue
        try:
            z = select_threshold(left_fit, right_fit, config.z_policy)
        except ValueError:
            skipped += 1
            records.append(ReplicateRecord(
                i, left_fit.m, left_fit.sigma, right_fit.m, right_fit.sigma,
                None, None, None, None, False, "unordered fitted means"))
            continue
        cert = certify(left_fit, right_fit, z, config.gamma, ErrorKind.FIRST_KIND)
        truth = true_alpha(config, z)
        emp: float | None = None
        if config.empirical_draws > 0:
            emp = _empirical_alpha(rng, config, z, config.empirical_draws)
            gap = abs(emp - truth)
            worst_emp_gap = gap if worst_emp_gap is None else max(worst_emp_gap, gap)
        violated = truth > cert.alpha_worst
        violations += violated
        certified_sum += cert.alpha_worst
        records.append(ReplicateRecord(
            i, left_fit.m, left_fit.sigma, right_fit.m, right_fit.sigma,
            z, cert.alpha_worst, truth, emp, violated, None))

    evaluated = config.replications - skipped
    return SimulationResult(
        config=config,
        violation_count=violations,
        skipped_count=skipped,
        mean_certified=certified_sum / evaluated if evaluated else math.nan,
        empirical_alpha_error=worst_emp_gap,
        replicates=tuple(records),
    )


def _empirical_alpha(rng: np.random.Generator, config: SimulationConfig,
                     z: float, draws: int) -> float:
    """Frequency estimate of the operational first-kind error."""
    x = _normal_draws(rng, config.true_left.m, config.true_left.sigma, draws)
    if config.contamination is not None and config.contamination.fraction > 0.0:
        hit = rng.random(draws) < config.contamination.fraction
        x = x + np.where(hit, config.contamination.shift, 0.0)
    return float(np.count_nonzero(x > z)) / draws


def empirical_error(true_left: GaussianClassParams, true_right: GaussianClassParams,
                    z: float, draws: int, seed: int) -> tuple[float, float]:
    """Frequency estimates (alpha_hat, beta_hat) from simulated classification."""
    if draws < 1:
        raise ValueError("need at least one draw")
    left_rng, right_rng = _child_rngs(seed, 2)
    left = _normal_draws(left_rng, true_left.m, true_left.sigma, draws)
    right = _normal_draws(right_rng, true_right.m, true_right.sigma, draws)
    alpha_hat = float(np.count_nonzero(left > z)) / draws
    beta_hat = float(np.count_nonzero(right <= z)) / draws
    return alpha_hat, beta_hat


def coverage_criterion(result: SimulationResult) -> tuple[bool, float]:
    """Did certification cover the truth often enough?

    Returns (met, limit) where the limit is 2*gamma plus three binomial
    standard deviations of the violation rate.  A contaminated run is
    expected to fail this check: that failure is the point.
    """
    g2 = 2.0 * result.config.gamma
    n = result.config.replications
    limit = g2 + 3.0 * math.sqrt(g2 * (1.0 - g2) / n)
    return result.violation_rate <= limit, limit


def replicate_rows(result: SimulationResult) -> list[dict]:
    """Per-replicate records as plain dicts for CSV serialization."""
    rows = []
    for r in result.replicates:
        rows.append({
            "index": r.index,
            "m_left": r.m_left, "sigma_left": r.sigma_left,
            "m_right": r.m_right, "sigma_right": r.sigma_right,
            "z": r.z,
            "alpha_certified": r.alpha_certified,
            "true_alpha": r.true_alpha,
            "empirical_alpha": r.empirical_alpha,
            "violation": int(r.violation),
            "skipped": r.skipped or "",
        })
    return rows
