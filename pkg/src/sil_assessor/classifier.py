"""Two-class Gaussian threshold classifier with confidence-bounded certification.

The pipeline: estimate per-class location/spread from teach-in samples,
pick a decision threshold, evaluate both misclassification probabilities,
then replace the point estimates by their least-favorable one-sided
confidence bounds and certify the dangerous error as the worst-case value
plus ``2*gamma`` (one gamma of miscoverage risk per one-sided bound used).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .statdist import normal_cdf, normal_quantile, chi2_quantile, t_quantile


class Label(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class ErrorKind(enum.Enum):
    """Which misclassification direction counts as the dangerous failure."""

    FIRST_KIND = "first_kind"    # true left classified right
    SECOND_KIND = "second_kind"  # true right classified left


class DegenerateSampleError(ValueError):
    """Teach-in sample has zero spread; every confidence bound would be vacuous."""


@dataclass(frozen=True)
class LabeledSample:
    values: tuple[float, ...]
    label: Label

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError(f"need at least 2 values per class, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("sample values must all be finite")


@dataclass(frozen=True)
class GaussianClassParams:
    """Location/spread of one sub-population.

    ``n`` is the teach-in sample size backing the estimate, or ``None`` when
    the parameters are known exactly (no estimation uncertainty).
    """

    m: float
    sigma: float
    n: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.sigma)):
            raise ValueError("class parameters must be finite")
        if self.sigma <= 0.0:
            raise DegenerateSampleError(f"sigma must be positive, got {self.sigma!r}")
        if self.n is not None and self.n < 2:
            raise ValueError(f"sample size backing an estimate must be >= 2, got {self.n}")

    @property
    def known(self) -> bool:
        return self.n is None


@dataclass(frozen=True)
class ErrorProbabilities:
    alpha: float           # first kind: true left classified right
    beta: float            # second kind: true right classified left
    correct_left: float
    correct_right: float


@dataclass(frozen=True)
class WorstCaseEnvelope:
    """Least-favorable parameter values at per-bound miscoverage ``gamma``.

    Spreads are inflated, the left mean is pushed up and the right mean
    pushed down: the one direction that enlarges both error probabilities
    for a threshold between the class means.
    """

    sigma_left_up: float
    sigma_right_up: float
    m_left_worst: float
    m_right_worst: float
    gamma: float


@dataclass(frozen=True)
class CertifiedError:
    """Worst-case error probabilities plus the miscoverage surcharge.

    ``gamma_terms`` counts the one-sided confidence bounds entering the
    dangerous direction (2 for an estimated class, 0 for known parameters);
    ``certified_dangerous`` is the worst-case dangerous error plus
    ``gamma_terms * gamma``, capped at 1.
    """

    alpha_worst: float
    beta_worst: float
    certified_dangerous: float
    gamma: float
    gamma_terms: int
    dangerous: ErrorKind


def fit_class(sample: LabeledSample) -> GaussianClassParams:
    """Point estimates: arithmetic mean and (n-1)-normalized standard deviation."""
    n = len(sample.values)
    m = math.fsum(sample.values) / n
    ss = math.fsum((v - m) ** 2 for v in sample.values)
    sigma = math.sqrt(ss / (n - 1))
    if sigma == 0.0:
        raise DegenerateSampleError(
            f"all {n} teach-in values for {sample.label.value!r} are identical; "
            "zero spread cannot be certified"
        )
    return GaussianClassParams(m=m, sigma=sigma, n=n)


def classify(x: float, z: float) -> Label:
    """LEFT iff x <= z, RIGHT otherwise (ties go left)."""
    if not math.isfinite(x):
        raise ValueError(f"cannot classify non-finite value {x!r}")
    return Label.LEFT if x <= z else Label.RIGHT


def error_probabilities(left: GaussianClassParams, right: GaussianClassParams,
                        z: float) -> ErrorProbabilities:
    """Both error kinds and their complements for threshold ``z``."""
    if not math.isfinite(z):
        raise ValueError(f"threshold must be finite, got {z!r}")
    correct_left = normal_cdf((z - left.m) / left.sigma)
    correct_right = 1.0 - normal_cdf((z - right.m) / right.sigma)
    return ErrorProbabilities(
        alpha=1.0 - correct_left,
        beta=1.0 - correct_right,
        correct_left=correct_left,
        correct_right=correct_right,
    )


def _require_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (0.0 < gamma < 0.5):
        raise ValueError(f"per-bound miscoverage gamma must lie in (0, 0.5), got {gamma!r}")
    return gamma


def _sigma_upper(est: GaussianClassParams, gamma: float) -> float:
    # lower-tail chi-squared quantile, so the bound exceeds the point estimate
    # with one-sided confidence 1 - gamma
    nu = est.n - 1
    return est.sigma * math.sqrt(nu / chi2_quantile(gamma, nu))


def _mean_shift(est: GaussianClassParams, gamma: float) -> float:
    return t_quantile(1.0 - gamma, est.n - 1) * est.sigma / math.sqrt(est.n)


def worst_case_envelope(left_est: GaussianClassParams, right_est: GaussianClassParams,
                        gamma: float) -> WorstCaseEnvelope:
    """One-sided confidence bounds in the directions that worsen both errors."""
    gamma = _require_gamma(gamma)
    for side, est in (("left", left_est), ("right", right_est)):
        if est.known:
            raise ValueError(
                f"{side} class has known parameters (no sample size); "
                "an envelope needs estimation uncertainty to bound"
            )
    return WorstCaseEnvelope(
        sigma_left_up=_sigma_upper(left_est, gamma),
        sigma_right_up=_sigma_upper(right_est, gamma),
        m_left_worst=left_est.m + _mean_shift(left_est, gamma),
        m_right_worst=right_est.m - _mean_shift(right_est, gamma),
        gamma=gamma,
    )


def certify(left_est: GaussianClassParams, right_est: GaussianClassParams, z: float,
            gamma: float, dangerous: ErrorKind = ErrorKind.FIRST_KIND) -> CertifiedError:
    """Worst-case error probabilities at the envelope, plus the gamma surcharge.

    Known-parameter classes bypass their bounds: their errors are exact and
    contribute no miscoverage terms.
    """
    gamma = _require_gamma(gamma)
    if left_est.known:
        left_worst = left_est
    else:
        left_worst = GaussianClassParams(
            m=left_est.m + _mean_shift(left_est, gamma),
            sigma=_sigma_upper(left_est, gamma),
        )
    if right_est.known:
        right_worst = right_est
    else:
        right_worst = GaussianClassParams(
            m=right_est.m - _mean_shift(right_est, gamma),
            sigma=_sigma_upper(right_est, gamma),
        )
    worst = error_probabilities(left_worst, right_worst, z)
    if dangerous is ErrorKind.FIRST_KIND:
        dangerous_worst = worst.alpha
        gamma_terms = 0 if left_est.known else 2
    else:
        dangerous_worst = worst.beta
        gamma_terms = 0 if right_est.known else 2
    return CertifiedError(
        alpha_worst=worst.alpha,
        beta_worst=worst.beta,
        certified_dangerous=min(1.0, dangerous_worst + gamma_terms * gamma),
        gamma=gamma,
        gamma_terms=gamma_terms,
        dangerous=dangerous,
    )


@dataclass(frozen=True)
class ThresholdPolicy:
    """How the decision threshold is chosen.

    ``fixed``: use ``z`` as given.  ``equal_error``: solve alpha = beta
    (unique for ordered classes).  ``alpha_target``: place z so the
    first-kind error of the left class equals ``alpha``.
    """

    kind: str
    z: float | None = None
    alpha: float | None = None

    _KINDS = ("fixed", "equal_error", "alpha_target")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown threshold policy {self.kind!r}; expected one of {self._KINDS}")
        if self.kind == "fixed" and (self.z is None or not math.isfinite(self.z)):
            raise ValueError("fixed policy needs a finite z")
        if self.kind == "alpha_target" and (
                self.alpha is None or not 0.0 < self.alpha < 1.0):
            raise ValueError("alpha_target policy needs a target in (0, 1)")

    @classmethod
    def fixed(cls, z: float) -> "ThresholdPolicy":
        return cls(kind="fixed", z=float(z))

    @classmethod
    def equal_error(cls) -> "ThresholdPolicy":
        return cls(kind="equal_error")

    @classmethod
    def alpha_target(cls, alpha: float) -> "ThresholdPolicy":
        return cls(kind="alpha_target", alpha=float(alpha))


def select_threshold(left: GaussianClassParams, right: GaussianClassParams,
                     policy: ThresholdPolicy) -> float:
    """Pick the decision threshold under ``policy``."""
    if policy.kind == "fixed":
        return policy.z
    if left.m >= right.m:
        raise ValueError(
            f"threshold solving needs ordered classes (m_left < m_right), "
            f"got {left.m!r} >= {right.m!r}"
        )
    if policy.kind == "alpha_target":
        return left.m + left.sigma * normal_quantile(1.0 - policy.alpha)
    # equal_error: alpha - beta is strictly decreasing in z and changes sign
    # on [m_left, m_right]
    lo, hi = left.m, right.m
    for _ in range(200):
        z = 0.5 * (lo + hi)
        probs = error_probabilities(left, right, z)
        diff = probs.alpha - probs.beta
        if abs(diff) <= 1e-14:
            return z
        if diff > 0.0:
            lo = z
        else:
            hi = z
        if hi - lo <= abs(z) * 4e-16 + 5e-324:
            break
    return 0.5 * (lo + hi)


def split_samples(samples: Sequence[LabeledSample]) -> tuple[LabeledSample, LabeledSample]:
    """Return the (left, right) samples from a two-element collection."""
    by_label = {s.label: s for s in samples}
    if set(by_label) != {Label.LEFT, Label.RIGHT}:
        missing = {Label.LEFT, Label.RIGHT} - set(by_label)
        raise ValueError(f"missing class(es): {sorted(l.value for l in missing)}")
    return by_label[Label.LEFT], by_label[Label.RIGHT]
