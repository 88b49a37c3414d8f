"""SIL failure-probability bookkeeping.

Only the two endpoint levels carry sourced numbers (SIL1 and SIL4, for both
the demand-failure threshold and the proven-in-use hours).  SIL2/SIL3 have
no invented defaults: they must be configured explicitly or they raise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping

from .classifier import CertifiedError


class SilLevel(enum.Enum):
    SIL1 = "SIL1"
    SIL2 = "SIL2"
    SIL3 = "SIL3"
    SIL4 = "SIL4"


class UnspecifiedThresholdError(LookupError):
    """The requested level has no sourced value and none was configured."""


_PFD_THRESHOLDS = {SilLevel.SIL1: 0.1, SilLevel.SIL4: 0.0001}
_PROVEN_IN_USE_HOURS = {SilLevel.SIL1: 3_000_000, SilLevel.SIL4: 300_000_000}

_SPLIT_TOL = 1e-12


@dataclass(frozen=True)
class SilBudget:
    level: SilLevel
    pfd_threshold: float
    hardware_share: float
    ai_share: float
    alpha_max: float
    gamma: float

    def __post_init__(self):
        if self.hardware_share + self.ai_share > self.pfd_threshold + _SPLIT_TOL:
            raise ValueError("hardware + AI shares exceed the PFD threshold")
        if abs(self.alpha_max + 2.0 * self.gamma - self.ai_share) > _SPLIT_TOL:
            raise ValueError(
                f"alpha_max + 2*gamma = {self.alpha_max + 2.0 * self.gamma!r} "
                f"does not equal the AI share {self.ai_share!r}"
            )


@dataclass(frozen=True)
class Verdict:
    passed: bool
    margin: float  # overshoot above the AI share; 0.0 when passing

    @property
    def exit_label(self) -> str:
        return "pass" if self.passed else "fail"


def pfd_threshold(level: SilLevel, overrides: Mapping[SilLevel, float] | None = None) -> float:
    """Demand-failure probability threshold for ``level``.

    SIL2/SIL3 come only from ``overrides``; without one they raise
    :class:`UnspecifiedThresholdError`.
    """
    if overrides and level in overrides:
        value = float(overrides[level])
        if not (0.0 < value < 1.0):
            raise ValueError(f"configured PFD threshold must be in (0, 1), got {value!r}")
        return value
    try:
        return _PFD_THRESHOLDS[level]
    except KeyError:
        raise UnspecifiedThresholdError(
            f"PFD threshold for {level.value} not specified by source; configure it explicitly"
        ) from None


def proven_in_use_hours(level: SilLevel) -> int:
    """Failure-free operating hours needed for a proven-in-use argument."""
    try:
        return _PROVEN_IN_USE_HOURS[level]
    except KeyError:
        raise UnspecifiedThresholdError(
            f"proven-in-use hours for {level.value} not specified by source"
        ) from None


def allocate(level: SilLevel, hardware_share: float,
             alpha_max: float | None = None, gamma: float | None = None,
             overrides: Mapping[SilLevel, float] | None = None) -> SilBudget:
    """Split the PFD budget between hardware and the AI algorithm.

    With ``alpha_max``/``gamma`` omitted, the AI share is split by the
    default rule alpha_max = ai_share/2, gamma = ai_share/4 (so that
    alpha_max + 2*gamma consumes the share exactly).  Passing both makes
    the split explicit; passing only one is rejected.
    """
    threshold = pfd_threshold(level, overrides)
    hardware_share = float(hardware_share)
    if not (0.0 <= hardware_share):
        raise ValueError(f"hardware share must be >= 0, got {hardware_share!r}")
    if hardware_share >= threshold:
        raise ValueError(
            f"hardware share {hardware_share!r} leaves no budget for the AI "
            f"(threshold {threshold!r})"
        )
    ai_share = threshold - hardware_share
    if (alpha_max is None) != (gamma is None):
        raise ValueError("explicit splits need both alpha_max and gamma")
    if alpha_max is None:
        alpha_max = ai_share / 2.0
        gamma = ai_share / 4.0
    return SilBudget(
        level=level,
        pfd_threshold=threshold,
        hardware_share=hardware_share,
        ai_share=ai_share,
        alpha_max=float(alpha_max),
        gamma=float(gamma),
    )


def verdict(budget: SilBudget, certified: CertifiedError) -> Verdict:
    """Pass iff the certified dangerous-failure probability fits the AI share.

    The boundary is inclusive.  The certification must have been run at the
    budget's gamma (checked), otherwise the surcharge arithmetic would not
    match the allocation.
    """
    if certified.gamma_terms > 0 and not math.isclose(
            budget.gamma, certified.gamma, rel_tol=1e-9, abs_tol=1e-15):
        raise ValueError(
            f"certification ran at gamma={certified.gamma!r} but the budget "
            f"allocates gamma={budget.gamma!r}"
        )
    overshoot = certified.certified_dangerous - budget.ai_share
    if overshoot <= 0.0:
        return Verdict(passed=True, margin=0.0)
    return Verdict(passed=False, margin=overshoot)
