"""
conditions.py

Moment conditions on even-moment sequences h[k] = h_{2k}: the weak and strong ratio
conditions, the h_4 bound, the logarithmic inequality of the Bessel argument and the
Cauchy lower bound. Every check reports signed margins (positive = satisfied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import pandas as pd

from weissler_lab.analytic import InequalityVerdict
from weissler_lab.bernoulli import AbstractSequence, series_S
from weissler_lab.config import DEFAULT_REPORT_TOLERANCE, DEFAULT_SERIES_TOLERANCE, get_logger
from weissler_lab.weights import MomentSequence

logger = get_logger()


class ConditionName(str, Enum):
    WEAK = 'WeakCondition'
    STRONG = 'StrongCondition'
    LEMMA2 = 'Lemma2Inequality'
    H4_BOUND = 'H4Bound'
    CAUCHY_LOWER = 'CauchyLower'


@dataclass(frozen=True)
class ConditionReport:
    condition_name: ConditionName
    indices: tuple[int, ...]
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    margins: tuple[float, ...]
    first_violation: int | None
    holds_up_to: int
    tol_report: float = DEFAULT_REPORT_TOLERANCE
    label: str = ''

    @classmethod
    def from_sides(
            cls,
            name: ConditionName,
            indices,
            lhs,
            rhs,
            tol_report: float,
            label: str = ''
        ) -> ConditionReport:
        """Build a report from the two sides of ``lhs(m) ≥ rhs(m)`` at each index."""
        if tol_report < 0:
            raise ValueError(f"tol_report must be nonnegative, got {tol_report}")
        indices, lhs, rhs = tuple(indices), tuple(lhs), tuple(rhs)
        margins = tuple(a - b for a, b in zip(lhs, rhs))
        first = next((m for m, margin in zip(indices, margins) if margin < -tol_report), None)
        if first is not None:
            logger.debug(f"{name.value} violated for {label} at index {first}")
        return cls(
            condition_name=name,
            indices=indices,
            lhs=lhs,
            rhs=rhs,
            margins=margins,
            first_violation=first,
            holds_up_to=indices[-1] if indices else 0,
            tol_report=tol_report,
            label=label,
        )

    @property
    def holds(self) -> bool:
        return self.first_violation is None

    @property
    def min_margin(self) -> float:
        return min(self.margins) if self.margins else math.inf

    def to_dict(self) -> dict:
        return {
            'condition': self.condition_name.value,
            'margins': list(self.margins),
            'first_violation': self.first_violation,
            'holds_up_to': self.holds_up_to,
        }

    def to_frame(self) -> pd.DataFrame:
        """Sweep schema: name, index, lhs, rhs, gap, bound (gap is the signed margin)."""
        return pd.DataFrame({
            'name': f"{self.condition_name.value}:{self.label}",
            'index': list(self.indices),
            'lhs': list(self.lhs),
            'rhs': list(self.rhs),
            'gap': list(self.margins),
            'bound': self.tol_report,
        }, columns=['name', 'index', 'lhs', 'rhs', 'gap', 'bound'])


class PairwiseMargin(NamedTuple):
    margin: float
    p: int
    q: int
    side: str


def _require_length(values, n: int, what: str):
    if len(values) - 1 < n:
        raise ValueError(f"{what} needs the sequence up to index {n}, got max index {len(values) - 1}")


def _require_nonzero(values, upto: int, what: str):
    zero = next((k for k in range(upto + 1) if values[k] == 0), None)
    if zero is not None:
        raise ValueError(f"{what} divides by h[{zero}] = 0")


def _ratio_sides(values, strong: bool):
    n_max = len(values) - 1
    indices = range(1, n_max)
    lhs, rhs = [], []
    for m in indices:
        lhs.append(values[m] / values[m - 1])
        right = m / (m + 1) * values[m + 1] / values[m]
        if strong:
            right += values[m + 1] / ((m + 1) * values[m - 1])
        rhs.append(right)
    return indices, lhs, rhs


def check_weak_condition(h: MomentSequence, tol_report: float = DEFAULT_REPORT_TOLERANCE) -> ConditionReport:
    """h_{2m}/h_{2(m−1)} ≥ (m/(m+1))·h_{2(m+1)}/h_{2m} for 1 ≤ m ≤ N−1."""
    _require_length(h.values, 2, 'check_weak_condition')
    _require_nonzero(h.values, h.max_index - 1, 'check_weak_condition')
    indices, lhs, rhs = _ratio_sides(h.values, strong=False)
    return ConditionReport.from_sides(ConditionName.WEAK, indices, lhs, rhs, tol_report, h.label)


def check_strong_condition(h: MomentSequence, tol_report: float = DEFAULT_REPORT_TOLERANCE) -> ConditionReport:
    """h_{2m}/h_{2(m−1)} ≥ h_{2(m+1)}/((m+1)h_{2(m−1)}) + (m/(m+1))·h_{2(m+1)}/h_{2m}.

    Classical weights give equality at every m.
    """
    _require_length(h.values, 2, 'check_strong_condition')
    _require_nonzero(h.values, h.max_index - 1, 'check_strong_condition')
    indices, lhs, rhs = _ratio_sides(h.values, strong=True)
    return ConditionReport.from_sides(ConditionName.STRONG, indices, lhs, rhs, tol_report, h.label)


def check_simplified_condition(g: AbstractSequence, tol_report: float = DEFAULT_REPORT_TOLERANCE) -> ConditionReport:
    """The weak ratio condition stated for an abstract sequence g."""
    _require_length(g.g, 2, 'check_simplified_condition')
    indices, lhs, rhs = _ratio_sides(g.g, strong=False)
    return ConditionReport.from_sides(ConditionName.WEAK, indices, lhs, rhs, tol_report, 'g')


def check_h4_bound(h: MomentSequence) -> InequalityVerdict:
    """h_4 ≤ 2h_2²/(h_2 + 1), the strong condition at m = 1 solved for h_4."""
    _require_length(h.values, 2, 'check_h4_bound')
    h2, h4 = h[1], h[2]
    return InequalityVerdict.from_sides(h4, 2 * h2 * h2 / (h2 + 1), h.max_error)


def check_lemma2_inequality(
        h: MomentSequence,
        series_tol: float = DEFAULT_SERIES_TOLERANCE,
        tol_report: float = DEFAULT_REPORT_TOLERANCE
    ) -> ConditionReport:
    """h_{2n}·ln S(1) ≥ h_{2(n+1)}/(n+1) for 1 ≤ n ≤ N−1, with S(1) = Σ h_{2k}/(k!)².

    :raises SeriesTruncationError: when S(1) cannot be certified with the moments available.
    """
    _require_length(h.values, 2, 'check_lemma2_inequality')
    log_s1 = math.log(series_S(1.0, h, series_tol).value)
    indices = range(1, h.max_index)
    lhs = [h[n] * log_s1 for n in indices]
    rhs = [h[n + 1] / (n + 1) for n in indices]
    return ConditionReport.from_sides(ConditionName.LEMMA2, indices, lhs, rhs, tol_report, h.label)


def check_cauchy_lower(h: MomentSequence, tol_report: float = DEFAULT_REPORT_TOLERANCE) -> ConditionReport:
    """h_{2(k−1)}·h_{2(k+1)} ≥ h_{2k}² for 1 ≤ k ≤ N−1."""
    _require_length(h.values, 2, 'check_cauchy_lower')
    indices = range(1, h.max_index)
    lhs = [h[k - 1] * h[k + 1] for k in indices]
    rhs = [h[k] ** 2 for k in indices]
    return ConditionReport.from_sides(ConditionName.CAUCHY_LOWER, indices, lhs, rhs, tol_report, h.label)


def check_pairwise_bounds(g: AbstractSequence) -> PairwiseMargin:
    """Smallest margin of (p/(q+1))·g_{p−1}g_{q+1} ≤ g_p g_q ≤ (q/(p+1))·g_{p+1}g_{q−1}.

    Both bounds follow from the weak condition by chaining consecutive ratios; they are
    checked for every 1 ≤ p < q ≤ N−1.
    """
    N = g.max_index
    if N < 3:
        raise ValueError(f"check_pairwise_bounds needs the sequence up to index 3, got {N}")
    worst = PairwiseMargin(math.inf, 0, 0, '')
    for p in range(1, N - 1):
        for q in range(p + 1, N):
            product = g[p] * g[q]
            lower = product - p / (q + 1) * g[p - 1] * g[q + 1]
            upper = q / (p + 1) * g[p + 1] * g[q - 1] - product
            if lower < worst.margin:
                worst = PairwiseMargin(lower, p, q, 'lower')
            if upper < worst.margin:
                worst = PairwiseMargin(upper, p, q, 'upper')
    return worst


CONDITION_CHECKS = {
    'weak': lambda h, tol_report, series_tol: check_weak_condition(h, tol_report),
    'strong': lambda h, tol_report, series_tol: check_strong_condition(h, tol_report),
    'lemma2': lambda h, tol_report, series_tol: check_lemma2_inequality(h, series_tol, tol_report),
    'cauchy': lambda h, tol_report, series_tol: check_cauchy_lower(h, tol_report),
}


def check_condition(
        name: str,
        h: MomentSequence,
        tol_report: float = DEFAULT_REPORT_TOLERANCE,
        series_tol: float = DEFAULT_SERIES_TOLERANCE
    ) -> ConditionReport:
    """Run a condition check by its command-line name; ``series_tol`` only affects lemma2."""
    try:
        check = CONDITION_CHECKS[name]
    except KeyError:
        raise ValueError(f"unknown condition {name!r}; expected one of {sorted(CONDITION_CHECKS)}") from None
    return check(h, tol_report, series_tol)
