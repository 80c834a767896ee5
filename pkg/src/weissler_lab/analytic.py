"""
analytic.py

Truncated power series on the unit disk, weighted Bergman norms through Parseval's
identity, and numerical checks of the even-exponent Weissler inequality

    ‖(f_r)^n‖²_{A²(w)} ≤ (‖f‖²_{A²(w)})^n,    0 < r ≤ 1/√n,

together with the zero-free formulation f = e^φ through the coefficients g[n][k].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import pandas as pd

from weissler_lab.config import DEFAULT_TOLERANCE, get_logger
from weissler_lab.weights import MomentSequence, RadialWeight, moment_sequence

logger = get_logger()

# ulps of max(|lhs|, |rhs|) allowed for floating-point accumulation
ROUNDING_ULPS = 64


@dataclass(frozen=True)
class PowerSeries:
    """Taylor coefficients a[0..=K] of f(z) = Σ a_k z^k."""

    coeffs: tuple[complex | float, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("PowerSeries needs at least one coefficient")
        if not all(np.isfinite(c) for c in self.coeffs):
            raise ValueError("PowerSeries coefficients must be finite")

    @classmethod
    def from_coeffs(cls, coeffs) -> PowerSeries:
        arr = np.asarray(coeffs)
        if np.iscomplexobj(arr) and not np.any(arr.imag):
            arr = arr.real
        dtype = complex if np.iscomplexobj(arr) else float
        return cls(tuple(dtype(c) for c in arr.ravel()))

    @classmethod
    def parse(cls, text: str) -> PowerSeries:
        """Parse ``'1,0.5,0.25'`` or ``'coeffs=1,0.5,0.25'``."""
        text = text.strip()
        if text.startswith('coeffs='):
            text = text[len('coeffs='):]
        try:
            values = [complex(part.strip().replace(' ', '')) for part in text.split(',')]
        except ValueError:
            raise ValueError(f"cannot parse coefficient list '{text}'") from None
        return cls.from_coeffs(values)

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs)

    def is_nonnegative_real(self) -> bool:
        arr = self.array
        return (not np.iscomplexobj(arr) or not np.any(arr.imag)) and bool(np.all(arr.real >= 0))


@dataclass(frozen=True)
class InequalityVerdict:
    lhs: float
    rhs: float
    gap: float
    holds: bool
    truncation_bound: float

    @classmethod
    def from_sides(cls, lhs: float, rhs: float, tail_bound: float = 0.0) -> InequalityVerdict:
        """Verdict on lhs ≤ rhs; the bound adds a rounding allowance to ``tail_bound``."""
        gap = rhs - lhs
        bound = tail_bound + ROUNDING_ULPS * np.finfo(float).eps * max(abs(lhs), abs(rhs))
        return cls(lhs=lhs, rhs=rhs, gap=gap, holds=bool(gap >= -bound), truncation_bound=bound)

    def to_dict(self) -> dict:
        return {
            'lhs': self.lhs,
            'rhs': self.rhs,
            'gap': self.gap,
            'holds': self.holds,
            'truncation_bound': self.truncation_bound,
        }


def _require_nonnegative(f: PowerSeries, what: str):
    if not f.is_nonnegative_real():
        raise ValueError(f"{what} requires nonnegative real coefficients")


def dilate(f: PowerSeries, r: float) -> PowerSeries:
    """f_r(z) = f(rz): coefficient k becomes a_k r^k."""
    if not 0 < r <= 1:
        raise ValueError(f"dilation radius must lie in (0, 1], got {r}")
    return PowerSeries.from_coeffs(f.array * r ** np.arange(f.truncation + 1))


def series_power(f: PowerSeries, n: int, K_out: int) -> PowerSeries:
    """Coefficients of f^n up to degree K_out by repeated discrete convolution."""
    if int(n) != n or n < 1:
        raise ValueError(f"power must be a positive integer, got {n}")
    if K_out < 0:
        raise ValueError(f"K_out must be nonnegative, got {K_out}")
    base = f.array[:K_out + 1]
    result = base.copy()
    for _ in range(int(n) - 1):
        result = np.convolve(result, base)[:K_out + 1]
    padded = np.zeros(K_out + 1, dtype=result.dtype)
    padded[:len(result)] = result
    return PowerSeries.from_coeffs(padded)


def naive_power_coeffs(f: PowerSeries, n: int, K_out: int) -> list:
    """Coefficients of f^n summed over every index tuple j_1+…+j_n = k.

    Exponential in n; used as an oracle for :func:`series_power`.
    """
    coeffs = list(f.coeffs)
    result = [0] * (K_out + 1)
    for js in product(range(len(coeffs)), repeat=n):
        k = sum(js)
        if k <= K_out:
            term = 1
            for j in js:
                term = term * coeffs[j]
            result[k] += term
    return result


def bergman_norm_sq(f: PowerSeries, h: MomentSequence, tail_bound: float = 0.0) -> tuple[float, float]:
    """‖f‖²_{A²(w)} = Σ |a_k|² h_{2k} (Parseval).

    :param f: Polynomial (or truncated series).
    :param h: Moment sequence with max_index ≥ f.truncation.
    :param tail_bound: Caller's estimate of the omitted tail; 0 for polynomials.
    :return: (norm squared, truncation bound).
    """
    if h.max_index < f.truncation:
        raise ValueError(f"need moments up to k={f.truncation}, have {h.max_index}")
    mod_sq = np.abs(f.array) ** 2
    return math.fsum(float(mod_sq[k]) * h[k] for k in range(f.truncation + 1)), tail_bound


def weissler_even_check(
        f: PowerSeries,
        w: RadialWeight | MomentSequence,
        n: int,
        r: float,
        tol: float = DEFAULT_TOLERANCE
    ) -> InequalityVerdict:
    """Check ‖(f_r)^n‖²_{A²(w)} ≤ (‖f‖²_{A²(w)})^n for a polynomial f.

    :param f: Polynomial with nonnegative real coefficients.
    :param w: Weight, or a precomputed moment sequence reaching index n·deg f.
    :param n: Integer exponent.
    :param r: Dilation radius in (0, 1].
    :param tol: Quadrature tolerance when moments must be computed.
    """
    _require_nonnegative(f, 'weissler_even_check')
    K = int(n) * f.truncation
    h = w if isinstance(w, MomentSequence) else moment_sequence(w, K, tol)
    power = series_power(dilate(f, r), n, K)
    lhs, _ = bergman_norm_sq(power, h)
    norm_sq, _ = bergman_norm_sq(f, h)
    rhs = norm_sq ** n
    # moment errors enter both sides linearly
    moment_err = h.max_error * (math.fsum(abs(c) ** 2 for c in power.coeffs) + n * norm_sq ** (n - 1) * math.fsum(
        abs(c) ** 2 for c in f.coeffs))
    return InequalityVerdict.from_sides(lhs, rhs, moment_err)


def sharpness_probe(w: RadialWeight, n: int, r: float, eps_grid, tol: float = DEFAULT_TOLERANCE) -> pd.DataFrame:
    """Evaluate the test functions f = 1 + εz against the leading-order prediction.

    The predicted gap rhs − lhs is (n − n²r²)·ε²·h_2.

    :return: DataFrame with columns eps, lhs, rhs, gap, predicted_gap, holds.
    """
    eps_grid = list(eps_grid)
    if not eps_grid:
        raise ValueError("eps_grid must not be empty")
    if any(not 0 < eps <= 0.2 for eps in eps_grid):
        raise ValueError("eps values must lie in (0, 0.2]")
    h = moment_sequence(w, n, tol)
    rows = []
    for eps in eps_grid:
        verdict = weissler_even_check(PowerSeries.from_coeffs([1.0, eps]), h, n, r, tol)
        rows.append({
            'eps': eps,
            'lhs': verdict.lhs,
            'rhs': verdict.rhs,
            'gap': verdict.gap,
            'predicted_gap': (n - n ** 2 * r ** 2) * eps ** 2 * h[1],
            'holds': verdict.holds,
        })
    return pd.DataFrame(rows)


def exp_composition_coeffs(phi: PowerSeries, N: int, Kmax: int) -> np.ndarray:
    """g[n][k] = coefficient of z^n in φ^k / k!, for 0 ≤ n ≤ N and 0 ≤ k ≤ Kmax.

    :param phi: Series with nonnegative real coefficients.
    :return: Array of shape (N+1, Kmax+1).
    """
    _require_nonnegative(phi, 'exp_composition_coeffs')
    if N < 0 or Kmax < 0:
        raise ValueError("N and Kmax must be nonnegative")
    a = phi.array.real[:N + 1]
    g = np.zeros((N + 1, Kmax + 1))
    power = np.zeros(N + 1)
    power[0] = 1.0
    g[:, 0] = power
    for k in range(1, Kmax + 1):
        power = np.convolve(power, a)[:N + 1]
        if len(power) < N + 1:
            power = np.pad(power, (0, N + 1 - len(power)))
        g[:, k] = power / math.factorial(k)
    return g


def _coefficient_tail(phi: PowerSeries, q: float, N: int) -> float:
    """Bound Σ_{n>N} q^{-n} c_n² for c_n the coefficients of e^{qφ}, φ(0) = 0.

    Nonnegative coefficients give c_n R^n ≤ e^{qφ(R)} for every R > 0, so the tail is at
    most M² t^{N+1}/(1−t) with M = e^{qφ(R)}, t = 1/(qR²); the best R on a grid is used.
    """
    a = phi.array.real
    best = math.inf
    for R in np.geomspace(1.05 / math.sqrt(q), 50.0, 200):
        t = 1 / (q * R * R)
        if t >= 1:
            continue
        log_bound = 2 * q * float(np.polyval(a[::-1], R)) + (N + 1) * math.log(t) - math.log1p(-t)
        if log_bound < 700:
            best = min(best, math.exp(log_bound))
    return best


def zero_free_weissler_check(
        phi: PowerSeries,
        h: MomentSequence,
        q: float,
        N: int,
        Kmax: int
    ) -> InequalityVerdict:
    """Check the zero-free inequality for f = e^φ at exponent q ≥ 1 and r = 1/√q.

    lhs = Σ_n q^{-n} (Σ_k q^k g[n][k])² h_{2n},   rhs = (Σ_n (Σ_k g[n][k])² h_{2n})^q.

    A constant term a_0 scales both sides by e^{2q a_0}; it is factored out so that the
    remaining g-matrix is finite (g[n][k] = 0 for k > n).
    """
    _require_nonnegative(phi, 'zero_free_weissler_check')
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if h.max_index < N:
        raise ValueError(f"need moments up to k={N}, have {h.max_index}")
    if Kmax < min(N, phi.truncation * N):
        raise ValueError(f"Kmax={Kmax} is too small: the k-sums need Kmax >= N={N} for exact coefficients")
    a0 = float(phi.array.real[0])
    shifted = PowerSeries.from_coeffs(np.concatenate([[0.0], phi.array.real[1:]]))
    g = exp_composition_coeffs(shifted, N, Kmax)
    q_powers = q ** np.arange(Kmax + 1)
    lhs = math.fsum(
        q ** (-n) * math.fsum(q_powers * g[n]) ** 2 * h[n] for n in range(N + 1)
    )
    base = math.fsum(math.fsum(g[n]) ** 2 * h[n] for n in range(N + 1))
    rhs = base ** q

    tail_lhs = _coefficient_tail(shifted, q, N)
    tail_base = _coefficient_tail(shifted, 1.0, N)
    tail_rhs = q * (base + tail_base) ** (q - 1) * tail_base
    scale = math.exp(2 * q * a0)
    logger.debug(f"zero-free check q={q}: tails lhs={tail_lhs:.3g} rhs={tail_rhs:.3g}")
    return InequalityVerdict.from_sides(scale * lhs, scale * rhs, scale * max(tail_lhs, tail_rhs))


def multinomial_identity(n: int, k: int) -> bool:
    """Exact check of Σ_{j_1+…+j_n=k} 1/(j_1!…j_n!) = n^k/k!.

    Both sides are multiplied by k!, which turns every term into an integer multinomial
    coefficient.
    """
    total = sum(math.factorial(k) // math.prod(math.factorial(j) for j in js) for js in _compositions(k, n))
    return total == n ** k


def _compositions(k: int, n: int):
    """All n-tuples of nonnegative integers summing to k."""
    if n == 1:
        yield (k,)
        return
    for first in range(k + 1):
        for rest in _compositions(k - first, n - 1):
            yield (first,) + rest


def moment_product_bound(h: MomentSequence, n_max: int, k_max: int) -> float:
    """Smallest h_{2j_1}…h_{2j_n} − (j_1!…j_n!/k!)·h_{2k} over compositions, n ≤ n_max, k ≤ k_max."""
    if k_max > h.max_index:
        raise ValueError(f"need moments up to k={k_max}, have {h.max_index}")
    slack = math.inf
    for n in range(1, n_max + 1):
        for k in range(k_max + 1):
            for js in _compositions(k, n):
                prod_h = math.prod(h[j] for j in js)
                coeff = math.prod(math.factorial(j) for j in js) / math.factorial(k)
                slack = min(slack, prod_h - coeff * h[k])
    return slack


def reciprocal_product_bound(h: MomentSequence, n: int, k: int) -> float:
    """Slack of n^k/h_{2k} − Σ_{j_1+…+j_n=k} 1/(h_{2j_1}…h_{2j_n})."""
    if k > h.max_index:
        raise ValueError(f"need moments up to k={k}, have {h.max_index}")
    total = math.fsum(1 / math.prod(h[j] for j in js) for js in _compositions(k, n))
    return n ** k / h[k] - total
