"""
bernoulli.py

The Bernoulli-type inequality for moment sequences

    S(q) = Σ_n q^n h_{2n}/(n!)²  ≤  S(1)^q,    q ≥ 1,

the auxiliary functions used to establish it (φ and its derivatives, ψ, the
convolution sums T_n and the sequences s_k, t_k, the modified Bessel series and the
functions u_1, u_2, y, v), and the numerics of the counterexample weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import mpmath
import numpy as np
import pandas as pd

from weissler_lab.config import DEFAULT_SERIES_TOLERANCE, get_logger
from weissler_lab.errors import NumericalError, SeriesTruncationError
from weissler_lab.weights import MomentSequence, RadialWeight, moment_sequence

logger = get_logger()

MAX_TERMS = 400
BESSEL_DPS = 40
BISECTION_WIDTH = 1e-8
SCAN_POINTS = 200

# private context so that precision is never changed under another thread's feet
_mp = mpmath.MPContext()
_mp.dps = BESSEL_DPS


@dataclass(frozen=True)
class AbstractSequence:
    """A sequence g[0..=N] with g[0] = 1 and 0 < g[n] ≤ g[n−1]."""

    g: tuple[float, ...]

    def __post_init__(self):
        if not self.g or self.g[0] != 1.0:
            raise ValueError("AbstractSequence requires g[0] = 1")
        if any(not (math.isfinite(v) and v > 0) for v in self.g):
            raise ValueError("AbstractSequence entries must be finite and positive")
        if any(b > a for a, b in zip(self.g, self.g[1:])):
            raise ValueError("AbstractSequence must be nonincreasing")

    @classmethod
    def from_values(cls, values) -> AbstractSequence:
        return cls(tuple(float(v) for v in values))

    @classmethod
    def from_moments(cls, h: MomentSequence) -> AbstractSequence:
        return cls(tuple(h.values))

    @property
    def max_index(self) -> int:
        return len(self.g) - 1

    def __getitem__(self, n):
        return self.g[n]

    def require(self, n: int, what: str):
        if self.max_index < n:
            raise ValueError(f"{what} needs g up to index {n}, sequence ends at {self.max_index}")


class SeriesValue(NamedTuple):
    value: float
    tail_bound: float
    N_used: int


class PhiValues(NamedTuple):
    phi: float
    phi_prime: float
    phi_double_prime: float


class YVValues(NamedTuple):
    y_at_h4max: float
    v: float
    v_prime: float

    @property
    def consistent(self) -> bool:
        """Whether v′ ≤ 0 and y ≤ 0, as the argument requires."""
        return self.v_prime <= 0 and self.y_at_h4max <= 0


@dataclass(frozen=True)
class BernoulliReport:
    S1: float
    psi_at: dict[float, float]
    psi_prime_1: float
    N_used: int
    tail_bound: float
    positivity_end: float | None = None
    label: str = ''
    psi_bounds: dict[float, float] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        """Whether ψ(q) ≤ 0 at every requested q, up to its error bound."""
        return all(value <= self.psi_bounds.get(q, 0.0) for q, value in self.psi_at.items())

    def to_dict(self) -> dict:
        return {
            'S1': self.S1,
            'psi_prime_1': self.psi_prime_1,
            'psi': {f"{q:.6f}": value for q, value in sorted(self.psi_at.items())},
            'N_used': self.N_used,
            'tail_bound': self.tail_bound,
            'positivity_end': self.positivity_end,
        }


def _truncation_order(log_term: Callable[[int], float], tol: float) -> tuple[int, float]:
    """Smallest N whose tail Σ_{n>N} term(n) is certified ≤ tol by the ratio test.

    ``log_term`` is the log of a bound on the n-th term; the ratio of consecutive bounds
    must be nonincreasing from N+1 on, which holds for every series in this module.
    """
    for N in range(MAX_TERMS):
        l1, l2 = log_term(N + 1), log_term(N + 2)
        if l1 > 700:
            continue
        ratio = math.exp(l2 - l1)
        if ratio < 1:
            tail = math.exp(l1) / (1 - ratio)
            if tail <= tol:
                return N, tail
    raise NumericalError(f"series did not reach tolerance {tol} within {MAX_TERMS} terms")


def _moment_series(q: float, h: MomentSequence, tol: float, shift: int) -> tuple[list[float], float, int]:
    """Terms of Σ_n q^n h[n+shift]/(n!(n+shift)!) with the tail bound on h ≤ 1."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    if q == 0:
        N, tail = 0, 0.0
    else:
        log_q = math.log(q)
        N, tail = _truncation_order(
            lambda n: n * log_q - math.lgamma(n + 1) - math.lgamma(n + shift + 1), tol)
    if h.max_index < N + shift:
        raise SeriesTruncationError(f"series at q={q} needs more moments than {h.label or 'the sequence'} has",
                                    required_index=N + shift)
    coeff = 1 / math.factorial(shift)
    coeffs = [coeff]
    for n in range(1, N + 1):
        coeff *= q / (n * (n + shift))
        coeffs.append(coeff)
    terms = [c * h[n + shift] for n, c in enumerate(coeffs)]
    # quadrature moments carry their own error
    tail += h.max_error * math.fsum(coeffs)
    return terms, tail, N + shift


def series_S(q: float, h: MomentSequence, tol: float = DEFAULT_SERIES_TOLERANCE) -> SeriesValue:
    """S(q) = Σ_n q^n h_{2n}/(n!)², truncated once the tail bound is below ``tol``."""
    terms, tail, N = _moment_series(q, h, tol, 0)
    return SeriesValue(math.fsum(terms), tail, N)


def psi(q: float, h: MomentSequence, tol: float = DEFAULT_SERIES_TOLERANCE) -> SeriesValue:
    """ψ(q) = S(q) − S(1)^q; positive values falsify the Bernoulli-type inequality."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    s_q = series_S(q, h, tol)
    s_1 = series_S(1.0, h, tol)
    bound = s_q.tail_bound + q * (s_1.value + s_1.tail_bound) ** (q - 1) * s_1.tail_bound
    return SeriesValue(s_q.value - s_1.value ** q, bound, max(s_q.N_used, s_1.N_used))


def psi_prime(q: float, h: MomentSequence, tol: float = DEFAULT_SERIES_TOLERANCE) -> SeriesValue:
    """ψ′(q) = Σ n q^{n−1} h_{2n}/(n!)² − ln S(1)·S(1)^q, summed term by term."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    terms, tail, N = _moment_series(q, h, tol, 1)
    s_1 = series_S(1.0, h, tol)
    log_s1 = math.log(s_1.value)
    value = math.fsum(terms + [-log_s1 * s_1.value ** q])
    bound = tail + (1 + log_s1) * q * (s_1.value + s_1.tail_bound) ** q * s_1.tail_bound
    return SeriesValue(value, bound, max(N, s_1.N_used))


def phi_and_derivatives(q: float, h: MomentSequence, tol: float = DEFAULT_SERIES_TOLERANCE) -> PhiValues:
    """φ(q) = ln S(q) − q ln S(1) and its first two derivatives.

    φ′ = B/S − ln S(1) and φ″ = (A·S − B²)/S², with B = S′ and A = S″ summed as
    Σ q^n h_{2(n+1)}/((n!)²(n+1)) and Σ q^n h_{2(n+2)}/((n!)²(n+1)(n+2)).
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    s_q = series_S(q, h, tol).value
    log_s1 = math.log(series_S(1.0, h, tol).value)
    b_terms, _, _ = _moment_series(q, h, tol, 1)
    a_terms, _, _ = _moment_series(q, h, tol, 2)
    b = math.fsum(b_terms)
    a = math.fsum(a_terms)
    return PhiValues(
        phi=math.log(s_q) - q * log_s1,
        phi_prime=b / s_q - log_s1,
        phi_double_prime=(a * s_q - b * b) / (s_q * s_q),
    )


def series_product_coeffs(x, y, n_max: int) -> list[float]:
    """Naive Cauchy product: c_n = Σ_{k≤n} x_k y_{n−k} for n ≤ n_max."""
    return [math.fsum(x[k] * y[n - k] for k in range(n + 1)) for n in range(n_max + 1)]


def phi_numerator_coefficients(h: MomentSequence | AbstractSequence, n_max: int) -> pd.DataFrame:
    """Coefficients of q^n in the two products of φ″'s numerator.

    ``first`` is the coefficient of A(q)·S(q), ``second`` that of B(q)², both written as
    the convolution sums entering T_n; ``first_oracle``/``second_oracle`` come from a
    naive product of the factor series. ``first − second`` equals T_n.
    """
    g = h if isinstance(h, AbstractSequence) else AbstractSequence.from_moments(h)
    g.require(n_max + 2, 'phi_numerator_coefficients')
    fact = [math.factorial(n) for n in range(n_max + 3)]
    s_coeffs = [g[n] / fact[n] ** 2 for n in range(n_max + 1)]
    b_coeffs = [g[n + 1] / (fact[n] ** 2 * (n + 1)) for n in range(n_max + 1)]
    a_coeffs = [g[n + 2] / (fact[n] ** 2 * (n + 1) * (n + 2)) for n in range(n_max + 1)]
    first = [_first_sum(g, n) for n in range(n_max + 1)]
    second = [_second_sum(g, n) for n in range(n_max + 1)]
    return pd.DataFrame({
        'n': range(n_max + 1),
        'first': first,
        'first_oracle': series_product_coeffs(a_coeffs, s_coeffs, n_max),
        'second': second,
        'second_oracle': series_product_coeffs(b_coeffs, b_coeffs, n_max),
    })


def _first_sum(g: AbstractSequence, n: int) -> float:
    f = math.factorial
    return math.fsum(
        g[n - k] * g[k + 2] / (f(n - k) ** 2 * f(k) ** 2 * (k + 1) * (k + 2)) for k in range(n + 1))


def _second_sum(g: AbstractSequence, n: int) -> float:
    f = math.factorial
    return math.fsum(
        g[n - k + 1] * g[k + 1] / (f(n - k) ** 2 * f(k) ** 2 * (n - k + 1) * (k + 1)) for k in range(n + 1))


def lemma1_Tn(g: AbstractSequence, n: int) -> float:
    """T_n, the difference of the two convolution sums, from its definition."""
    g.require(n + 2, 'lemma1_Tn')
    return _first_sum(g, n) - _second_sum(g, n)


def lemma1_Tn_rewritten(g: AbstractSequence, n: int) -> float:
    """T_n after collecting terms into a single sum with factors (2k − n + 1)."""
    g.require(n + 2, 'lemma1_Tn_rewritten')
    f = math.factorial
    terms = [
        g[0] * g[n + 2] / (f(n) ** 2 * (n + 1) * (n + 2)),
        -g[1] * g[n + 1] / (f(n) ** 2 * (n + 1)),
    ]
    terms += [g[n - k] * g[k + 2] * (2 * k - n + 1) / (f(n - k) ** 2 * f(k + 1) ** 2 * (k + 2)) for k in range(n)]
    return math.fsum(terms)


def _even_case(g: AbstractSequence, m: int):
    f = math.factorial

    def t(k):
        return g[m + k + 2] * g[m - k] / (f(m + k + 2) ** 2 * f(m - k) ** 2) * (-2 * m + 4 * k * k + 8 * k + 2)

    def closed(k):
        return -(2 * k + 1) * g[m + k + 1] * g[m - k + 1] / (f(m - k) ** 2 * f(m + k + 1) ** 2 * (m - k + 1))

    def step(s, k):
        ratio = (m - k + 2) / (m + k + 1) * (g[m - k + 1] * g[m + k + 1]) / (g[m - k + 2] * g[m + k])
        return s * ratio + t(k - 1)

    s0 = -g[m + 1] ** 2 / (f(m) ** 2 * f(m + 1) ** 2 * (m + 1))
    return s0, range(1, m + 1), step, closed


def _odd_case(g: AbstractSequence, n: int):
    f = math.factorial
    p = (n + 1) // 2

    def t(k):
        return g[p + 1 + k] * g[p - k] / (f(p + 1 + k) ** 2 * f(p - k) ** 2) * (4 * k * k + 4 * k - 2 * p)

    def closed(k):
        return -2 * (k + 1) * g[p + 1 + k] * g[p - k] / (f(p + 1 + k) ** 2 * f(p - 1 - k) ** 2 * (p - k))

    def step(s, k):
        ratio = (p + 1 - k) / (p + 1 + k) * (g[p + 1 + k] * g[p - k]) / (g[p + k] * g[p + 1 - k])
        return s * ratio + t(k)

    return t(0), range(1, p), step, closed


def lemma1_sk_recursion_check(g: AbstractSequence, n: int, rel_tol: float = 1e-10) -> bool:
    """Run the s_k recursion for T_n and compare each step with its closed form.

    Even n = 2m starts from s_0 = −g_{m+1}²/((m!)²((m+1)!)²(m+1)) and runs k = 1..m;
    odd n starts from s_0 = t_0 and runs k = 1..(n−1)/2.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    g.require(n + 1, 'lemma1_sk_recursion_check')
    s, ks, step, closed = _even_case(g, n // 2) if n % 2 == 0 else _odd_case(g, n)
    if abs(s - closed(0)) > rel_tol * abs(closed(0)):
        return False
    for k in ks:
        s = step(s, k)
        if abs(s - closed(k)) > rel_tol * abs(closed(k)):
            logger.debug(f"s_k recursion for n={n} departs from the closed form at k={k}")
            return False
    return True


def lemma1_bound(g: AbstractSequence, n: int) -> float:
    """Upper estimate g_0 g_{n+2}/((n!)²(n+1)(n+2)) + s_last for T_n; nonpositive under the condition."""
    g.require(n + 2, 'lemma1_bound')
    f = math.factorial
    first = g[0] * g[n + 2] / (f(n) ** 2 * (n + 1) * (n + 2))
    if n % 2 == 0:
        m = n // 2
        s_last = -(2 * m + 1) * g[2 * m + 1] * g[1] / f(2 * m + 1) ** 2
    else:
        s_last = -(n + 1) * g[n + 1] * g[1] / f(n + 1) ** 2
    return first + s_last


def _bessel_sum(nu: int, x, tol: float, derivative: bool):
    """Partial sum of I_ν (or its termwise derivative) in the private mp context."""
    half = x / 2

    def term(m):
        order = 2 * m + nu
        denom = _mp.factorial(m) * _mp.factorial(m + nu)
        if not derivative:
            return half ** order / denom
        if order == 0:
            return _mp.mpf(0)
        return _mp.mpf(order) / 2 * half ** (order - 1) / denom

    total = _mp.mpf(0)
    for m in range(MAX_TERMS):
        total += term(m)
        nxt, after = term(m + 1), term(m + 2)
        if nxt == 0:
            return total
        if after < nxt:
            tail = nxt / (1 - after / nxt)
            if tail <= tol * max(1, abs(total)):
                return total
    raise NumericalError(f"Bessel series I_{nu}({x}) did not converge within {MAX_TERMS} terms")


def bessel_I(nu: int, x: float, tol: float = DEFAULT_SERIES_TOLERANCE) -> float:
    """Modified Bessel function I_ν(x) = Σ_m (x/2)^{2m+ν}/(m!(m+ν)!) for integer ν ≥ 0.

    The series is summed at 40 significant digits; ``tol`` bounds the tail relative to
    max(1, I_ν(x)).
    """
    if int(nu) != nu or nu < 0:
        raise ValueError(f"order must be a nonnegative integer, got {nu}")
    if not 0 <= x <= 50:
        raise ValueError(f"x must lie in [0, 50], got {x}")
    return float(_bessel_sum(int(nu), _mp.mpf(x), tol, derivative=False))


def bessel_I_prime(nu: int, x: float, tol: float = DEFAULT_SERIES_TOLERANCE) -> float:
    """I′_ν(x) by termwise differentiation of the series."""
    if int(nu) != nu or nu < 0:
        raise ValueError(f"order must be a nonnegative integer, got {nu}")
    if not 0 <= x <= 50:
        raise ValueError(f"x must lie in [0, 50], got {x}")
    return float(_bessel_sum(int(nu), _mp.mpf(x), tol, derivative=True))


def bessel_identity_check(x_grid, nu_max: int, tol: float = 1e-30) -> dict[str, float]:
    """Largest absolute residuals of the three recurrences of I_n over the grid.

    * ``derivative``:  I′_n − I_{n+1} − (n/x)·I_n
    * ``three_term``:  (2n/x)·I_n − I_{n−1} + I_{n+1}
    * ``average``:     2I′_n − I_{n−1} − I_{n+1}

    I_{−1} = I_1 for integer order. Residuals are formed before rounding to double.
    """
    x_grid = list(x_grid)
    if not x_grid:
        raise ValueError("x_grid must not be empty")
    if any(not 0 < x <= 20 for x in x_grid):
        raise ValueError("x values must lie in (0, 20]")
    residuals = {'derivative': 0.0, 'three_term': 0.0, 'average': 0.0}
    for x in x_grid:
        xm = _mp.mpf(x)
        values = {n: _bessel_sum(n, xm, tol, False) for n in range(nu_max + 2)}
        for n in range(nu_max + 1):
            i_n, i_up, i_down = values[n], values[n + 1], values[abs(n - 1)]
            d_n = _bessel_sum(n, xm, tol, True)
            residuals['derivative'] = max(residuals['derivative'], float(abs(d_n - i_up - n / xm * i_n)))
            residuals['three_term'] = max(residuals['three_term'], float(abs(2 * n / xm * i_n - i_down + i_up)))
            residuals['average'] = max(residuals['average'], float(abs(2 * d_n - i_down - i_up)))
    return residuals


def u1_u2_positivity(t_grid, tol: float = 1e-30) -> pd.DataFrame:
    """u_1(t) = 16 ln I_0(t) − 4t² + t⁴/4 and u_2(t) = t² I_0(t) − 8 I_2(t) on [0, 2].

    :return: DataFrame with columns t, u1, u2, nonnegative (both ≥ −1e−10).
    """
    t_grid = list(t_grid)
    if any(not 0 <= t <= 2 for t in t_grid):
        raise ValueError("t values must lie in [0, 2]")
    rows = []
    for t in t_grid:
        tm = _mp.mpf(t)
        i0 = _bessel_sum(0, tm, tol, False)
        i2 = _bessel_sum(2, tm, tol, False)
        u1 = float(16 * _mp.log(i0) - 4 * tm ** 2 + tm ** 4 / 4)
        u2 = float(tm ** 2 * i0 - 8 * i2)
        rows.append({'t': t, 'u1': u1, 'u2': u2, 'nonnegative': u1 >= -1e-10 and u2 >= -1e-10})
    df = pd.DataFrame(rows, columns=['t', 'u1', 'u2', 'nonnegative'])
    if not df['nonnegative'].all():
        logger.warning(f"u1/u2 negative at t={df.loc[~df['nonnegative'], 't'].tolist()}")
    return df


def y_function(h2: float, h4: float) -> float:
    """y(h_2, h_4) = h_2 + h_4/2 − (1+h_2)·ln(1 + h_2 + h_4/4)."""
    return h2 + h4 / 2 - (1 + h2) * math.log1p(h2 + h4 / 4)


def dy_dh4(h2: float, h4: float) -> float:
    """∂y/∂h_4 = (2 + 2h_2 + h_4)/(8 + 8h_2 + 2h_4)."""
    return (2 + 2 * h2 + h4) / (8 + 8 * h2 + 2 * h4)


def y_v_functions(h2: float) -> YVValues:
    """y at the largest admissible h_4 = 2h_2²/(1+h_2), v = y/(1+h_2), and v′ in closed form."""
    if not 0 < h2 < 1:
        raise ValueError(f"h2 must lie in (0, 1), got {h2}")
    y = y_function(h2, 2 * h2 ** 2 / (1 + h2))
    v_prime = -h2 ** 2 * (2 + 3 * h2 + 3 * h2 ** 2) / ((1 + h2) ** 3 * (2 + 4 * h2 + 3 * h2 ** 2))
    return YVValues(y_at_h4max=y, v=y / (1 + h2), v_prime=v_prime)


@dataclass(frozen=True)
class PsiDecomposition:
    terms: pd.DataFrame
    folded: float
    y_bound: float
    total: float


def psi_terms(h: MomentSequence, tol: float = DEFAULT_SERIES_TOLERANCE) -> PsiDecomposition:
    """ψ′(1) written as Σ_n (h_{2(n+1)}/(n+1) − h_{2n} ln S(1))/(n!)².

    The n = 0 term is folded into n = 1; ``y_bound`` is y(h_2, h_4), which dominates
    the folded term.
    """
    s_1 = series_S(1.0, h, tol)
    log_s1 = math.log(s_1.value)
    N = s_1.N_used
    if h.max_index < N + 1:
        raise SeriesTruncationError("psi_terms needs one moment beyond S(1)", required_index=N + 1)
    f = math.factorial
    terms = [(h[n + 1] / (n + 1) - h[n] * log_s1) / f(n) ** 2 for n in range(N + 1)]
    df = pd.DataFrame({'n': range(N + 1), 'term': terms})
    folded = terms[0] + terms[1] if N >= 1 else terms[0]
    return PsiDecomposition(terms=df, folded=folded, y_bound=y_function(h[1], h[2]), total=math.fsum(terms))


def positivity_interval(h: MomentSequence, q_max: float = 3.0, tol: float = DEFAULT_SERIES_TOLERANCE) -> float | None:
    """End of the interval (1, q*) on which ψ > 0.

    Returns 1.0 when ψ′(1) ≤ 0 (no positivity right of 1), None when ψ stays positive on
    the whole scanned range (1, q_max], otherwise the first zero located by bisection to a
    bracket of width 1e−8.
    """
    if psi_prime(1.0, h, tol).value <= 0:
        return 1.0
    grid = np.linspace(1.0, q_max, SCAN_POINTS + 1)[1:]
    lo = 1.0
    for q in grid:
        if psi(float(q), h, tol).value <= 0:
            hi = float(q)
            break
        lo = float(q)
    else:
        return None
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if psi(mid, h, tol).value > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bernoulli_report(
        h: MomentSequence,
        q_values,
        tol: float = DEFAULT_SERIES_TOLERANCE,
        q_max: float = 3.0
    ) -> BernoulliReport:
    """S(1), ψ′(1) and ψ at each q, with the positivity interval of ψ."""
    q_values = sorted({float(q) for q in q_values})
    if any(q < 1 for q in q_values):
        raise ValueError("every q must be >= 1")
    s_1 = series_S(1.0, h, tol)
    d_1 = psi_prime(1.0, h, tol)
    psi_values = {q: psi(q, h, tol) for q in q_values}
    n_used = max([s_1.N_used, d_1.N_used] + [p.N_used for p in psi_values.values()])
    tail = max([s_1.tail_bound, d_1.tail_bound] + [p.tail_bound for p in psi_values.values()])
    report = BernoulliReport(
        S1=s_1.value,
        psi_at={q: p.value for q, p in psi_values.items()},
        psi_prime_1=d_1.value,
        N_used=n_used,
        tail_bound=tail,
        positivity_end=positivity_interval(h, q_max, tol),
        label=h.label,
        psi_bounds={q: p.tail_bound for q, p in psi_values.items()},
    )
    logger.info(f"Bernoulli report for {h.label}: S1={report.S1:.10g}, psi'(1)={report.psi_prime_1:.6g}")
    return report


def counterexample_report(tol: float = DEFAULT_SERIES_TOLERANCE, q_values=(2.0,), max_index: int = 60) -> BernoulliReport:
    """Bernoulli report for the counterexample weight; ψ′(1) and ψ(2) must both be positive."""
    h = moment_sequence(RadialWeight.counterexample(), max_index)
    report = bernoulli_report(h, set(q_values) | {2.0}, tol)
    if not (report.psi_prime_1 > 0 and report.psi_at[2.0] > 0):
        raise NumericalError(
            f"counterexample numerics not reproduced: psi'(1)={report.psi_prime_1}, psi(2)={report.psi_at[2.0]}")
    return report
