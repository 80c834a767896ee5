"""
reproduction.py

The acceptance suite: counterexample numerics, equality of the strong condition for
classical weights, the power-weight margin formula, the Weissler and Bernoulli property
sweeps, the convolution-sum machinery, the Bessel checks and the quadrature/convolution
oracles. Each check is one row of a pandas table with columns check, value, expected, status.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np
import pandas as pd

from weissler_lab import analytic, bernoulli, conditions
from weissler_lab.config import DEFAULT_TOLERANCE, get_logger, sweep_threads
from weissler_lab.weights import RadialWeight, moment, moment_sequence, quadrature_moment

logger = get_logger()

PASS = 'PASS'
FAIL = 'FAIL'

CLASSICAL_ALPHAS = (1.5, 2.0, 2.5, 3.0, 5.0)
POWER_EXPONENTS = (0.5, 1.0, 2.0, 7.0)
WEISSLER_WEIGHTS = (
    RadialWeight.classical(1.5),
    RadialWeight.classical(2.0),
    RadialWeight.classical(3.0),
    RadialWeight.power(1.0),
    RadialWeight.power(2.0),
)
BERNOULLI_WEIGHTS = tuple(RadialWeight.classical(a) for a in (1.5, 2.0, 3.0, 5.0)) + tuple(
    RadialWeight.power(m) for m in POWER_EXPONENTS)
BERNOULLI_QS = (1.25, 1.5, 2.0, 3.0, 5.0)
BESSEL_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
RANDOM_POLYNOMIALS = 200
SEED = 20240801


def _row(check: str, value, expected: str, ok: bool) -> dict:
    return {'check': check, 'value': value, 'expected': expected, 'status': PASS if ok else FAIL}


def counterexample_rows(tol: float = bernoulli.DEFAULT_SERIES_TOLERANCE) -> list[dict]:
    h = moment_sequence(RadialWeight.counterexample(), 60)
    report = bernoulli.bernoulli_report(h, (2.0,), tol)
    # direct summation of the closed-form series
    oracle = math.fsum((1 + 4.0 ** -n) / (2 * (1 + 2 * n) * math.factorial(n) ** 2) for n in range(30))
    return [
        _row('psi_prime_1', report.psi_prime_1, '[0.0046, 0.0050]', 0.0046 <= report.psi_prime_1 <= 0.0050),
        _row('psi(2)', report.psi_at[2.0], '[0.0103, 0.0107]', 0.0103 <= report.psi_at[2.0] <= 0.0107),
        _row('S1', report.S1, f"{oracle:.10f}", abs(report.S1 - oracle) <= 1e-12),
    ]


def strong_condition_rows(weight: RadialWeight | None = None) -> list[dict]:
    """Equality of the strong condition for classical weights, or margins of one weight."""
    if weight is not None:
        report = conditions.check_strong_condition(moment_sequence(weight, 31))
        return [_row(f"strong_condition[{weight.name}]", report.min_margin, '>= -1e-10', report.holds)]
    worst = max(
        max(abs(m) for m in conditions.check_strong_condition(moment_sequence(RadialWeight.classical(a), 31)).margins)
        for a in CLASSICAL_ALPHAS
    )
    return [_row('classical_strong_equality', worst, '<= 1e-10', worst <= 1e-10)]


def power_margin_rows() -> list[dict]:
    worst = 0.0
    for m in POWER_EXPONENTS:
        report = conditions.check_strong_condition(moment_sequence(RadialWeight.power(m), 32))
        for n, margin in zip(report.indices, report.margins):
            if n > 30:
                break
            predicted = 2 * m / ((1 + n) * (2 + m + 2 * n) * (4 + m + 2 * n))
            worst = max(worst, abs(margin - predicted))
    return [_row('power_margin_formula', worst, '<= 1e-10', worst <= 1e-10)]


def weissler_rows(seed: int = SEED) -> list[dict]:
    """Random nonnegative polynomials at r = 1/√n, and f = 1 + 0.01z at r = 1.05/√n."""
    rng = np.random.default_rng(seed)
    polys = [
        analytic.PowerSeries.from_coeffs(rng.uniform(0.0, 1.0, size=int(rng.integers(0, 7)) + 1))
        for _ in range(RANDOM_POLYNOMIALS)
    ]
    near_constant = analytic.PowerSeries.from_coeffs([1.0, 0.01])
    violations, sharp_misses = 0, 0
    for w in WEISSLER_WEIGHTS:
        h = moment_sequence(w, 4 * 6)
        for n in (2, 3, 4):
            for f in polys:
                if not analytic.weissler_even_check(f, h, n, 1 / math.sqrt(n)).holds:
                    violations += 1
            if analytic.weissler_even_check(near_constant, h, n, 1.05 / math.sqrt(n)).holds:
                sharp_misses += 1
    return [
        _row('weissler_random_suite', violations, '0 violations', violations == 0),
        _row('weissler_sharpness', sharp_misses, '0 cases holding', sharp_misses == 0),
    ]


def bernoulli_rows(tol: float = bernoulli.DEFAULT_SERIES_TOLERANCE) -> list[dict]:
    worst_psi, worst_phi = -math.inf, -math.inf
    grid = np.linspace(1.0, 5.0, 50)
    for w in BERNOULLI_WEIGHTS:
        h = moment_sequence(w, 60)
        worst_psi = max([worst_psi] + [bernoulli.psi(q, h, tol).value for q in BERNOULLI_QS])
        worst_phi = max([worst_phi] + [bernoulli.phi_and_derivatives(float(q), h, tol).phi_double_prime for q in grid])
    return [
        _row('bernoulli_psi', worst_psi, '<= 1e-10', worst_psi <= 1e-10),
        _row('bernoulli_phi_concavity', worst_phi, '<= 1e-10', worst_phi <= 1e-10),
    ]


def convolution_sum_rows() -> list[dict]:
    worst_t, recursion_ok = -math.inf, True
    families = [RadialWeight.classical(a) for a in CLASSICAL_ALPHAS] + [RadialWeight.power(m) for m in POWER_EXPONENTS]
    for w in families:
        g = bernoulli.AbstractSequence.from_moments(moment_sequence(w, 14))
        for n in range(13):
            worst_t = max(worst_t, bernoulli.lemma1_Tn(g, n))
            recursion_ok = recursion_ok and bernoulli.lemma1_sk_recursion_check(g, n)
    return [
        _row('Tn_sign', worst_t, '<= 1e-12', worst_t <= 1e-12),
        _row('sk_recursion', recursion_ok, 'True', recursion_ok),
    ]


def bessel_rows() -> list[dict]:
    residuals = bernoulli.bessel_identity_check(BESSEL_GRID, 5)
    worst_residual = max(residuals.values())
    table = bernoulli.u1_u2_positivity(np.linspace(0.0, 2.0, 200))
    worst_u = float(min(table['u1'].min(), table['u2'].min()))
    lemma2_ok = all(
        conditions.check_lemma2_inequality(moment_sequence(w, 31)).holds for w in BERNOULLI_WEIGHTS)
    return [
        _row('bessel_identities', worst_residual, '<= 1e-12', worst_residual <= 1e-12),
        _row('u1_u2_positivity', worst_u, '>= -1e-10', worst_u >= -1e-10),
        _row('lemma2_inequality', lemma2_ok, 'True', lemma2_ok),
    ]


def oracle_rows(tol: float = DEFAULT_TOLERANCE) -> list[dict]:
    worst_moment = 0.0
    for w in (RadialWeight.classical(1.5), RadialWeight.classical(2.0), RadialWeight.classical(3.0),
              RadialWeight.power(1.0), RadialWeight.power(2.0), RadialWeight.counterexample()):
        for m in range(41):
            worst_moment = max(worst_moment, abs(moment(w, m, tol).value - quadrature_moment(w, m, tol).value))

    rng = np.random.default_rng(SEED)
    worst_conv = 0.0
    for deg in range(5):
        f = analytic.PowerSeries.from_coeffs(rng.uniform(0.0, 1.0, size=deg + 1))
        for n in range(1, 6):
            K = n * deg
            fast = analytic.series_power(f, n, K).array
            slow = np.asarray(analytic.naive_power_coeffs(f, n, K), dtype=float)
            worst_conv = max(worst_conv, float(np.max(np.abs(fast - slow))))

    multinomial_ok = all(analytic.multinomial_identity(n, k) for n in range(1, 9) for k in range(13))
    return [
        _row('moments_closed_vs_quadrature', worst_moment, f"<= {10 * tol:g}", worst_moment <= 10 * tol),
        _row('series_power_vs_naive', worst_conv, '<= 1e-12', worst_conv <= 1e-12),
        _row('multinomial_identity', multinomial_ok, 'True', multinomial_ok),
    ]


def _run(named_task: tuple[str, Callable[[], list[dict]]]) -> list[dict]:
    name, task = named_task
    try:
        return task()
    except Exception as e:
        logger.error(f"reproduction check {name} failed: {e}")
        return [_row(name, str(e), 'no error', False)]


def reproduce(weight: RadialWeight | None = None, tol: float = DEFAULT_TOLERANCE) -> pd.DataFrame:
    """Run the whole suite and return one row per check.

    :param weight: Optional weight whose strong-condition margins replace the classical equality row.
    :param tol: Quadrature tolerance for the moment oracle rows.
    :return: DataFrame with columns check, value, expected, status.
    """
    tasks = [
        ('counterexample', counterexample_rows),
        ('strong_condition', lambda: strong_condition_rows(weight)),
        ('power_margin', power_margin_rows),
        ('weissler', weissler_rows),
        ('bernoulli', bernoulli_rows),
        ('convolution_sums', convolution_sum_rows),
        ('bessel', bessel_rows),
        ('oracles', lambda: oracle_rows(tol)),
    ]
    threads = sweep_threads()
    if threads == 0:
        results = [_run(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run, tasks))
    df = pd.DataFrame([row for rows in results for row in rows], columns=['check', 'value', 'expected', 'status'])
    failed = df.loc[df['status'] == FAIL, 'check'].tolist()
    if failed:
        logger.warning(f"reproduction checks failed: {failed}")
    else:
        logger.info(f"all {len(df)} reproduction checks passed")
    return df
