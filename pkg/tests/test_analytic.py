import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weissler_lab import analytic, bernoulli
from weissler_lab.analytic import PowerSeries
from weissler_lab.weights import MomentSequence, RadialWeight, moment_sequence

coefficient_lists = st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=5)


def test_dilate():
    f = PowerSeries.from_coeffs([1, 1])
    assert analytic.dilate(f, 1).coeffs == (1.0, 1.0)
    assert analytic.dilate(f, 1 / math.sqrt(2)).coeffs == pytest.approx((1, 0.7071068), abs=1e-7)
    assert analytic.dilate(PowerSeries.from_coeffs([0, 0, 0, 1]), 0.5).coeffs[3] == 1 / 8


@pytest.mark.parametrize('r', [0, -0.5, 1.5])
def test_dilate_rejects_radius(r):
    with pytest.raises(ValueError):
        analytic.dilate(PowerSeries.from_coeffs([1, 1]), r)


def test_series_power():
    assert analytic.series_power(PowerSeries.from_coeffs([1, 1]), 2, 2).coeffs == (1.0, 2.0, 1.0)
    result = analytic.series_power(PowerSeries.from_coeffs([1, 1 / math.sqrt(2)]), 2, 2)
    assert result.coeffs == pytest.approx((1, math.sqrt(2), 0.5), rel=1e-15)
    f = PowerSeries.from_coeffs([0.3, 0.2, 0.1])
    assert analytic.series_power(f, 1, 1).coeffs == (0.3, 0.2)
    assert analytic.series_power(f, 1, 4).coeffs == (0.3, 0.2, 0.1, 0.0, 0.0)


def test_series_power_matches_naive_oracle():
    rng = np.random.default_rng(7)
    for deg in range(5):
        f = PowerSeries.from_coeffs(rng.uniform(0, 1, size=deg + 1))
        for n in range(1, 6):
            K = n * deg
            fast = analytic.series_power(f, n, K).array
            slow = np.asarray(analytic.naive_power_coeffs(f, n, K))
            assert np.max(np.abs(fast - slow)) <= 1e-12


def test_series_power_rejects_exponent():
    with pytest.raises(ValueError):
        analytic.series_power(PowerSeries.from_coeffs([1, 1]), 0, 2)


def test_parse():
    assert PowerSeries.parse('coeffs=1,0.5,0.25').coeffs == (1.0, 0.5, 0.25)
    assert PowerSeries.parse('1, 2').truncation == 1
    with pytest.raises(ValueError):
        PowerSeries.parse('1,x')


def test_bergman_norm_sq():
    h = moment_sequence(RadialWeight.classical(2), 5)
    value, bound = analytic.bergman_norm_sq(PowerSeries.from_coeffs([1, 1]), h)
    assert pytest.approx(value) == 1.5
    assert bound == 0
    assert analytic.bergman_norm_sq(PowerSeries.from_coeffs([1]), h)[0] == 1
    assert analytic.bergman_norm_sq(PowerSeries.from_coeffs([0, 0, 0, 1]), h)[0] == h[3]


def test_bergman_norm_complex_coefficients():
    h = moment_sequence(RadialWeight.classical(2), 2)
    value, _ = analytic.bergman_norm_sq(PowerSeries.from_coeffs([1j, 1]), h)
    assert pytest.approx(value) == 1.5


def test_bergman_norm_short_sequence():
    with pytest.raises(ValueError):
        analytic.bergman_norm_sq(PowerSeries.from_coeffs([1, 1, 1]), MomentSequence.from_values([1, 0.5]))


def test_weissler_at_critical_radius():
    verdict = analytic.weissler_even_check(PowerSeries.from_coeffs([1, 1]), RadialWeight.classical(2), 2,
                                           1 / math.sqrt(2))
    assert pytest.approx(verdict.lhs, rel=1e-12) == 25 / 12
    assert pytest.approx(verdict.rhs, rel=1e-12) == 2.25
    assert verdict.holds
    assert verdict.truncation_bound >= 0


def test_weissler_identity_case():
    verdict = analytic.weissler_even_check(PowerSeries.from_coeffs([1, 1]), RadialWeight.power(2), 1, 1)
    assert pytest.approx(verdict.gap, abs=1e-15) == 0
    assert verdict.holds


def test_weissler_constant_is_equality():
    verdict = analytic.weissler_even_check(PowerSeries.from_coeffs([0.7]), RadialWeight.classical(3), 4, 0.5)
    assert verdict.holds


def test_weissler_fails_beyond_critical_radius():
    verdict = analytic.weissler_even_check(PowerSeries.from_coeffs([1, 0.01]), RadialWeight.classical(2), 2, 0.8)
    assert not verdict.holds
    assert verdict.gap < 0


def test_weissler_rejects_negative_coefficients():
    with pytest.raises(ValueError):
        analytic.weissler_even_check(PowerSeries.from_coeffs([1, -1]), RadialWeight.classical(2), 2, 0.5)


@settings(max_examples=100, deadline=None)
@given(coeffs=coefficient_lists, n=st.integers(min_value=2, max_value=4),
       w=st.sampled_from([RadialWeight.classical(1.5), RadialWeight.classical(2), RadialWeight.classical(3),
                          RadialWeight.power(1), RadialWeight.power(2)]))
def test_weissler_holds_at_critical_radius(coeffs, n, w):
    verdict = analytic.weissler_even_check(PowerSeries.from_coeffs(coeffs), w, n, 1 / math.sqrt(n))
    assert verdict.holds


@settings(max_examples=50, deadline=None)
@given(coeffs=coefficient_lists, n=st.integers(min_value=1, max_value=4),
       r1=st.floats(min_value=0.05, max_value=1.0), r2=st.floats(min_value=0.05, max_value=1.0))
def test_weissler_lhs_monotone_in_radius(coeffs, n, r1, r2):
    f = PowerSeries.from_coeffs(coeffs)
    h = moment_sequence(RadialWeight.classical(2), n * f.truncation)
    lo, hi = sorted((r1, r2))
    lhs_lo = analytic.weissler_even_check(f, h, n, lo).lhs
    lhs_hi = analytic.weissler_even_check(f, h, n, hi).lhs
    assert lhs_lo <= lhs_hi * (1 + 1e-12)


def test_sharpness_probe():
    w = RadialWeight.classical(2)
    df = analytic.sharpness_probe(w, 2, 1 / math.sqrt(2), [0.01])
    assert list(df.columns) == ['eps', 'lhs', 'rhs', 'gap', 'predicted_gap', 'holds']
    assert pytest.approx(df['predicted_gap'][0], abs=1e-15) == 0

    df = analytic.sharpness_probe(w, 2, 0.72, [0.01])
    assert df['gap'][0] < 0
    assert df['predicted_gap'][0] < 0
    assert not df['holds'][0]

    df = analytic.sharpness_probe(w, 3, 0.5, [0.05])
    assert df['gap'][0] > 0
    assert df['holds'][0]


def test_sharpness_probe_leading_order():
    df = analytic.sharpness_probe(RadialWeight.power(1), 3, 0.4, [0.01, 0.02])
    assert np.allclose(df['gap'], df['predicted_gap'], rtol=1e-2)


def test_sharpness_probe_rejects_grid():
    with pytest.raises(ValueError):
        analytic.sharpness_probe(RadialWeight.classical(2), 2, 0.5, [])
    with pytest.raises(ValueError):
        analytic.sharpness_probe(RadialWeight.classical(2), 2, 0.5, [0.3])


def test_exp_composition_identity():
    g = analytic.exp_composition_coeffs(PowerSeries.from_coeffs([0, 1]), 4, 4)
    for n in range(5):
        for k in range(5):
            expected = 1 / math.factorial(k) if n == k else 0
            assert pytest.approx(g[n][k], abs=1e-15) == expected


def test_exp_composition_zero_and_quadratic():
    g = analytic.exp_composition_coeffs(PowerSeries.from_coeffs([0]), 3, 3)
    assert g[0][0] == 1
    assert np.count_nonzero(g) == 1

    g = analytic.exp_composition_coeffs(PowerSeries.from_coeffs([0, 1, 1]), 2, 2)
    assert g[2][1] == 1
    assert g[2][2] == 0.5


def test_exp_composition_rejects_negative():
    with pytest.raises(ValueError):
        analytic.exp_composition_coeffs(PowerSeries.from_coeffs([0, -1]), 2, 2)


def test_zero_free_trivial():
    h = moment_sequence(RadialWeight.classical(2), 5)
    verdict = analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0]), h, 3.0, 5, 5)
    assert pytest.approx(verdict.lhs) == 1
    assert pytest.approx(verdict.rhs) == 1
    assert verdict.holds


def test_zero_free_reduces_to_bernoulli_series():
    h = moment_sequence(RadialWeight.counterexample(), 30)
    verdict = analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0, 1]), h, 2.0, 30, 30)
    assert pytest.approx(verdict.lhs, rel=1e-12) == bernoulli.series_S(2.0, h).value
    assert pytest.approx(verdict.rhs, rel=1e-12) == bernoulli.series_S(1.0, h).value ** 2
    assert verdict.truncation_bound < 1e-10
    assert not verdict.holds


def test_zero_free_holds_for_classical():
    h = moment_sequence(RadialWeight.classical(2), 30)
    verdict = analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0, 1]), h, 2.0, 30, 30)
    assert verdict.holds


def test_zero_free_constant_term_scales():
    h = moment_sequence(RadialWeight.classical(3), 30)
    plain = analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0, 1]), h, 2.0, 30, 30)
    shifted = analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0.3, 1]), h, 2.0, 30, 30)
    assert pytest.approx(shifted.lhs, rel=1e-12) == math.exp(1.2) * plain.lhs
    assert pytest.approx(shifted.rhs, rel=1e-12) == math.exp(1.2) * plain.rhs


def test_zero_free_rejects():
    h = moment_sequence(RadialWeight.classical(2), 10)
    with pytest.raises(ValueError):
        analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0, 1]), h, 0.5, 10, 10)
    with pytest.raises(ValueError):
        analytic.zero_free_weissler_check(PowerSeries.from_coeffs([0, 1]), h, 2.0, 10, 3)


def test_multinomial_identity():
    assert all(analytic.multinomial_identity(n, k) for n in range(1, 9) for k in range(13))


@pytest.mark.parametrize('w', [RadialWeight.classical(2), RadialWeight.classical(1.5), RadialWeight.power(2)])
def test_moment_product_bound(w):
    h = moment_sequence(w, 10)
    assert analytic.moment_product_bound(h, 4, 10) >= -1e-14


def test_reciprocal_product_bound():
    h = moment_sequence(RadialWeight.classical(3), 8)
    for n in range(1, 5):
        for k in range(9):
            assert analytic.reciprocal_product_bound(h, n, k) >= -1e-9 * n ** k / h[k]


def test_inequality_verdict_allowance():
    verdict = analytic.InequalityVerdict.from_sides(1.0, 1.0 - 1e-15)
    assert verdict.holds
    assert not analytic.InequalityVerdict.from_sides(1.0, 1.0 - 1e-9).holds
    assert set(verdict.to_dict()) == {'lhs', 'rhs', 'gap', 'holds', 'truncation_bound'}
