import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weissler_lab import weights
from weissler_lab.errors import QuadratureError, WeightSpecError
from weissler_lab.weights import Provenance, RadialWeight

TOL = 1e-12


def test_gamma_integer():
    assert weights.gamma_function(5) == 24


def test_gamma_half_integers():
    assert pytest.approx(weights.gamma_function(0.5), rel=1e-12) == math.sqrt(math.pi)
    assert pytest.approx(weights.gamma_function(3.5), rel=1e-12) == 15 * math.sqrt(math.pi) / 8


def test_gamma_matches_math():
    for x in (0.1, 0.7, 1.3, 2.5, 7.25, 33.3, 120.5):
        assert pytest.approx(weights.gamma_function(x), rel=1e-12) == math.gamma(x)


@pytest.mark.parametrize('x', [0, -1, -0.5, float('nan'), 200])
def test_gamma_rejects(x):
    with pytest.raises(ValueError):
        weights.gamma_function(x)


def test_counterexample_moments():
    w = RadialWeight.counterexample()
    assert weights.moment(w, 0).value == 1
    assert pytest.approx(weights.moment(w, 2).value, rel=1e-15) == 5 / 24
    assert weights.moment(w, 2).provenance == Provenance.CLOSED_FORM


def test_classical_moment():
    assert pytest.approx(weights.moment(RadialWeight.classical(2), 2).value) == 0.5


def test_power_zero_even_moments():
    w = RadialWeight.power(0)
    for n in range(10):
        assert pytest.approx(weights.moment(w, 2 * n).value, rel=1e-15) == 1 / (n + 1)


def test_moment_sequence_closed_forms():
    h = weights.moment_sequence(RadialWeight.classical(2), 3)
    assert h.values == pytest.approx((1, 1 / 2, 1 / 3, 1 / 4), rel=1e-14)
    assert h.max_index == 3

    h = weights.moment_sequence(RadialWeight.counterexample(), 2)
    assert h.values == pytest.approx((1, 5 / 24, 17 / 160), rel=1e-14)
    assert h[0] == 1.0


def test_custom_weight_normalized():
    w = RadialWeight.custom(lambda r: 4 * r)
    h = weights.moment_sequence(w, 0)
    assert h.values == (1.0,)

    h = weights.moment_sequence(w, 2)
    # raw h_0 = 4/3, raw h_2 = 4/5
    assert pytest.approx(h[1], abs=1e-10) == 3 / 5
    assert h.provenance[1] == Provenance.QUADRATURE
    assert h.max_error < 1e-10


@pytest.mark.parametrize('w', [
    RadialWeight.classical(1.5),
    RadialWeight.classical(2),
    RadialWeight.classical(3),
    RadialWeight.power(0.5),
    RadialWeight.power(2),
    RadialWeight.counterexample(),
])
def test_closed_form_matches_quadrature(w):
    for m in range(41):
        closed = weights.moment(w, m, TOL).value
        numeric = weights.quadrature_moment(w, m, TOL).value
        assert abs(closed - numeric) <= 10 * TOL


def test_power_zero_equals_classical_two():
    a = weights.moment_sequence(RadialWeight.power(0), 30)
    b = weights.moment_sequence(RadialWeight.classical(2), 30)
    assert np.allclose(a.values, b.values, rtol=0, atol=10 * TOL)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(min_value=1.05, max_value=8.0))
def test_classical_sequences_monotone_and_log_convex(alpha):
    h = weights.moment_sequence(RadialWeight.classical(alpha), 30)
    for k in range(1, 30):
        assert h[k + 1] <= h[k]
        assert h[k] ** 2 <= h[k - 1] * h[k + 1] + 4 * TOL


def test_counterexample_monotone_and_log_convex():
    h = weights.moment_sequence(RadialWeight.counterexample(), 40)
    for k in range(1, 40):
        assert h[k + 1] <= h[k]
        assert h[k] ** 2 <= h[k - 1] * h[k + 1] + 4 * TOL


def test_holder_chain():
    for w in (RadialWeight.classical(2), RadialWeight.power(7), RadialWeight.counterexample()):
        h = weights.moment_sequence(w, 20)
        assert weights.holder_chain_check(h) <= 1e-15


def test_moment_sequence_frame():
    df = weights.moment_sequence(RadialWeight.counterexample(), 2).to_frame()
    assert list(df.columns) == ['k', 'moment_index', 'value', 'abs_error', 'provenance']
    assert list(df['moment_index']) == [0, 2, 4]


def test_from_values_requires_unit_mass():
    with pytest.raises(ValueError):
        weights.MomentSequence.from_values([0.5, 0.25])


def test_invalid_parameters():
    with pytest.raises(ValueError):
        RadialWeight.classical(1)
    with pytest.raises(ValueError):
        RadialWeight.power(-0.5)
    with pytest.raises(ValueError):
        weights.moment(RadialWeight.classical(2), -1)
    with pytest.raises(ValueError):
        weights.moment(RadialWeight.classical(2), 2, tol=0)


def test_nonfinite_evaluator_is_input_error():
    w = RadialWeight.custom(lambda r: float('nan'))
    with pytest.raises(ValueError):
        weights.moment(w, 0)


def test_quadrature_budget_exhausted():
    with pytest.raises(QuadratureError) as exc:
        weights.adaptive_gauss_legendre(lambda x: 1 / x, 0.0, 1.0, tol=1e-12, max_panels=50)
    assert exc.value.estimate > 0
    assert exc.value.error_bound > 0


def test_adaptive_gauss_legendre_smooth():
    value, err = weights.adaptive_gauss_legendre(np.exp, 0.0, 1.0, tol=1e-13)
    assert pytest.approx(value, abs=1e-13) == math.e - 1
    assert err <= 1e-13


def test_smoothed_counterexample_is_close():
    w = weights.smoothed_counterexample(0.01)
    h = weights.moment_sequence(w, 3)
    exact = weights.moment_sequence(RadialWeight.counterexample(), 3)
    assert h[0] == 1.0
    for k in range(1, 4):
        assert abs(h[k] - exact[k]) < 1e-3
    with pytest.raises(ValueError):
        weights.smoothed_counterexample(0.5)


def test_parse_weight():
    w = weights.parse_weight('classical:alpha=2')
    assert w.alpha == 2
    assert w.name == 'classical:alpha=2'
    assert weights.parse_weight('power:m=0.5').power_exponent == 0.5
    assert weights.parse_weight(' counterexample ').kind == weights.WeightKind.COUNTEREXAMPLE


@pytest.mark.parametrize('spec', ['bogus', 'classical:alpha=1', 'classical:beta=2', 'power:m=abc',
                                  'counterexample:x', 'table:/no/such/file.csv'])
def test_parse_weight_rejects(spec):
    with pytest.raises(WeightSpecError):
        weights.parse_weight(spec)


def test_table_weight(tmp_path):
    path = tmp_path / 'w.csv'
    path.write_text('rho,w\n0.1,2\n0.5,2\n0.9,2\n')
    w = weights.parse_weight(f'table:{path}')
    h = weights.moment_sequence(w, 2)
    assert pytest.approx(h[1], abs=1e-9) == 0.5
    assert pytest.approx(h[2], abs=1e-9) == 1 / 3


def test_table_weight_rejects_unsorted(tmp_path):
    path = tmp_path / 'w.csv'
    path.write_text('0.5,1\n0.2,1\n')
    with pytest.raises(WeightSpecError):
        weights.table_weight(path)


def test_classical_moments_large_alpha():
    h = weights.moment_sequence(RadialWeight.classical(120), 60)
    assert all(math.isfinite(v) and v > 0 for v in h.values)
    # h2 = 1/alpha, h4 = 2/(alpha (alpha+1))
    assert pytest.approx(h[1], rel=1e-14) == 1 / 120
    assert pytest.approx(h[2], rel=1e-14) == 2 / (120 * 121)


@pytest.mark.parametrize('m', [2, 4, 10, 40])
def test_classical_even_moments_match_gamma_quotient(m):
    w = RadialWeight.classical(3)
    gamma = weights.gamma_function
    expected = gamma(3) * gamma(m / 2 + 1) / gamma(3 + m / 2)
    assert pytest.approx(w.closed_form_moment(m), rel=1e-13) == expected


def test_panel_accepted_at_float_resolution(caplog):
    calls = []

    def drifting(x):
        calls.append(1)
        return np.full_like(x, float(len(calls)))

    lo = 1.0
    hi = math.nextafter(lo, 2.0)
    value, err = weights.adaptive_gauss_legendre(drifting, lo, hi, tol=1e-30)
    assert err > 1e-30
    assert value > 0
    assert 'accepted at float resolution' in caplog.text
