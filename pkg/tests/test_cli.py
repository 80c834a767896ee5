import json

import pandas as pd
import pytest

from weissler_lab import cli
from weissler_lab.errors import QuadratureError


def _run(capsys, *argv):
    status = cli.main(list(argv))
    return status, capsys.readouterr().out


def test_moments_counterexample(capsys):
    status, out = _run(capsys, 'moments', '--weight', 'counterexample', '--n', '2')
    assert status == cli.EXIT_OK
    payload = json.loads(out)
    assert payload['moments'] == pytest.approx([1, 0.2083333, 0.10625], abs=1e-7)
    assert payload['provenance'] == ['closed_form'] * 3


@pytest.mark.parametrize('weight', ['classical:alpha=2', 'power:m=0'])
def test_moments_first_two(capsys, weight):
    status, out = _run(capsys, 'moments', '--weight', weight, '--n', '1')
    assert status == cli.EXIT_OK
    assert json.loads(out)['moments'] == pytest.approx([1, 0.5], rel=1e-14)


def test_check_exit_codes(capsys):
    status, out = _run(capsys, 'check', '--weight', 'classical:alpha=3', '--condition', 'strong')
    assert status == cli.EXIT_OK
    assert max(abs(m) for m in json.loads(out)['margins']) <= 1e-10

    status, out = _run(capsys, 'check', '--weight', 'counterexample', '--condition', 'weak')
    assert status == cli.EXIT_VIOLATION
    assert json.loads(out)['first_violation'] == 1

    status, out = _run(capsys, 'check', '--weight', 'power:m=2', '--condition', 'strong')
    assert status == cli.EXIT_OK
    assert all(m > 0 for m in json.loads(out)['margins'])


def test_check_h4(capsys):
    status, out = _run(capsys, 'check', '--weight', 'counterexample', '--condition', 'h4')
    assert status == cli.EXIT_VIOLATION
    payload = json.loads(out)
    assert payload['condition'] == 'H4Bound'
    assert payload['holds'] is False


def test_weissler(capsys):
    status, out = _run(capsys, 'weissler', '--coeffs', '1,1', '--n', '2', '--r', '0.70710678')
    assert status == cli.EXIT_OK
    payload = json.loads(out)
    assert pytest.approx(payload['lhs'], abs=1e-4) == 2.0833
    assert pytest.approx(payload['rhs'], rel=1e-12) == 2.25

    status, out = _run(capsys, 'weissler', '--coeffs', '1,1', '--n', '1', '--r', '1')
    assert status == cli.EXIT_OK
    assert pytest.approx(json.loads(out)['gap'], abs=1e-15) == 0

    status, _ = _run(capsys, 'weissler', '--coeffs', '1,0.01', '--n', '2', '--r', '0.8')
    assert status == cli.EXIT_VIOLATION


def test_weissler_bad_coefficients(capsys):
    status, out = _run(capsys, 'weissler', '--coeffs', '1,abc', '--n', '2', '--r', '0.5')
    assert status == cli.EXIT_INPUT_ERROR
    assert out == ''


def test_bernoulli(capsys):
    status, out = _run(capsys, 'bernoulli', '--weight', 'counterexample', '--q', '2')
    assert status == cli.EXIT_VIOLATION
    assert 0.0103 <= json.loads(out)['psi']['2.000000'] <= 0.0107

    status, _ = _run(capsys, 'bernoulli', '--weight', 'classical:alpha=2', '--q', '2,3,5')
    assert status == cli.EXIT_OK

    status, out = _run(capsys, 'bernoulli', '--weight', 'counterexample', '--q', '1')
    assert status == cli.EXIT_OK
    assert json.loads(out)['psi']['1.000000'] == 0


def test_bernoulli_rejects_small_q(capsys):
    status, _ = _run(capsys, 'bernoulli', '--q', '0.5')
    assert status == cli.EXIT_INPUT_ERROR


def test_bad_weight_is_input_error(capsys):
    status, out = _run(capsys, 'moments', '--weight', 'bogus')
    assert status == cli.EXIT_INPUT_ERROR
    assert out == ''


def test_numerical_failure_exit_code(capsys, monkeypatch):
    def fail(*args, **kwargs):
        raise QuadratureError("budget exhausted", estimate=1.0, error_bound=0.1)

    monkeypatch.setattr(cli, 'moment_sequence', fail)
    status, out = _run(capsys, 'moments', '--n', '3')
    assert status == cli.EXIT_NUMERICAL_ERROR
    assert out == ''


def test_unparseable_q_list():
    with pytest.raises(SystemExit):
        cli.main(['bernoulli', '--q', '2,x'])


def test_json_round_trip(capsys):
    _, out = _run(capsys, 'check', '--weight', 'power:m=7', '--condition', 'weak', '--max-index', '20')
    assert json.dumps(json.loads(out), sort_keys=True, indent=2) + '\n' == out


def test_out_file(capsys, tmp_path):
    path = tmp_path / 'report.json'
    status, out = _run(capsys, 'moments', '--weight', 'counterexample', '--n', '3', '--out', str(path))
    assert status == cli.EXIT_OK
    assert out == ''
    assert [p.name for p in tmp_path.iterdir()] == ['report.json']
    assert json.loads(path.read_text())['moments'][0] == 1


def test_csv_format(capsys):
    status, out = _run(capsys, 'check', '--weight', 'counterexample', '--condition', 'weak', '--max-index', '5',
                       '--format', 'csv')
    assert status == cli.EXIT_VIOLATION
    lines = out.strip().splitlines()
    assert lines[0] == 'name,index,lhs,rhs,gap,bound'
    assert len(lines) == 5


def test_human_format(capsys):
    _, out = _run(capsys, 'moments', '--weight', 'counterexample', '--n', '2', '--format', 'human')
    assert '0.208333' in out
    assert '0.20833333' not in out


def test_sharpness(capsys):
    status, out = _run(capsys, 'sharpness', '--n', '2', '--r', '0.72', '--eps', '0.01')
    assert status == cli.EXIT_OK
    rows = json.loads(out)['rows']
    assert len(rows) == 1
    assert rows[0]['holds'] is False
    assert rows[0]['predicted_gap'] < 0


@pytest.mark.parametrize('kwargs', [
    {'tolerance': 0},
    {'max_index': 1},
    {'output_format': 'xml'},
    {'weight_spec': 'classical:alpha=0.5'},
])
def test_run_config_validation(kwargs):
    with pytest.raises(ValueError):
        cli.RunConfig(**kwargs)


def test_run_config_defaults():
    config = cli.RunConfig()
    assert config.weight.name == cli.DEFAULT_WEIGHT
    assert config.max_index == 60


def test_reproduce_paper_wiring(capsys, monkeypatch):
    seen = []

    def fake_reproduce(weight, tol):
        seen.append(weight)
        status = 'FAIL' if weight is not None and weight.name == 'counterexample' else 'PASS'
        return pd.DataFrame([{'check': 'strong_condition', 'value': 0.0, 'expected': '>= -1e-10', 'status': status}])

    monkeypatch.setattr(cli.reproduction, 'reproduce', fake_reproduce)
    status, out = _run(capsys, 'reproduce-paper')
    assert status == cli.EXIT_OK
    assert json.loads(out)['passed'] is True
    assert seen == [None]

    status, _ = _run(capsys, 'reproduce-paper', '--weight', 'counterexample')
    assert status == cli.EXIT_VIOLATION
    assert seen[-1].name == 'counterexample'


def test_reproduce_paper_end_to_end(capsys):
    status, out = _run(capsys, 'reproduce-paper')
    assert status == cli.EXIT_OK
    rows = {row['check']: row for row in json.loads(out)['checks']}
    assert 0.0046 <= rows['psi_prime_1']['value'] <= 0.0050
    assert 0.0103 <= rows['psi(2)']['value'] <= 0.0107
    assert all(row['status'] == 'PASS' for row in rows.values())


def test_check_classical_large_alpha(capsys):
    status, out = _run(capsys, 'check', '--weight', 'classical:alpha=120', '--condition', 'strong')
    assert status == cli.EXIT_OK
    assert max(abs(m) for m in json.loads(out)['margins']) <= 1e-10


def test_tolerance_reaches_bernoulli_series(capsys):
    _, out = _run(capsys, 'bernoulli', '--weight', 'counterexample', '--q', '2')
    default_terms = json.loads(out)['N_used']
    _, out = _run(capsys, 'bernoulli', '--weight', 'counterexample', '--q', '2', '--tolerance', '1e-20')
    assert json.loads(out)['N_used'] > default_terms
