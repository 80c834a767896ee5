"""
cli.py

Command-line front end. Every subcommand prints a JSON, CSV or human-readable report and
exits with 0 (everything holds), 1 (a violation was found), 2 (bad input) or
3 (the numerics could not be certified).

    weissler-lab moments --weight counterexample --n 2
    weissler-lab check --weight classical:alpha=3 --condition strong
    weissler-lab bernoulli --weight counterexample --q 2
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd

from weissler_lab import analytic, bernoulli, conditions, reproduction
from weissler_lab.config import DEFAULT_MAX_INDEX, DEFAULT_SERIES_TOLERANCE, DEFAULT_TOLERANCE, get_logger
from weissler_lab.errors import NumericalError
from weissler_lab.weights import RadialWeight, moment_sequence, parse_weight

logger = get_logger()

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

DEFAULT_WEIGHT = 'classical:alpha=2'
OUTPUT_FORMATS = ('json', 'csv', 'human')
SWEEP_COLUMNS = ['name', 'index', 'lhs', 'rhs', 'gap', 'bound']


@dataclass(frozen=True)
class RunConfig:
    weight_spec: str = DEFAULT_WEIGHT
    tolerance: float = DEFAULT_TOLERANCE
    max_index: int = DEFAULT_MAX_INDEX
    output_format: str = 'json'
    output_path: Path | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_index < 2:
            raise ValueError(f"max_index must be >= 2, got {self.max_index}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        # reject unknown weights before any computation
        _ = self.weight

    @cached_property
    def weight(self) -> RadialWeight:
        return parse_weight(self.weight_spec)

    @property
    def series_tolerance(self) -> float:
        """Tail tolerance for the moment series; never looser than the library default."""
        return min(self.tolerance, DEFAULT_SERIES_TOLERANCE)


class CommandResult(NamedTuple):
    status: int
    payload: dict
    frame: pd.DataFrame


def _verdict_frame(name: str, index, verdict: analytic.InequalityVerdict) -> pd.DataFrame:
    return pd.DataFrame([{
        'name': name,
        'index': index,
        'lhs': verdict.lhs,
        'rhs': verdict.rhs,
        'gap': verdict.gap,
        'bound': verdict.truncation_bound,
    }], columns=SWEEP_COLUMNS)


def cmd_moments(config: RunConfig, n: int) -> CommandResult:
    if n < 0:
        raise ValueError(f"--n must be nonnegative, got {n}")
    h = moment_sequence(config.weight, n, config.tolerance)
    payload = {
        'weight': config.weight.name,
        'moments': list(h.values),
        'provenance': [p.value for p in h.provenance],
        'abs_errors': list(h.abs_errors),
    }
    return CommandResult(EXIT_OK, payload, h.to_frame())


def cmd_check(config: RunConfig, condition_name: str) -> CommandResult:
    h = moment_sequence(config.weight, config.max_index, config.tolerance)
    if condition_name == 'h4':
        verdict = conditions.check_h4_bound(h)
        payload = {'condition': conditions.ConditionName.H4_BOUND.value, **verdict.to_dict()}
        status = EXIT_OK if verdict.holds else EXIT_VIOLATION
        return CommandResult(status, payload, _verdict_frame(f"H4Bound:{h.label}", 2, verdict))
    report = conditions.check_condition(condition_name, h, series_tol=config.series_tolerance)
    if not report.holds:
        logger.info(f"{report.condition_name.value} fails for {h.label} at index {report.first_violation}")
    return CommandResult(EXIT_OK if report.holds else EXIT_VIOLATION, report.to_dict(), report.to_frame())


def cmd_weissler(config: RunConfig, coeffs: str, n: int, r: float) -> CommandResult:
    f = analytic.PowerSeries.parse(coeffs)
    verdict = analytic.weissler_even_check(f, config.weight, n, r, config.tolerance)
    payload = {'weight': config.weight.name, 'n': n, 'r': r, **verdict.to_dict()}
    status = EXIT_OK if verdict.holds else EXIT_VIOLATION
    return CommandResult(status, payload, _verdict_frame(f"weissler:{config.weight.name}", n, verdict))


def cmd_bernoulli(config: RunConfig, q_list: list[float]) -> CommandResult:
    h = moment_sequence(config.weight, config.max_index, config.tolerance)
    report = bernoulli.bernoulli_report(h, q_list, config.series_tolerance)
    rows = [{
        'name': f"psi:{h.label}",
        'index': q,
        'lhs': value + report.S1 ** q,
        'rhs': report.S1 ** q,
        'gap': -value,
        'bound': report.psi_bounds[q],
    } for q, value in sorted(report.psi_at.items())]
    return CommandResult(EXIT_OK if report.holds else EXIT_VIOLATION, report.to_dict(),
                         pd.DataFrame(rows, columns=SWEEP_COLUMNS))


def cmd_sharpness(config: RunConfig, n: int, r: float, eps_grid: list[float]) -> CommandResult:
    df = analytic.sharpness_probe(config.weight, n, r, eps_grid, config.tolerance)
    payload = {'weight': config.weight.name, 'n': n, 'r': r, 'rows': df.to_dict('records')}
    return CommandResult(EXIT_OK, payload, df)


def cmd_reproduce_paper(config: RunConfig, weight_override: bool = False) -> CommandResult:
    df = reproduction.reproduce(config.weight if weight_override else None, config.tolerance)
    passed = bool((df['status'] == reproduction.PASS).all())
    payload = {'checks': df.to_dict('records'), 'passed': passed}
    return CommandResult(EXIT_OK if passed else EXIT_VIOLATION, payload, df)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def render(result: CommandResult, output_format: str) -> str:
    """Serialize a result; JSON uses sorted keys and shortest round-trip floats."""
    if output_format == 'json':
        return json.dumps(result.payload, sort_keys=True, indent=2, default=_json_default) + '\n'
    if output_format == 'csv':
        return result.frame.to_csv(index=False)
    return result.frame.to_string(index=False, float_format=lambda v: f"{v:.6g}") + '\n'


def write_output(text: str, path: Path | None):
    """Print to stdout, or replace ``path`` atomically."""
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, 'w') as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info(f"wrote {path}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--weight', default=None,
                        help=f"classical:alpha=<f>, power:m=<f>, counterexample or table:<path> (default {DEFAULT_WEIGHT})")
    common.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE, help="Quadrature tolerance; series tails use the smaller of this and 1e-13.")
    common.add_argument('--max-index', type=int, default=DEFAULT_MAX_INDEX, help="Largest moment index k.")
    common.add_argument('--format', choices=OUTPUT_FORMATS, default='json', dest='output_format')
    common.add_argument('--out', type=Path, default=None, help="Write the report here instead of stdout.")
    common.add_argument('--verbose', '-v', action='count', default=0, help="-v for INFO, -vv for DEBUG logs.")

    parser = argparse.ArgumentParser(prog='weissler-lab', description="Moment conditions and contractive "
                                     "inequalities for radial Bergman weights.")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('moments', parents=[common], help="Even moments h_0, h_2, ..., h_2N.")
    p.add_argument('--n', type=int, default=5)

    p = sub.add_parser('check', parents=[common], help="Check a moment condition.")
    p.add_argument('--condition', choices=sorted(conditions.CONDITION_CHECKS) + ['h4'], required=True)

    p = sub.add_parser('weissler', parents=[common], help="Even-exponent Weissler inequality for a polynomial.")
    p.add_argument('--coeffs', required=True, help="Comma-separated Taylor coefficients, e.g. 1,0.5.")
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--r', type=float, required=True)

    p = sub.add_parser('bernoulli', parents=[common], help="Bernoulli-type inequality at the given q.")
    p.add_argument('--q', type=_float_list, default=[2.0], help="Comma-separated exponents q >= 1.")

    p = sub.add_parser('sharpness', parents=[common], help="Probe f = 1 + eps*z around the critical radius.")
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--r', type=float, required=True)
    p.add_argument('--eps', type=_float_list, default=[0.01, 0.02, 0.05, 0.1])

    sub.add_parser('reproduce-paper', parents=[common], help="Run the full acceptance suite.")
    return parser


def run(args: argparse.Namespace) -> CommandResult:
    config = RunConfig(
        weight_spec=args.weight or DEFAULT_WEIGHT,
        tolerance=args.tolerance,
        max_index=args.max_index,
        output_format=args.output_format,
        output_path=args.out,
    )
    if args.command == 'moments':
        return cmd_moments(config, args.n)
    if args.command == 'check':
        return cmd_check(config, args.condition)
    if args.command == 'weissler':
        return cmd_weissler(config, args.coeffs, args.n, args.r)
    if args.command == 'bernoulli':
        return cmd_bernoulli(config, args.q)
    if args.command == 'sharpness':
        return cmd_sharpness(config, args.n, args.r, args.eps)
    return cmd_reproduce_paper(config, weight_override=args.weight is not None)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        get_logger('DEBUG' if args.verbose > 1 else 'INFO')
    try:
        result = run(args)
        write_output(render(result, args.output_format), args.out)
    except ValueError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_INPUT_ERROR
    except NumericalError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_NUMERICAL_ERROR
    return result.status


if __name__ == '__main__':
    sys.exit(main())
