"""
weights.py

Radial Bergman weights on the unit disk and their moment sequences

    h_m = ∫_0^1 ρ^{m+1} w(ρ) dρ,

computed from closed forms where they are known (classical, power and the
piecewise counterexample weight) and by adaptive Gauss–Legendre quadrature otherwise.
All weights are normalized so that h_0 = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd

from weissler_lab.config import DEFAULT_TOLERANCE, get_logger
from weissler_lab.errors import QuadratureError, WeightSpecError

logger = get_logger()

# Lanczos approximation, g = 7, n = 9
LANCZOS_G = 7
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
GAMMA_MAX_ARGUMENT = 171.6

GL_POINTS = 15
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_POINTS)
MAX_PANELS = 4000


class WeightKind(str, Enum):
    CLASSICAL = 'classical'
    POWER = 'power'
    COUNTEREXAMPLE = 'counterexample'
    CUSTOM = 'custom'


class Provenance(str, Enum):
    CLOSED_FORM = 'closed_form'
    QUADRATURE = 'quadrature'


def gamma_function(x: float) -> float:
    """Euler's Gamma function for positive arguments.

    Integers are returned exactly from the factorial; everything else goes through the
    Lanczos approximation (g=7, 9 coefficients), with the reflection formula below 1/2.

    :param x: Positive argument, at most ~171.6 (Γ overflows a double beyond that).
    :return: Γ(x).
    """
    if not math.isfinite(x) or x <= 0:
        raise ValueError(f"gamma_function requires x > 0, got {x}")
    if x > GAMMA_MAX_ARGUMENT:
        raise ValueError(f"gamma_function overflows for x > {GAMMA_MAX_ARGUMENT}, got {x}")
    if x == int(x):
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_function(1 - x))

    z = x - 1
    a = LANCZOS_COEFFS[0]
    for i, coeff in enumerate(LANCZOS_COEFFS[1:], start=1):
        a += coeff / (z + i)
    t = z + LANCZOS_G + 0.5
    # split the power so that t**(z + 1/2) does not overflow before exp(-t) scales it down
    half_power = t ** (0.5 * (z + 0.5))
    return math.sqrt(2 * math.pi) * half_power * (half_power * math.exp(-t)) * a


@dataclass(frozen=True)
class MomentValue:
    value: float
    abs_error: float
    provenance: Provenance


@dataclass(frozen=True)
class RadialWeight:
    """A radial weight w(|z|) on the unit disk.

    Use the constructors :meth:`classical`, :meth:`power`, :meth:`counterexample` and
    :meth:`custom` rather than the raw dataclass fields.
    """

    kind: WeightKind
    alpha: float | None = None
    power_exponent: float | None = None
    evaluator: Callable | None = field(default=None, compare=False, repr=False)
    singularity_hint: bool = False
    breakpoints: tuple[float, ...] = ()
    vectorized: bool = False
    label: str = ''

    def __post_init__(self):
        if self.kind == WeightKind.CLASSICAL:
            if self.alpha is None or not math.isfinite(self.alpha) or self.alpha <= 1:
                raise ValueError(f"Classical weight requires alpha > 1, got {self.alpha}")
        elif self.kind == WeightKind.POWER:
            if self.power_exponent is None or not math.isfinite(self.power_exponent) or self.power_exponent < 0:
                raise ValueError(f"Power weight requires m >= 0, got {self.power_exponent}")
        elif self.kind == WeightKind.CUSTOM:
            if not callable(self.evaluator):
                raise ValueError("Custom weight requires a callable evaluator")
            if any(not 0 < p < 1 for p in self.breakpoints):
                raise ValueError("Custom weight breakpoints must lie in (0, 1)")

    @classmethod
    def classical(cls, alpha: float) -> RadialWeight:
        """w_α(ρ) = 2(α−1)(1−ρ²)^{α−2}, α > 1."""
        return cls(kind=WeightKind.CLASSICAL, alpha=float(alpha))

    @classmethod
    def power(cls, m: float) -> RadialWeight:
        """w(ρ) = (m+2)ρ^m, m ≥ 0 (not necessarily an integer)."""
        return cls(kind=WeightKind.POWER, power_exponent=float(m))

    @classmethod
    def counterexample(cls) -> RadialWeight:
        """Piecewise weight 3/(2ρ) on [0, 1/2] and 1/(2ρ) on (1/2, 1]."""
        return cls(kind=WeightKind.COUNTEREXAMPLE)

    @classmethod
    def custom(
            cls,
            evaluator: Callable,
            singularity_hint: bool = False,
            breakpoints: tuple[float, ...] = (),
            vectorized: bool = False,
            label: str = 'custom'
        ) -> RadialWeight:
        """Weight given by an evaluator ρ ↦ w(ρ) ≥ 0 on (0, 1); normalized to h_0 = 1.

        :param evaluator: Weight function. Must be safe for concurrent calls.
        :param singularity_hint: Set when w has an integrable singularity at ρ = 0.
        :param breakpoints: Points in (0, 1) where w is not smooth.
        :param vectorized: Whether the evaluator accepts numpy arrays.
        :param label: Name used in reports.
        """
        return cls(
            kind=WeightKind.CUSTOM,
            evaluator=evaluator,
            singularity_hint=singularity_hint,
            breakpoints=tuple(sorted(float(p) for p in breakpoints)),
            vectorized=vectorized,
            label=label,
        )

    @property
    def name(self) -> str:
        if self.kind == WeightKind.CLASSICAL:
            return f"classical:alpha={self.alpha:g}"
        if self.kind == WeightKind.POWER:
            return f"power:m={self.power_exponent:g}"
        if self.kind == WeightKind.COUNTEREXAMPLE:
            return 'counterexample'
        return self.label

    @property
    def has_closed_form(self) -> bool:
        return self.kind != WeightKind.CUSTOM

    def __call__(self, rho):
        """Evaluate w(ρ) (unnormalized for custom weights)."""
        rho = np.asarray(rho, dtype=float)
        if self.kind == WeightKind.CLASSICAL:
            return 2 * (self.alpha - 1) * (1 - rho ** 2) ** (self.alpha - 2)
        if self.kind == WeightKind.POWER:
            return (self.power_exponent + 2) * rho ** self.power_exponent
        if self.kind == WeightKind.COUNTEREXAMPLE:
            return np.where(rho <= 0.5, 1.5, 0.5) / rho
        if self.vectorized:
            return np.asarray(self.evaluator(rho), dtype=float)
        return np.array([self.evaluator(float(r)) for r in np.atleast_1d(rho)], dtype=float).reshape(rho.shape)

    def closed_form_moment(self, m: int) -> float | None:
        """Closed-form h_m, or None for custom weights."""
        if self.kind == WeightKind.CLASSICAL:
            if m % 2 == 0:
                # h_{2(n+1)} = h_{2n}·(n+1)/(α+n)
                return math.prod((j + 1) / (self.alpha + j) for j in range(m // 2))
            half = m / 2
            return gamma_function(self.alpha) * gamma_function(half + 1) / gamma_function(self.alpha + half)
        if self.kind == WeightKind.POWER:
            return (self.power_exponent + 2) / (self.power_exponent + 2 + m)
        if self.kind == WeightKind.COUNTEREXAMPLE:
            return (1 + 2.0 ** (-m)) / (2 * (1 + m))
        return None

    def quadrature_problem(self, m: int) -> tuple[Callable, float, float, tuple[float, ...]]:
        """Integrand, interval and breakpoints whose integral is the raw moment h_m.

        Classical weights with α < 2 are integrated in s, where 1 − ρ² = s^{1/(α−1)}; this
        turns h_m into ∫_0^1 (1 − s^{1/(α−1)})^{m/2} ds and removes the endpoint singularity.
        Custom weights flagged with a singularity at 0 use ρ = s².
        """
        if self.kind == WeightKind.CLASSICAL and self.alpha < 2:
            exponent = 1 / (self.alpha - 1)
            return (lambda s: (1 - s ** exponent) ** (m / 2)), 0.0, 1.0, ()
        if self.kind == WeightKind.COUNTEREXAMPLE:
            return (lambda rho: np.where(rho <= 0.5, 1.5, 0.5) * rho ** m), 0.0, 1.0, (0.5,)
        if self.kind == WeightKind.CUSTOM and self.singularity_hint:
            breaks = tuple(math.sqrt(p) for p in self.breakpoints)
            return (lambda s: 2 * s * s ** (2 * (m + 1)) * self(s * s)), 0.0, 1.0, breaks
        return (lambda rho: rho ** (m + 1) * self(rho)), 0.0, 1.0, self.breakpoints


@dataclass(frozen=True)
class MomentSequence:
    """Even moments h[k] = h_{2k}, k = 0..N, normalized so that h[0] = 1."""

    values: tuple[float, ...]
    provenance: tuple[Provenance, ...]
    abs_errors: tuple[float, ...]
    label: str = ''

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("MomentSequence needs at least h_0")
        if not len(self.values) == len(self.provenance) == len(self.abs_errors):
            raise ValueError("values, provenance and abs_errors must have equal length")
        if not all(math.isfinite(v) and v >= 0 for v in self.values):
            raise ValueError("moments must be finite and nonnegative")

    @classmethod
    def from_values(cls, values, label: str = 'sequence') -> MomentSequence:
        """Wrap an explicit sequence (treated as exact) whose first entry must be 1."""
        values = tuple(float(v) for v in values)
        if not values or values[0] != 1.0:
            raise ValueError("from_values requires h[0] = 1")
        return cls(
            values=values,
            provenance=(Provenance.CLOSED_FORM,) * len(values),
            abs_errors=(0.0,) * len(values),
            label=label,
        )

    @property
    def max_index(self) -> int:
        return len(self.values) - 1

    @property
    def max_error(self) -> float:
        return max(self.abs_errors)

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    def truncated(self, n: int) -> MomentSequence:
        """Prefix h[0..=n]."""
        if n > self.max_index:
            raise ValueError(f"cannot truncate a sequence of max_index {self.max_index} to {n}")
        return MomentSequence(self.values[:n + 1], self.provenance[:n + 1], self.abs_errors[:n + 1], self.label)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'k': range(len(self.values)),
            'moment_index': [2 * k for k in range(len(self.values))],
            'value': self.values,
            'abs_error': self.abs_errors,
            'provenance': [p.value for p in self.provenance],
        })


def _panel(f: Callable, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    values = np.asarray(f(mid + half * GL_NODES), dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"integrand returned a nonfinite value on [{a}, {b}]")
    return half * float(np.dot(GL_WEIGHTS, values))


def adaptive_gauss_legendre(
        f: Callable,
        a: float,
        b: float,
        tol: float = DEFAULT_TOLERANCE,
        breakpoints: tuple[float, ...] = (),
        max_panels: int = MAX_PANELS
    ) -> tuple[float, float]:
    """Composite adaptive Gauss–Legendre quadrature with 15-point panels.

    Each panel is compared against the sum over its two halves; panels whose difference
    exceeds their share of ``tol`` (proportional to their width) are bisected.

    :param f: Vectorized integrand.
    :param a: Lower limit.
    :param b: Upper limit.
    :param tol: Absolute error target for the whole interval.
    :param breakpoints: Interior points where f is not smooth; panels never straddle them.
    :param max_panels: Subdivision budget.
    :return: (integral, error bound).
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    edges = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    width = b - a
    stack = [(lo, hi, _panel(f, lo, hi)) for lo, hi in zip(edges, edges[1:])]
    values, errors = [], []
    panels = len(stack)
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid)
        right = _panel(f, mid, hi)
        panels += 2
        err = abs(left + right - whole)
        converged = err <= tol * (hi - lo) / width
        if not converged and (mid <= lo or mid >= hi):
            logger.warning(f"quadrature panel [{lo}, {hi}] accepted at float resolution with error {err:.3g}")
            converged = True
        if converged:
            values.append(left + right)
            errors.append(err)
            continue
        if panels > max_panels:
            rest = [left + right] + [w for _, _, w in stack]
            estimate = math.fsum(values + rest)
            bound = math.fsum(errors) + err + math.fsum(abs(w) for _, _, w in stack)
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge within {max_panels} panels",
                                  estimate, bound)
        stack.append((lo, mid, left))
        stack.append((mid, hi, right))
    logger.debug(f"quadrature on [{a}, {b}] used {panels} panels")
    return math.fsum(values), math.fsum(errors)


def _raw_quadrature_moment(w: RadialWeight, m: int, tol: float) -> tuple[float, float]:
    f, a, b, breaks = w.quadrature_problem(m)
    return adaptive_gauss_legendre(f, a, b, tol=tol, breakpoints=breaks)


def _validate_request(m: int, tol: float):
    if int(m) != m or m < 0:
        raise ValueError(f"moment index must be a nonnegative integer, got {m}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")


def quadrature_moment(w: RadialWeight, m: int, tol: float = DEFAULT_TOLERANCE) -> MomentValue:
    """h_m by adaptive quadrature regardless of whether a closed form exists.

    Custom weights are divided by their raw h_0.
    """
    _validate_request(m, tol)
    value, err = _raw_quadrature_moment(w, int(m), tol)
    if w.kind == WeightKind.CUSTOM:
        norm, norm_err = _raw_quadrature_moment(w, 0, tol)
        if not norm > 0:
            raise ValueError(f"weight {w.name} has nonpositive mass {norm}")
        value, err = value / norm, (err + abs(value / norm) * norm_err) / norm
    return MomentValue(value=value, abs_error=err, provenance=Provenance.QUADRATURE)


def moment(w: RadialWeight, m: int, tol: float = DEFAULT_TOLERANCE) -> MomentValue:
    """The moment h_m = ∫_0^1 ρ^{m+1} w(ρ) dρ of a normalized weight.

    :param w: Weight.
    :param m: Moment index (any nonnegative integer; odd moments included).
    :param tol: Absolute tolerance for quadrature.
    :return: Value with error bound and provenance.
    """
    _validate_request(m, tol)
    closed = w.closed_form_moment(int(m))
    if closed is not None:
        return MomentValue(value=closed, abs_error=0.0, provenance=Provenance.CLOSED_FORM)
    return quadrature_moment(w, m, tol)


def moment_sequence(w: RadialWeight, N: int, tol: float = DEFAULT_TOLERANCE) -> MomentSequence:
    """Even moments h[k] = h_{2k} for k = 0..N.

    :param w: Weight.
    :param N: Largest index k.
    :param tol: Absolute tolerance for quadrature.
    :return: Normalized moment sequence.
    """
    if int(N) != N or N < 0:
        raise ValueError(f"N must be a nonnegative integer, got {N}")
    _validate_request(0, tol)
    N = int(N)
    if w.has_closed_form:
        values = [w.closed_form_moment(2 * k) for k in range(N + 1)]
        values[0] = 1.0
        return MomentSequence(
            values=tuple(values),
            provenance=(Provenance.CLOSED_FORM,) * (N + 1),
            abs_errors=(0.0,) * (N + 1),
            label=w.name,
        )

    norm, norm_err = _raw_quadrature_moment(w, 0, tol)
    if not norm > 0:
        raise ValueError(f"weight {w.name} has nonpositive mass {norm}")
    values, errors = [1.0], [0.0]
    for k in range(1, N + 1):
        raw, raw_err = _raw_quadrature_moment(w, 2 * k, tol)
        values.append(raw / norm)
        errors.append((raw_err + raw / norm * norm_err) / norm)
    logger.debug(f"moment sequence of {w.name} up to k={N}, max error {max(errors):.3g}")
    return MomentSequence(
        values=tuple(values),
        provenance=(Provenance.QUADRATURE,) * (N + 1),
        abs_errors=tuple(errors),
        label=w.name,
    )


def holder_chain_check(h: MomentSequence, n_max: int | None = None) -> float:
    """Largest value of h_2^n − h_{2n} over 1 ≤ n ≤ n_max (≤ 0 up to rounding by Hölder)."""
    n_max = h.max_index if n_max is None else n_max
    if n_max > h.max_index or n_max < 1:
        raise ValueError(f"n_max must lie in [1, {h.max_index}], got {n_max}")
    return max(h[1] ** n - h[n] for n in range(1, n_max + 1))


def smoothed_counterexample(delta: float) -> RadialWeight:
    """Continuous monotone version of the counterexample weight.

    The jump of ρ·w(ρ) from 3/2 to 1/2 at ρ = 1/2 is replaced by a linear ramp on
    [1/2 − δ, 1/2 + δ]; the mass stays exactly 1.
    """
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    lo, hi = 0.5 - delta, 0.5 + delta

    def evaluator(rho):
        return np.interp(rho, [lo, hi], [1.5, 0.5]) / rho

    return RadialWeight.custom(evaluator, breakpoints=(lo, hi), vectorized=True,
                               label=f"smoothed_counterexample:delta={delta:g}")


def table_weight(path: str | Path) -> RadialWeight:
    """Weight linearly interpolated from a CSV of (rho, w) pairs.

    :param path: CSV file, with or without a header row; rho strictly increasing in (0, 1).
    :return: Custom weight.
    """
    df = pd.read_csv(path, header=None)
    assert df.shape[1] >= 2, "weight table must have two columns (rho, w)"
    df = df.iloc[:, :2].apply(pd.to_numeric, errors='coerce')
    if df.iloc[0].isna().any():
        df = df.iloc[1:]
    if df.isna().any().any():
        raise WeightSpecError(f"weight table {path} contains non-numeric entries")
    rho = df.iloc[:, 0].to_numpy(dtype=float)
    w = df.iloc[:, 1].to_numpy(dtype=float)
    if len(rho) < 2:
        raise WeightSpecError(f"weight table {path} needs at least two rows")
    if np.any(rho <= 0) or np.any(rho >= 1) or np.any(np.diff(rho) <= 0):
        raise WeightSpecError(f"weight table {path} needs strictly increasing rho in (0, 1)")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise WeightSpecError(f"weight table {path} needs finite nonnegative w")

    def evaluator(r):
        return np.interp(r, rho, w)

    return RadialWeight.custom(evaluator, breakpoints=tuple(rho), vectorized=True, label=f"table:{path}")


def _parameter(body: str, key: str, spec: str) -> float:
    name, sep, value = body.partition('=')
    if sep != '=' or name.strip() != key:
        raise WeightSpecError(f"expected '{key}=<float>' in weight spec '{spec}'")
    try:
        return float(value)
    except ValueError:
        raise WeightSpecError(f"'{value}' is not a number in weight spec '{spec}'") from None


def parse_weight(spec: str) -> RadialWeight:
    """Parse ``classical:alpha=<f>``, ``power:m=<f>``, ``counterexample`` or ``table:<path>``."""
    spec = spec.strip()
    family, _, body = spec.partition(':')
    try:
        if family == 'counterexample' and not body:
            return RadialWeight.counterexample()
        if family == 'classical':
            return RadialWeight.classical(_parameter(body, 'alpha', spec))
        if family == 'power':
            return RadialWeight.power(_parameter(body, 'm', spec))
        if family == 'table' and body:
            path = Path(body)
            if not path.exists():
                raise WeightSpecError(f"weight table '{body}' not found")
            return table_weight(path)
    except WeightSpecError:
        raise
    except ValueError as e:
        raise WeightSpecError(str(e)) from e
    raise WeightSpecError(f"unknown weight spec '{spec}'")
