"""Numerical checks of moment conditions and contractive inequalities for radial Bergman weights."""

from weissler_lab.weights import (
    MomentSequence,
    RadialWeight,
    gamma_function,
    moment,
    moment_sequence,
    parse_weight,
)
from weissler_lab.analytic import InequalityVerdict, PowerSeries
from weissler_lab.conditions import ConditionReport
from weissler_lab.bernoulli import AbstractSequence, BernoulliReport

__version__ = '0.1.0'
