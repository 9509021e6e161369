"""Small argument checks shared across modules."""

from fractions import Fraction
from numbers import Integral, Rational, Real

import numpy as np


def check_laziness(alpha, *, allow_zero=True):
    """Return ``alpha`` if it lies in ``[0, 1)`` (or ``(0, 1)``)."""
    if not isinstance(alpha, Real):
        raise TypeError(f"laziness must be a real number, got {alpha!r}")
    lo_ok = alpha >= 0 if allow_zero else alpha > 0
    if not (lo_ok and alpha < 1):
        interval = "[0, 1)" if allow_zero else "(0, 1)"
        raise ValueError(f"laziness must lie in {interval}, got {alpha}")
    return alpha


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_tolerance(tol):
    if not isinstance(tol, Real) or not (tol > 0) or not np.isfinite(float(tol)):
        raise ValueError(f"tolerance must be a positive finite number, got {tol!r}")
    return float(tol)


def is_exact_number(x):
    return isinstance(x, Rational) and not isinstance(x, bool)


def as_exact(x):
    """Convert an int/Fraction-like value to ``int`` or ``Fraction``."""
    if isinstance(x, Integral):
        return int(x)
    f = Fraction(x)
    return f.numerator if f.denominator == 1 else f
