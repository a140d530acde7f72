import math

from config.config import ABS_TOL, REL_TOL


def tolerance(scale):
    """Comparison slack around a value of the given magnitude"""
    if not math.isfinite(scale):
        return ABS_TOL
    return ABS_TOL + REL_TOL * abs(scale)


def below(value, bound):
    """True when value is strictly below bound beyond tolerance"""
    if bound == math.inf:
        return value < math.inf
    return value < bound - tolerance(bound)
