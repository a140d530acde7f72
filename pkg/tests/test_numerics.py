import math

import src.numerics as numerics
from config.config import ABS_TOL, REL_TOL
from src.numerics import below, tolerance


def test_tolerance_scales_with_magnitude():
    assert tolerance(0.0) == ABS_TOL
    assert tolerance(-100.0) == ABS_TOL + 100.0 * REL_TOL
    assert tolerance(math.inf) == ABS_TOL


def test_below_is_strict_beyond_tolerance():
    assert below(6.5, 7.0)
    assert not below(7.0, 7.0)
    assert not below(7.0 - 0.5 * tolerance(7.0), 7.0)
    assert below(1e300, math.inf)
    assert not below(math.inf, math.inf)


def test_only_tolerance_helpers_are_exported():
    assert [name for name in vars(numerics) if not name.startswith('_') and callable(getattr(numerics, name))
            and getattr(numerics, name).__module__ == numerics.__name__] == ['tolerance', 'below']
