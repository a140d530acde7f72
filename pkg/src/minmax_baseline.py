"""Classical min-max robust optimum by threshold decomposition."""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ArgumentError
from .ground_sets import deterministic_min

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinMaxResult:
    value: float
    solution: object
    breakdown: tuple

    def to_frame(self):
        """Get the per-threshold values as a DataFrame"""
        return pd.DataFrame(list(self.breakdown), columns=['threshold', 'value'])


def thresholds(d):
    """Distinct deviation values plus zero, decreasing"""
    return sorted(set(float(v) for v in d) | {0.0}, reverse=True)


def solve_minmax(inst):
    """min over tau of gamma*tau + min_x sum (c_hat + max(0, d - tau)) x"""
    gamma = inst.gamma
    if abs(gamma - round(gamma)) > 1e-9:
        raise ArgumentError(f"Min-max decomposition needs an integer budget, got {gamma}")
    gamma = round(gamma)

    best_value, best_bits = math.inf, None
    breakdown = []
    for tau in thresholds(inst.d):
        weights = inst.c_hat + np.maximum(0.0, inst.d - tau)
        det_value, bits = deterministic_min(inst.ground, weights)
        total = gamma * tau + det_value
        breakdown.append((tau, total))
        if total < best_value:
            best_value, best_bits = total, bits

    logger.info(f"Min-max optimum {best_value:.6f} over {len(breakdown)} thresholds")
    return MinMaxResult(best_value, inst.solution(best_bits), tuple(breakdown))
