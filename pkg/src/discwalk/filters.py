"""Circle-sample filters standing in for the good set of starting points.

The construction restricts the integrand to a full-measure-ish set of
thetas on which the occupation bounds hold uniformly.  That set is
non-constructive, so the workbench offers two stand-ins: accept everything
(the upper-bound route needs no restriction), or drop the worst tail of a
sample ranked by its scaled occupation statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .rotation import FixedAngle, walk_heights


class AcceptAll:
    name = "all"

    def select(self, thetas: Sequence[FixedAngle], alpha: FixedAngle) -> np.ndarray:
        return np.ones(len(thetas), dtype=bool)


@dataclass
class QuantileFilter:
    """Drop the fraction q of thetas with the largest scaled occupation.

    The statistic is max over levels |v| <= v_max and dyadic times n <=
    horizon of (visits to v among first n) * sqrt(log n) / n.
    """

    q: float
    horizon: int = 1 << 14
    v_max: int = 2

    @property
    def name(self) -> str:
        return f"quantile(q={self.q},horizon={self.horizon},v_max={self.v_max})"

    def statistic(self, theta: FixedAngle, alpha: FixedAngle) -> float:
        heights = walk_heights(theta.bits, alpha.bits, self.horizon)
        times = []
        n = 16
        while n < self.horizon:
            times.append(n)
            n *= 2
        times.append(self.horizon)
        best = 0.0
        for n in times:
            scale = math.sqrt(math.log(n)) / n
            prefix = heights[:n]
            for v in range(-self.v_max, self.v_max + 1):
                best = max(best, int(np.count_nonzero(prefix == v)) * scale)
        return best

    def select(self, thetas: Sequence[FixedAngle], alpha: FixedAngle) -> np.ndarray:
        stats = np.array([self.statistic(t, alpha) for t in thetas])
        cutoff = np.quantile(stats, 1.0 - self.q)
        return stats <= cutoff
