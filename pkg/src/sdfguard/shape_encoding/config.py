from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SemConfig:
    """Shape-encoding settings.

    ``sigma`` and ``delta`` left as ``None`` are derived from the image size
    by :meth:`resolve`: ``sigma = max(0.5, 2 * max(H, W) / 512)`` and
    ``delta = max(2, round(0.01 * max(H, W)))``.
    """

    sigma: float | None = None
    tau: float = 0.5
    delta: int | None = None
    beta: float = 0.5

    def __post_init__(self):
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if self.delta is not None and self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")

    def resolve(self, height: int, width: int) -> "SemConfig":
        side = max(height, width)
        sigma = self.sigma if self.sigma is not None else max(0.5, 2.0 * side / 512.0)
        # round half away from zero, independent of banker's rounding
        delta = self.delta if self.delta is not None else max(2, int(math.floor(0.01 * side + 0.5)))
        return replace(self, sigma=sigma, delta=delta)
