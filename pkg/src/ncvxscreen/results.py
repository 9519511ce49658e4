from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .penalties import KktResidual


@dataclass
class SolveStats:
    """Counters shared by every solver.

    ``n_updates`` counts single-coordinate updates, so a full-gradient
    step of GIST on ``d`` features counts ``d``.
    """

    n_iter: int = 0
    n_updates: int = 0
    time: float = 0.0
    converged: bool = False
    screened_counts: list = field(default_factory=list)
    trace: list = field(default_factory=list)


class SolveResult(NamedTuple):
    w: np.ndarray
    kkt: KktResidual
    stats: SolveStats
