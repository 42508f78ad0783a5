"""Monte-Carlo sensitivity of the invariant to data edits and to the bin count.

Perturbations act multiplicatively on log-return entries.  The percent
change is ``100 * mean|delta| / baseline`` (percent of the mean absolute
change, not a mean of per-replication percents).
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from . import rng
from .density import resolve_bin_count
from .errors import DomainError, InvariantError, NumericalError
from .market_data import ReturnMatrix
from .optimizer import OptimizerConfig, frontier_scan

MAX_FAILED_FRACTION = 0.01


@dataclass(frozen=True)
class PerturbationSpec:
    data_fraction: float = 0.05
    magnitude: float = 0.05
    replications: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.data_fraction <= 1:
            raise DomainError("data_fraction must lie in (0, 1]")
        # magnitude 0 is allowed as the null perturbation
        if not 0 <= self.magnitude <= 1:
            raise DomainError("magnitude must lie in [0, 1]")
        if self.replications < 1:
            raise DomainError("replications must be positive")
        rng.check_seed(self.seed)


@dataclass
class SensitivityReport:
    kind: str
    baseline_h2: float
    mean_abs_change: float
    mean_pct_change: Optional[float]
    replication_count: int
    failed_replications: int = 0
    per_replication_changes: Optional[list] = None
    details: Optional[dict] = None


def perturbed_count(spec, size):
    # guard against 0.05 * 810 * 4 = 162.00000000000003 rounding up to 163
    return max(1, math.ceil(spec.data_fraction * size - 1e-9))


def perturb_returns(data: ReturnMatrix, spec: PerturbationSpec, replication_index: int) -> ReturnMatrix:
    """Scale ``ceil(fraction * T * n)`` distinct entries by ``1 + u``, ``u ~ U[-magnitude, magnitude]``."""
    g = rng.stream(spec.seed, "perturb", replication_index)
    flat = data.returns.ravel().copy()
    k = perturbed_count(spec, flat.size)
    idx = g.choice(flat.size, size=k, replace=False)
    u = g.uniform(-spec.magnitude, spec.magnitude, size=k)
    flat[idx] *= 1.0 + u
    return ReturnMatrix(data.labels, flat.reshape(data.returns.shape))


def _summarize(kind, baseline, values, failed, keep, details=None):
    changes = [abs(v - baseline) for v in values]
    # fixed-order reduction keeps the mean independent of completion order
    mean_abs = math.fsum(changes) / len(changes) if changes else math.nan
    pct = 100.0 * mean_abs / baseline if baseline > 0 else None
    return SensitivityReport(kind, baseline, mean_abs, pct, len(values), failed,
                             changes if keep else None, details)


def _replication(args):
    data, spec, r, grid_size, cfg = args
    try:
        return frontier_scan(perturb_returns(data, spec, r), grid_size, cfg).invariant_h2
    except InvariantError:
        return None


def sensitivity_perturbation(data: ReturnMatrix, spec: PerturbationSpec = PerturbationSpec(), grid_size=50,
                             cfg: OptimizerConfig = OptimizerConfig(), jobs=1, keep_changes=False):
    """Mean absolute and percent change of the invariant over seeded perturbations."""
    baseline = frontier_scan(data, grid_size, cfg).invariant_h2
    tasks = [(data, spec, r, grid_size, cfg) for r in range(spec.replications)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replication, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_replication(t) for t in tasks]
    values = [v for v in results if v is not None]
    failed = len(results) - len(values)
    if failed > MAX_FAILED_FRACTION * len(results):
        raise NumericalError(f"{failed} of {len(results)} perturbed replications failed")
    return _summarize("perturbation", baseline, values, failed, keep_changes,
                      {"perturbed_entries": perturbed_count(spec, data.returns.size)})


def sensitivity_binning(data: ReturnMatrix, bin_count="auto", grid_size=50,
                        cfg: OptimizerConfig = OptimizerConfig(), offsets=(-1, 1), jobs=1):
    """Change of the invariant when the bin count moves by each of ``offsets``.

    ``offsets=(0, 0)`` compares the baseline with itself.
    """
    k = resolve_bin_count(bin_count, data.T)
    if k < 3:
        raise DomainError("bin_count must be >= 3")
    baseline = frontier_scan(data, grid_size, replace(cfg, bin_count=k), jobs=jobs).invariant_h2
    values = [frontier_scan(data, grid_size, replace(cfg, bin_count=k + d), jobs=jobs).invariant_h2
              for d in offsets]
    return _summarize("binning", baseline, values, 0, True,
                      {"bin_count": k, "compared_bin_counts": [k + d for d in offsets],
                       "compared_h2": values})
