"""Minimum-Hellinger portfolios along the efficient frontier.

At each target return ``e`` the comparison Gaussian is ``N(e, v(e))`` with
``v(e)`` the long-only minimum variance at ``e``.  The portfolio minimizing
the binned squared Hellinger distance to that Gaussian is searched over the
same feasible set by multi-start compass search; the market invariant is
the smallest of these minima over a grid of ``e``.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from . import rng
from .density import resolve_bin_count
from .errors import DomainError, InvariantError, NumericalError
from .hellinger import binned_hellinger_sq
from .markowitz import (
    FrontierPoint,
    _constraints,
    _null_space,
    _snap_return,
    feasible_return_range,
    simplex_qp,
    solve_min_variance,
    straddle_point,
)
from .stats_core import NormalTarget, sample_mean_cov

MIN_SUCCESS_FRACTION = 0.9


@dataclass(frozen=True)
class OptimizerConfig:
    """Compass-search and binning settings.

    ``multistart_count=None`` uses every structured start (Markowitz weights,
    centroid, vertices of the feasible slice), topped up with seeded random
    feasible points to at least ``n + 2`` starts.
    """

    multistart_count: Optional[int] = None
    max_iterations: int = 2000
    initial_step: float = 0.25
    step_shrink: float = 0.5
    convergence_step: float = 1e-3
    bin_count: Union[int, str] = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.multistart_count is not None and self.multistart_count < 1:
            raise DomainError("multistart_count must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be positive")
        if not 0 < self.convergence_step < self.initial_step:
            raise DomainError("need 0 < convergence_step < initial_step")
        if not 0 < self.step_shrink < 1:
            raise DomainError("step_shrink must lie in (0, 1)")
        if self.bin_count != "auto" and int(self.bin_count) < 2:
            raise DomainError("bin_count must be 'auto' or an integer >= 2")
        rng.check_seed(self.seed)

    def to_dict(self):
        return asdict(self)


@dataclass
class InvariantReport:
    market_label: str
    frontier: list
    invariant_h2: float
    argmin_e: float
    config_echo: dict = field(default_factory=dict)


class _Slice:
    """Affine part ``{sum w = 1, mean.w = e}`` of the feasible set at one ``e``."""

    def __init__(self, mean, e):
        self.mean = np.asarray(mean, dtype=float)
        self.e = _snap_return(self.mean, e)
        a, b = _constraints(self.mean, self.e)
        self.a, self.b = a, b
        self.origin = straddle_point(self.mean, self.e)
        z = _null_space(a)
        # projected coordinate directions: columns of the null-space projector
        self.directions = z @ z.T
        self._z = z

    def affine_projection(self, v):
        return self.origin + self._z @ (self._z.T @ (v - self.origin))

    def project(self, v, support=None):
        y = self.affine_projection(v)
        if y.min() >= 0.0:
            return y
        w = self._support_newton(v, y > 0 if support is None else support)
        if w is not None:
            return w
        n = v.size
        return simplex_qp(np.eye(n), -v, self.mean, self.e)

    def _support_newton(self, v, support, max_iter=20):
        # The projection is w = max(0, v - A'lam) for the right multipliers
        # lam.  Guess the support, solve for lam on it, accept when the KKT
        # signs agree, otherwise re-guess the support from the signs.
        a, b = self.a, self.b
        seen = set()
        for _ in range(max_iter):
            key = support.tobytes()
            if key in seen or not support.any():
                return None
            seen.add(key)
            a_s = a[:, support]
            gram = a_s @ a_s.T
            if abs(np.linalg.det(gram)) <= 1e-12 * max(1.0, np.abs(gram).max()) ** gram.shape[0]:
                return None
            lam = np.linalg.solve(gram, a_s @ v[support] - b)
            r = v - a.T @ lam
            new_support = r > 0
            if np.array_equal(new_support, support) or (
                    np.all(r[support] >= 0) and np.all(r[~support] <= 0)):
                w = np.where(support, np.maximum(r, 0.0), 0.0)
                return w
            support = new_support
        return None


def project_to_constraint_set(w_raw, mean, e):
    """Euclidean projection of ``w_raw`` onto ``{w >= 0, sum w = 1, mean.w = e}``.

    When the projection onto the affine hull is already non-negative it is the
    answer.  Otherwise the support of the projection is found by a few
    Newton steps on the two multipliers, with the exact active-set QP as the
    fallback.  :func:`dykstra_projection` computes the same point by
    alternating projections.
    """
    w_raw = np.asarray(w_raw, dtype=float)
    if w_raw.size != np.asarray(mean).size:
        raise DomainError("w_raw and mean differ in length")
    return _Slice(mean, e).project(w_raw)


def dykstra_projection(w_raw, mean, e, tol=1e-10, max_iter=2_000_000):
    """Same projection by Dykstra's alternating projections (affine hull / orthant).

    Slow but independent of the active-set code; used to cross-check it.
    """
    sl = _Slice(mean, e)
    x = np.asarray(w_raw, dtype=float).copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(max_iter):
        y = sl.affine_projection(x + p)
        p = x + p - y
        x_new = np.maximum(y + q, 0.0)
        q = y + q - x_new
        if np.abs(x_new - x).max() < tol and np.abs(sl.a @ x_new - sl.b).max() < tol:
            return x_new
        x = x_new
    raise NumericalError("alternating projection did not converge", best=x)


def _vertices(mean, e):
    """Vertices of the feasible slice: two-asset mixes straddling ``e`` and assets with mean ``e``."""
    n = mean.size
    out = []
    for i in range(n):
        if mean[i] == e:
            w = np.zeros(n)
            w[i] = 1.0
            out.append(w)
    for i in range(n):
        for j in range(n):
            if mean[i] < e < mean[j]:
                w = np.zeros(n)
                t = (e - mean[i]) / (mean[j] - mean[i])
                w[i], w[j] = 1.0 - t, t
                out.append(w)
    return out


def starting_points(sl, mv_weights, cfg):
    """Ordered, de-duplicated start list; a smaller ``multistart_count`` takes a prefix."""
    n = sl.mean.size
    if cfg.multistart_count is None:
        structured = 2 + len(_vertices(sl.mean, sl.e))
        want = max(n + 2, structured)
    else:
        want = cfg.multistart_count

    starts = []

    def add(w):
        if len(starts) < want and all(np.abs(w - s).max() > 1e-12 for s in starts):
            starts.append(w)

    if mv_weights is not None:
        add(np.asarray(mv_weights, dtype=float))
    add(sl.project(np.full(n, 1.0 / n)))
    for v in _vertices(sl.mean, sl.e):
        add(v)
    g = rng.stream(cfg.seed, "multistart")
    tries = 0
    while len(starts) < want and tries < 50 * want:
        add(sl.project(g.dirichlet(np.ones(n))))
        tries += 1
    return starts


def compass_search(objective, w0, sl, cfg):
    """Projected compass search from ``w0``; returns ``(w, value)``.

    Polls ``w +/- step * e_i`` (re-projected) for each coordinate ``i`` in a
    fixed order and moves to the first improvement.  The step shrinks by
    ``step_shrink`` whenever no poll improves.
    """
    w = w0
    f = objective(w)
    n = w.size
    step = cfg.initial_step
    polls = [(i, s) for i in range(n) for s in (1.0, -1.0)
             if np.abs(sl.directions[:, i]).max() > 1e-14]
    for _ in range(cfg.max_iterations):
        if step < cfg.convergence_step or not polls:
            break
        moved = False
        for i, sign in polls:
            cand = w + (sign * step) * sl.directions[:, i]
            if cand.min() < 0.0:
                raw = w.copy()
                raw[i] += sign * step
                cand = sl.project(raw)
            if np.abs(cand - w).max() <= 1e-15:
                continue
            fc = objective(cand)
            if fc < f:
                w, f = cand, fc
                moved = True
                break
        if not moved:
            step *= cfg.step_shrink
    return w, f


def _objective(returns, bins, target):
    mu, s2 = target.mu, target.sigma_sq

    def f(w):
        try:
            return binned_hellinger_sq(returns @ w, bins, mu, s2)
        except DomainError:
            return math.inf

    return f


def solve_min_hellinger(data, e, target: NormalTarget, cfg: OptimizerConfig = OptimizerConfig(),
                        mv_weights=None):
    """Best feasible ``w`` for the binned distance to ``target``; returns ``(w, h2)``."""
    returns = np.asarray(getattr(data, "returns", data), dtype=float)
    mean = returns.mean(axis=0)
    sl = _Slice(mean, e)
    bins = resolve_bin_count(cfg.bin_count, returns.shape[0])
    obj = _objective(returns, bins, target)
    best_w, best_f = None, math.inf
    for w0 in starting_points(sl, mv_weights, cfg):
        w, f = compass_search(obj, w0, sl, cfg)
        if f < best_f:
            best_w, best_f = w, f
    if best_w is None:
        raise DomainError(f"portfolio series has zero spread at every start (e={e})")
    return np.maximum(best_w, 0.0), best_f


def return_grid(mean, grid_size):
    lo, hi = feasible_return_range(mean)
    if hi - lo <= 1e-12 * max(1.0, abs(lo), abs(hi)):
        return np.array([lo])
    if grid_size < 2:
        raise DomainError("grid_size must be >= 2 when the attainable range is not a point")
    shrink = 1e-9 * (hi - lo)
    return np.linspace(lo + shrink, hi - shrink, grid_size)


def _frontier_point(args):
    returns, mean, cov, e, cfg = args
    pt = FrontierPoint(float(e))
    try:
        w_mv, var = solve_min_variance(mean, cov, e)
        pt.mv_weights, pt.mv_variance = w_mv, var
        w_h, h2 = solve_min_hellinger(returns, e, NormalTarget(float(e), var), cfg, mv_weights=w_mv)
        pt.hellinger_weights, pt.hellinger_sq_min = w_h, h2
    except InvariantError as exc:
        pt.error = f"{type(exc).__name__}: {exc}"
    return pt


def frontier_scan(data, grid_size=50, cfg: OptimizerConfig = OptimizerConfig(), jobs=1, label=None):
    """Scan an evenly spaced grid of target returns and extract the invariant.

    Grid endpoints sit ``1e-9 * range`` inside the attainable range.  Failed
    points are dropped if at least 90% succeed, otherwise the scan raises.
    Ties in the minimum go to the smaller return.
    """
    returns = np.asarray(getattr(data, "returns", data), dtype=float)
    if label is None:
        label = "market"
    mean, cov = sample_mean_cov(returns)
    grid = return_grid(mean, grid_size)
    tasks = [(returns, mean, cov, e, cfg) for e in grid]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            frontier = list(pool.map(_frontier_point, tasks))
    else:
        frontier = [_frontier_point(t) for t in tasks]

    ok = [p for p in frontier if not p.failed]
    if len(ok) < MIN_SUCCESS_FRACTION * len(frontier):
        first = next(p for p in frontier if p.failed)
        raise NumericalError(f"{len(frontier) - len(ok)} of {len(frontier)} frontier points failed; "
                             f"first at e={first.target_return}: {first.error}")
    values = np.array([p.hellinger_sq_min for p in ok])
    k = int(np.argmin(values))
    echo = {
        "grid_size": int(grid_size),
        "grid_points": int(len(grid)),
        "bin_count": resolve_bin_count(cfg.bin_count, returns.shape[0]),
        "optimizer": cfg.to_dict(),
    }
    return InvariantReport(label, frontier, float(values[k]), ok[k].target_return, echo)
