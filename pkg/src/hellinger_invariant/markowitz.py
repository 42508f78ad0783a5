"""Long-only minimum-variance portfolios at a fixed expected return.

Both the mean-variance problem and the Euclidean projection used by the
Hellinger optimizer are small convex QPs over the same polytope

    { w : w >= 0, sum(w) = 1, mean . w = e },

so they share :func:`simplex_qp`, a primal active-set method.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError

FEAS_TOL = 1e-12
KKT_TOL = 1e-8
WEIGHT_FLOOR = -1e-10


@dataclass
class FrontierPoint:
    """Results at one target return ``e`` of the frontier grid."""

    target_return: float
    mv_weights: np.ndarray = None
    mv_variance: float = None
    hellinger_weights: np.ndarray = None
    hellinger_sq_min: float = None
    error: str = None

    @property
    def failed(self):
        return self.error is not None


def feasible_return_range(mean):
    mean = np.asarray(mean, dtype=float)
    if mean.size < 1:
        raise DomainError("need at least one asset")
    return float(mean.min()), float(mean.max())


def check_weights(w, mean=None, e=None, mean_tol=1e-8):
    """Raise :class:`DomainError` unless ``w`` is long-only, fully invested and hits ``e``."""
    w = np.asarray(w, dtype=float)
    if w.min() < WEIGHT_FLOOR:
        raise DomainError(f"negative weight {w.min()}")
    if abs(w.sum() - 1.0) > 1e-9:
        raise DomainError(f"weights sum to {w.sum()}")
    if mean is not None and abs(float(np.dot(w, mean)) - e) > mean_tol:
        raise DomainError(f"expected return {np.dot(w, mean)} != {e}")
    return w


def _constraints(mean, e):
    """Equality rows ``A w = b``; the return row is dropped when all means coincide."""
    mean = np.asarray(mean, dtype=float)
    n = mean.size
    spread = mean.max() - mean.min()
    if spread <= FEAS_TOL * max(1.0, abs(mean).max()):
        return np.ones((1, n)), np.array([1.0])
    return np.vstack([np.ones(n), mean]), np.array([1.0, e])


def straddle_point(mean, e):
    """Feasible start: the two-asset mix of the closest means below and above ``e``."""
    mean = np.asarray(mean, dtype=float)
    lo_set = np.flatnonzero(mean <= e)
    hi_set = np.flatnonzero(mean >= e)
    w = np.zeros(mean.size)
    i = lo_set[np.argmax(mean[lo_set])]
    j = hi_set[np.argmin(mean[hi_set])]
    if i == j or mean[j] == mean[i]:
        w[i] = 1.0
    else:
        t = (e - mean[i]) / (mean[j] - mean[i])
        w[i], w[j] = 1.0 - t, t
    return w


def _snap_return(mean, e):
    lo, hi = feasible_return_range(mean)
    slack = FEAS_TOL * max(1.0, abs(lo), abs(hi))
    if e < lo - slack or e > hi + slack:
        raise DomainError(f"target return {e} outside attainable range [{lo}, {hi}]")
    return min(max(e, lo), hi)


def _null_space(a, tol=1e-12):
    if a.shape[1] == 0:
        return np.zeros((0, 0))
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return vt[rank:].T


def simplex_qp(q, c, mean, e, w0=None, max_iter=200):
    """Minimize ``0.5 w'Qw + c'w`` over long-only, fully invested ``w`` with ``mean.w = e``.

    Primal active-set method started from a feasible point (``w0`` or the
    two-asset straddle).  Zero weights of the start form the initial working
    set; each step solves the equality-constrained subproblem on the free
    weights in a null-space basis, blocks at the first weight to hit zero,
    and releases the bound with the most negative multiplier once the
    subproblem is stationary.
    """
    q = np.asarray(q, dtype=float)
    c = np.asarray(c, dtype=float)
    mean = np.asarray(mean, dtype=float)
    e = _snap_return(mean, e)
    a, b = _constraints(mean, e)
    w = straddle_point(mean, e) if w0 is None else np.array(w0, dtype=float)
    free = w > 0
    scale = max(1.0, float(np.abs(q).max()), float(np.abs(c).max()))

    for _ in range(max_iter):
        g = q @ w + c
        fidx = np.flatnonzero(free)
        z = _null_space(a[:, fidx])
        p = np.zeros_like(w)
        if z.shape[1]:
            reduced = z.T @ q[np.ix_(fidx, fidx)] @ z
            step = -z @ np.linalg.lstsq(reduced, z.T @ g[fidx], rcond=None)[0]
            p[fidx] = step
        if np.abs(p).max() <= 1e-14 * max(1.0, np.abs(w).max()):
            lam = np.linalg.lstsq(a[:, fidx].T, g[fidx], rcond=None)[0]
            mult = g - a.T @ lam
            bound = np.flatnonzero(~free)
            if bound.size == 0 or mult[bound].min() >= -KKT_TOL * scale:
                w = np.maximum(w, 0.0)
                return w
            free[bound[np.argmin(mult[bound])]] = True
            continue
        neg = fidx[p[fidx] < 0]
        alpha, block = 1.0, None
        if neg.size:
            ratios = -w[neg] / p[neg]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha, block = float(ratios[k]), neg[k]
        w = w + alpha * p
        if block is not None:
            w[block] = 0.0
            free[block] = False
    raise NumericalError(f"active-set QP did not converge in {max_iter} iterations", best=np.maximum(w, 0.0))


def ridge_for(cov):
    cov = np.asarray(cov, dtype=float)
    return 1e-12 * float(np.trace(cov)) / cov.shape[0]


def solve_min_variance(mean, cov, e):
    """Long-only minimum-variance weights with ``mean.w = e``; returns ``(w, variance)``.

    A ridge of ``1e-12 * trace(cov) / n`` is added to the diagonal so that
    duplicated assets keep the subproblems nonsingular.  The returned
    variance is evaluated with the original ``cov``.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    n = mean.size
    if cov.shape != (n, n):
        raise DomainError(f"covariance shape {cov.shape} does not match {n} assets")
    if n == 1:
        _snap_return(mean, e)
        return np.ones(1), float(cov[0, 0])
    q = cov + ridge_for(cov) * np.eye(n)
    w = simplex_qp(q, np.zeros(n), mean, e)
    return w, float(w @ cov @ w)
