"""Squared Hellinger distance between a histogram density and a Gaussian.

For a piecewise-constant ``f`` with amplitudes ``O_i`` on ``[a_i, a_{i+1}]``,

    H^2 = 1 - sum_i O_i * integral_{a_i}^{a_{i+1}} sqrt(g(x)) dx,

and for a Gaussian ``g`` with variance ``s2`` the integral of ``sqrt(g)`` has
the closed form ``sqrt(2) s^(1/2) (2 pi)^(1/4) [F(d) - F(c)]`` where ``F`` is
the normal CDF with the same mean and variance ``2 s2``.  ``f`` vanishes
outside its edges, so the Gaussian tails contribute nothing.

:func:`hellinger_sq_quadrature_oracle` recomputes the same quantity by
adaptive Gauss-Kronrod quadrature of ``sqrt(f g)`` and never touches the CDF.
"""

import math

import numpy as np

from .density import EmpiricalDensity, bin_counts
from .errors import DomainError, NumericalError
from .stats_core import NormalTarget, standard_normal_cdf

CLAMP_TOL = 1e-9

_SQRT_CONST = math.sqrt(2.0) * (2.0 * math.pi) ** 0.25


def _sqrt_normal_integrals(edges, mu, sigma_sq):
    # integral of sqrt(g) over each consecutive pair of edges
    scale = 1.0 / math.sqrt(2.0 * sigma_sq)
    cdf = standard_normal_cdf((edges - mu) * scale)
    return _SQRT_CONST * sigma_sq**0.25 * np.diff(cdf)


def sqrt_normal_integral(c, d, target: NormalTarget):
    """Integral of ``sqrt(g)`` over ``[c, d]`` for the Gaussian density ``g``."""
    if c > d:
        raise DomainError(f"empty interval: c={c} > d={d}")
    if c == d:
        return 0.0
    val = _sqrt_normal_integrals(np.array([c, d], dtype=float), target.mu, target.sigma_sq)[0]
    return max(float(val), 0.0)


def _clamp(h2):
    if h2 < -CLAMP_TOL or h2 > 1.0 + CLAMP_TOL:
        raise NumericalError(f"squared Hellinger distance {h2!r} outside [0, 1]; density not normalized?")
    return min(max(h2, 0.0), 1.0)


def hellinger_sq(f: EmpiricalDensity, target: NormalTarget):
    bc = float(np.dot(f.amplitudes, _sqrt_normal_integrals(f.edges, target.mu, target.sigma_sq)))
    return _clamp(1.0 - bc)


def binned_hellinger_sq(series, bin_count, mu, sigma_sq):
    """``hellinger_sq(bin_density(series, bin_count), NormalTarget(mu, sigma_sq))`` without the objects.

    This is the optimizer's inner loop; ``bin_count`` must already be an integer.
    """
    edges, counts = bin_counts(series, bin_count)
    amps = np.sqrt(counts / (series.size * np.diff(edges)))
    return _clamp(1.0 - float(np.dot(amps, _sqrt_normal_integrals(edges, mu, sigma_sq))))


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss points are the odd-indexed Kronrod points (1, 3, 5, 7 from either end).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]


def gauss_kronrod(func, lo, hi):
    """G7/K15 rule on each interval ``[lo[j], hi[j]]``; returns ``(kronrod, |kronrod - gauss|)``.

    ``func`` maps an array of points of shape ``(m, 15)`` to values of the
    same shape, where row ``j`` belongs to interval ``j``.
    """
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * KRONROD_NODES[None, :]
    y = func(x)
    k = half * (y @ KRONROD_WEIGHTS)
    g = half * (y @ GAUSS_WEIGHTS)
    return k, np.abs(k - g)


def hellinger_sq_quadrature_oracle(f: EmpiricalDensity, target: NormalTarget, tol=1e-10, max_intervals=200_000):
    """``1 - integral sqrt(f g)`` by adaptive Gauss-Kronrod quadrature, bin by bin.

    Each interval is accepted once its error estimate is below its share of
    ``tol`` (proportional to its length), otherwise it is bisected.
    """
    if not tol >= 1e-10:
        raise DomainError(f"tol must be >= 1e-10, got {tol}")
    mu, s2 = target.mu, target.sigma_sq
    norm = 1.0 / (s2**0.25 * (2.0 * math.pi) ** 0.25)
    inv4 = 1.0 / (4.0 * s2)

    lo = f.edges[:-1].copy()
    hi = f.edges[1:].copy()
    amp = f.amplitudes.copy()
    keep = amp > 0
    lo, hi, amp = lo[keep], hi[keep], amp[keep]
    total_len = float(f.edges[-1] - f.edges[0])

    total = 0.0
    used = lo.size
    while lo.size:
        a = amp

        def integrand(x, a=a):
            return a[:, None] * norm * np.exp(-((x - mu) ** 2) * inv4)

        val, err = gauss_kronrod(integrand, lo, hi)
        ok = err <= tol * (hi - lo) / total_len
        # an interval too short to split further is accepted as is
        ok |= (hi - lo) <= 4 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi))
        total += float(np.sum(val[ok]))
        lo, hi, amp = lo[~ok], hi[~ok], amp[~ok]
        if lo.size:
            mid = 0.5 * (lo + hi)
            lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
            amp = np.concatenate([amp, amp])
            used += lo.size
            if used > max_intervals:
                raise NumericalError(f"quadrature did not reach tol={tol} within {max_intervals} intervals",
                                     best=1.0 - total)
    return 1.0 - total
