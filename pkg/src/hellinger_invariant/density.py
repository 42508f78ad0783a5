"""Portfolio return series and their equal-width histogram densities."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class EmpiricalDensity:
    """Piecewise-constant density ``f(x) = amplitudes[i]**2`` on ``[edges[i], edges[i+1])``.

    ``counts`` is kept for diagnostics and is ``None`` for densities built by hand.
    """

    edges: np.ndarray
    amplitudes: np.ndarray
    counts: np.ndarray = None

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        o = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "amplitudes", o)
        if e.ndim != 1 or o.ndim != 1 or e.size != o.size + 1 or o.size < 1:
            raise DomainError("need m+1 edges for m amplitudes")
        if not np.all(np.diff(e) > 0):
            raise DomainError("edges must be strictly increasing")
        if not (np.all(np.isfinite(o)) and np.all(o >= 0)):
            raise DomainError("amplitudes must be finite and non-negative")

    @property
    def widths(self):
        return np.diff(self.edges)

    def mass(self):
        return float(np.sum(self.amplitudes**2 * self.widths))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.edges, x, side="right") - 1
        idx[x == self.edges[-1]] = self.amplitudes.size - 1
        inside = (idx >= 0) & (idx < self.amplitudes.size)
        out = np.zeros_like(x)
        out[inside] = self.amplitudes[idx[inside]] ** 2
        return out


def auto_bin_count(T):
    return max(2, math.ceil(math.sqrt(T)))


def resolve_bin_count(bin_count, T):
    if bin_count in (None, "auto"):
        return auto_bin_count(T)
    k = int(bin_count)
    if k < 2:
        raise DomainError(f"bin_count must be >= 2, got {bin_count}")
    return k


def portfolio_series(data, w):
    """Per-period portfolio returns ``returns @ w``."""
    x = np.asarray(getattr(data, "returns", data), dtype=float)
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size != x.shape[1]:
        raise DomainError(f"weights have length {w.size}, market has {x.shape[1]} assets")
    return x @ w


def bin_counts(series, bin_count):
    """Equal-width edges over the sample range and the count in each bin.

    Bins are half-open ``[a_i, a_{i+1})`` except the last, which also owns
    the maximum.
    """
    lo = series.min()
    hi = series.max()
    if not hi > lo:
        raise DomainError("zero-width support: all series values are equal")
    edges = np.linspace(lo, hi, bin_count + 1)
    idx = ((series - lo) * (bin_count / (hi - lo))).astype(np.intp)
    np.minimum(idx, bin_count - 1, out=idx)
    # the arithmetic guess can be one bin off near an edge; settle it against the edges
    idx -= series < edges[idx]
    idx += series >= edges[idx + 1]
    np.minimum(idx, bin_count - 1, out=idx)
    return edges, np.bincount(idx, minlength=bin_count)


def bin_density(series, bin_count="auto") -> EmpiricalDensity:
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size < 2:
        raise DomainError("series must be a vector of length >= 2")
    k = resolve_bin_count(bin_count, series.size)
    edges, counts = bin_counts(series, k)
    amps = np.sqrt(counts / (series.size * np.diff(edges)))
    return EmpiricalDensity(edges, amps, counts)
