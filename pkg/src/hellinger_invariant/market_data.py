"""Price CSV ingestion and the simulated Student-t market."""

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng
from .errors import DomainError, NumericalError, ParseError


@dataclass(frozen=True)
class ReturnMatrix:
    """T x n matrix of one-period log-returns, columns in label order."""

    labels: tuple
    returns: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=float)
        if r.ndim != 2:
            raise DomainError("returns must be a 2-D matrix")
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        object.__setattr__(self, "returns", r)
        if len(self.labels) != r.shape[1]:
            raise DomainError(f"{len(self.labels)} labels for {r.shape[1]} columns")
        if r.shape[1] < 1 or r.shape[0] < 1:
            raise DomainError("need at least one asset and one observation")
        if not np.all(np.isfinite(r)):
            raise DomainError("returns contain non-finite values")

    @property
    def T(self):
        return self.returns.shape[0]

    @property
    def n(self):
        return self.returns.shape[1]


@dataclass(frozen=True)
class PriceCsvFormat:
    """Column-name and delimiter overrides for :func:`load_prices`.

    ``columns`` restricts (and orders) the price columns; ``None`` takes every
    column except the date column.
    """

    date_column: str = "date"
    columns: Optional[Sequence[str]] = None
    delimiter: str = ","


@dataclass(frozen=True)
class SimulationSpec:
    """Degrees of freedom per asset, observation count and root seed.

    A degree of freedom of ``math.inf`` gives an exactly Gaussian column that
    shares its normal draws with the Student-t column at the same position,
    so a Gaussian market and a Student-t market simulated with the same seed
    are paired.
    """

    degrees_of_freedom: tuple
    observations: int = 810
    seed: int = 0

    def __post_init__(self):
        dfs = tuple(self.degrees_of_freedom)
        if not dfs:
            raise DomainError("at least one degree of freedom is required")
        for d in dfs:
            if not (d == math.inf or (float(d) == int(d) and d >= 1)):
                raise DomainError(f"degrees of freedom must be integers >= 1 or inf, got {d}")
        object.__setattr__(self, "degrees_of_freedom", dfs)
        if int(self.observations) < 2:
            raise DomainError("observations must be >= 2")
        rng.check_seed(self.seed)


def load_prices(csv_source, fmt: PriceCsvFormat = PriceCsvFormat()) -> ReturnMatrix:
    """Read a price CSV and return its log-returns.

    ``csv_source`` is a binary or text stream, a path, or raw bytes.  Rows
    are sorted by date before differencing.
    """
    text = _read_text(csv_source)
    reader = csv.reader(io.StringIO(text), delimiter=fmt.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV", row=1) from None
    header = [h.strip() for h in header]
    if fmt.date_column not in header:
        raise ParseError(f"missing date column {fmt.date_column!r}", row=1)
    date_idx = header.index(fmt.date_column)
    if fmt.columns is None:
        cols = [h for h in header if h != fmt.date_column]
    else:
        cols = list(fmt.columns)
        for c in cols:
            if c not in header:
                raise ParseError("missing price column", row=1, column=c)
    if not cols:
        raise ParseError("no price columns", row=1)
    col_idx = [header.index(c) for c in cols]

    dates, prices, seen = [], [], {}
    for rownum, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=rownum)
        try:
            d = dt.date.fromisoformat(row[date_idx].strip())
        except ValueError:
            raise ParseError("bad ISO-8601 date", row=rownum, column=fmt.date_column) from None
        if d in seen:
            raise ParseError(f"duplicate date {d} (first at row {seen[d]})", row=rownum)
        seen[d] = rownum
        vals = []
        for c, j in zip(cols, col_idx):
            cell = row[j].strip()
            if not cell:
                raise DomainError(f"missing value at row {rownum}, column {c!r}")
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=rownum, column=c) from None
            if not math.isfinite(v) or v <= 0:
                raise DomainError(f"non-positive price {cell} at row {rownum}, column {c!r}")
            vals.append(v)
        dates.append(d)
        prices.append(vals)
    if len(prices) < 2:
        raise ParseError("need at least two data rows")
    order = sorted(range(len(dates)), key=dates.__getitem__)
    p = np.asarray(prices)[order]
    return ReturnMatrix(tuple(cols), np.log(p[1:] / p[:-1]))


def _read_text(src):
    if isinstance(src, (bytes, bytearray)):
        data = bytes(src)
    elif isinstance(src, (str,)) or hasattr(src, "__fspath__"):
        with open(src, "rb") as fh:
            data = fh.read()
    else:
        data = src.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from None
    return data


def write_prices(data: ReturnMatrix, stream, start=dt.date(2000, 1, 1), initial=100.0):
    """Write ``data`` as a price CSV that :func:`load_prices` reads back.

    Dates are consecutive calendar days from ``start``; prices start at
    ``initial`` and compound the log-returns.
    """
    levels = initial * np.exp(np.vstack([np.zeros(data.n), np.cumsum(data.returns, axis=0)]))
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["date", *data.labels])
    for t, row in enumerate(levels):
        w.writerow([(start + dt.timedelta(days=t)).isoformat(), *(format(v, ".17g") for v in row)])


def random_correlation(n: int, seed: int) -> np.ndarray:
    """Random positive-definite correlation matrix.

    ``G = A A^T + n I`` with standard normal ``A``, rescaled to unit diagonal.
    The ridge bounds the smallest eigenvalue of ``G`` below by ``n``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    a = rng.stream(seed, "correlation").standard_normal((n, n))
    g = a @ a.T + n * np.eye(n)
    d = 1.0 / np.sqrt(np.diag(g))
    c = g * d[:, None] * d[None, :]
    c = np.triu(c, 1)
    c = c + c.T
    np.fill_diagonal(c, 1.0)
    return c


def simulate_student_market(spec: SimulationSpec, correlation=None) -> ReturnMatrix:
    """Correlated Student-t returns ``x_t = L z_t``.

    ``L`` is the Cholesky factor of :func:`random_correlation` (or of
    ``correlation`` when given, a test hook), and each ``z_t`` holds
    independent Student-t variates ``N(0,1) / sqrt(chi2_nu / nu)``.
    """
    dfs = spec.degrees_of_freedom
    n, T = len(dfs), int(spec.observations)
    corr = random_correlation(n, spec.seed) if correlation is None else np.asarray(correlation, float)
    try:
        chol = np.linalg.cholesky(corr)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"correlation matrix is not positive definite: {exc}") from None
    g = rng.stream(spec.seed, "student")
    z = g.standard_normal((T, n))
    for j, nu in enumerate(dfs):
        # every column consumes its chi-square draws so Gaussian and t markets stay paired
        chi2 = g.chisquare(1.0 if nu == math.inf else nu, size=T)
        if nu != math.inf:
            z[:, j] /= np.sqrt(chi2 / nu)
    x = z @ chol.T
    labels = tuple(f"t{d}_{j}" if d != math.inf else f"normal_{j}" for j, d in enumerate(dfs))
    return ReturnMatrix(labels, x)
