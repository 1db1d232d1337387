"""Ensemble statistics and surrogate comparison metrics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

__all__ = [
    "EnsembleMatrix",
    "SobolResult",
    "StatsReport",
    "KsResult",
    "ensemble_moments",
    "ensemble_covariance",
    "covariance_to_correlation",
    "martinez_sobol",
    "silverman_bandwidth",
    "kde_pdf",
    "ks_critical_value",
    "kolmogorov_sf",
    "ks_two_sample",
    "q2",
    "rmse",
]


@dataclass(frozen=True, eq=False)
class EnsembleMatrix:
    """``(n, M)`` outputs of one evaluator, tagged with where they came from."""

    values: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.shape[0] < 2:
            raise ValueError("an ensemble needs at least two members")
        if not np.all(np.isfinite(v)):
            raise ValueError("ensemble contains non-finite values")
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True, eq=False)
class SobolResult:
    """First-order and total indices, shape ``(M, d)``.

    Confidence bounds, when present, have shape ``(M, d, 2)``.
    """

    first: np.ndarray
    total: np.ndarray
    names: tuple[str, ...] = ()
    method: str = ""
    first_ci: np.ndarray | None = None
    total_ci: np.ndarray | None = None
    n_evals: int = 0

    @property
    def interaction(self) -> np.ndarray:
        """Variance share not explained by first-order effects."""
        return 1.0 - self.first.sum(axis=1)

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "names": list(self.names),
            "first": self.first.tolist(),
            "total": self.total.tolist(),
            "n_evals": self.n_evals,
        }
        if self.first_ci is not None:
            d["first_ci"] = self.first_ci.tolist()
            d["total_ci"] = self.total_ci.tolist()
        return d


# -- moments -------------------------------------------------------------------


def _as_matrix(H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.ndim == 1:
        H = H[:, None]
    if H.shape[0] < 2:
        raise ValueError("at least two ensemble members are required")
    return H


def ensemble_moments(H) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and unbiased STD."""
    H = _as_matrix(H)
    return H.mean(axis=0), H.std(axis=0, ddof=1)


def ensemble_covariance(H) -> np.ndarray:
    """Unbiased ``(M, M)`` sample covariance with ``n - 1`` divisor."""
    H = _as_matrix(H)
    A = H - H.mean(axis=0)
    C = A.T @ A / (H.shape[0] - 1)
    return 0.5 * (C + C.T)


def covariance_to_correlation(C) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    std = np.sqrt(np.diag(C))
    zero = std == 0
    if np.any(zero):
        warnings.warn(
            f"columns {np.flatnonzero(zero).tolist()} have zero variance; correlation undefined",
            RuntimeWarning,
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        R = C / np.outer(std, std)
    R = np.clip(R, -1.0, 1.0)
    R[zero, :] = np.nan
    R[:, zero] = np.nan
    np.fill_diagonal(R, np.where(zero, np.nan, 1.0))
    return R


# -- Sobol' indices by pick-freeze -----------------------------------------------


def _column_corr(x, y):
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.sum(xc * yc, axis=0) / np.sqrt(np.sum(xc**2, axis=0) * np.sum(yc**2, axis=0))


def martinez_sobol(evaluator, space, n: int, seed: int, confidence: float = 0.95) -> SobolResult:
    """Martinez correlation estimator of first-order and total Sobol' indices.

    Two independent ``(n, d)`` samples ``A`` and ``B`` are drawn from
    ``space``; ``C_i`` is ``A`` with column ``i`` taken from ``B``. Then

    - ``S_i  = corr(f(B), f(C_i))``  (only ``x_i`` shared)
    - ``S_Ti = 1 - corr(f(A), f(C_i))``  (everything but ``x_i`` shared)

    Confidence intervals use the Fisher z-transform of each correlation.
    The evaluator is called once on ``n (d + 2)`` stacked rows.
    """
    from .sampling import mc_sample

    if n < 100:
        raise ValueError("the Martinez estimator needs n >= 100")
    d = space.dim
    AB = mc_sample(space, 2 * n, seed)
    A, B = AB[:n], AB[n:]
    blocks = [A, B]
    for i in range(d):
        C = A.copy()
        C[:, i] = B[:, i]
        blocks.append(C)
    Y = np.asarray(evaluator(np.vstack(blocks)), dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    yA, yB = Y[:n], Y[n : 2 * n]
    M = Y.shape[1]

    zero = (np.ptp(yA, axis=0) == 0) | (np.ptp(yB, axis=0) == 0)
    if np.any(zero):
        warnings.warn(
            f"outputs {np.flatnonzero(zero).tolist()} have zero variance; Sobol' indices undefined",
            RuntimeWarning,
            stacklevel=2,
        )

    zq = ndtri(0.5 + confidence / 2.0)
    half = zq / math.sqrt(n - 3)
    first = np.empty((M, d))
    total = np.empty((M, d))
    first_ci = np.empty((M, d, 2))
    total_ci = np.empty((M, d, 2))
    for i in range(d):
        yC = Y[(2 + i) * n : (3 + i) * n]
        r1 = _column_corr(yB, yC)
        r2 = _column_corr(yA, yC)
        first[:, i] = r1
        total[:, i] = 1.0 - r2
        z1 = np.arctanh(np.clip(r1, -1 + 1e-15, 1 - 1e-15))
        z2 = np.arctanh(np.clip(r2, -1 + 1e-15, 1 - 1e-15))
        first_ci[:, i, 0] = np.tanh(z1 - half)
        first_ci[:, i, 1] = np.tanh(z1 + half)
        total_ci[:, i, 0] = 1.0 - np.tanh(z2 + half)
        total_ci[:, i, 1] = 1.0 - np.tanh(z2 - half)
    for arr in (first, total, first_ci, total_ci):
        arr[zero] = np.nan
    return SobolResult(
        first=first,
        total=total,
        names=tuple(space.names),
        method="martinez",
        first_ci=first_ci,
        total_ci=total_ci,
        n_evals=n * (d + 2),
    )


# -- densities -------------------------------------------------------------------


def silverman_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=float).ravel()
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return 1.06 * spread * x.size ** (-0.2)


def kde_pdf(samples, grid=None, n_points: int = 512, bandwidth: float | None = None):
    """Gaussian kernel density estimate with Silverman's bandwidth.

    Without ``grid``, ``n_points`` evenly spaced points cover
    ``[min - 3 bw, max + 3 bw]``. Returns ``(grid, density)``. A sample with
    zero spread triggers a warning and a narrow spike at its value.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    bw = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not bw > 0:
        warnings.warn("degenerate sample with zero spread", RuntimeWarning, stacklevel=2)
        bw = 1e-6 * max(1.0, abs(x[0]))
    if grid is None:
        grid = np.linspace(x.min() - 3 * bw, x.max() + 3 * bw, n_points)
    grid = np.asarray(grid, dtype=float)
    dens = np.zeros_like(grid)
    norm = 1.0 / (x.size * bw * math.sqrt(2 * math.pi))
    for chunk in np.array_split(x, max(1, x.size // 4096)):
        u = (grid[:, None] - chunk[None, :]) / bw
        dens += np.exp(-0.5 * u * u).sum(axis=1)
    return grid, dens * norm


# -- Kolmogorov-Smirnov ------------------------------------------------------------

# two-sample c(alpha) table (Smirnov), two-sided
_KS_TABLE = {0.10: 1.22, 0.05: 1.36, 0.025: 1.48, 0.01: 1.63, 0.005: 1.73, 0.001: 1.95}


def ks_critical_value(alpha: float) -> float:
    """Tabulated ``c(alpha)``; off-table levels use ``sqrt(-ln(alpha/2) / 2)``."""
    for level, c in _KS_TABLE.items():
        if math.isclose(alpha, level):
            return c
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the asymptotic Kolmogorov distribution."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # Jacobi theta form converges fast for small arguments
        k = np.arange(1, 40)
        cdf = math.sqrt(2 * math.pi) / lam * np.sum(np.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8 * lam**2)))
        return float(min(1.0, max(0.0, 1.0 - cdf)))
    k = np.arange(1, 101)
    return float(min(1.0, max(0.0, 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * lam**2)))))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    pvalue: float
    threshold: float
    reject: bool
    n: int
    m: int
    alpha: float

    def to_dict(self) -> dict:
        return {
            "D": self.statistic,
            "p_value": self.pvalue,
            "threshold": self.threshold,
            "reject": self.reject,
            "n": self.n,
            "m": self.m,
            "alpha": self.alpha,
        }


def ks_two_sample(sample_a, sample_b, alpha: float = 0.05) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test.

    ``D`` is the exact supremum of the ECDF gap over the merged sample. The
    null hypothesis is rejected when ``D > c(alpha) sqrt((n + m) / (n m))``;
    the p-value is asymptotic.
    """
    a = np.sort(np.asarray(sample_a, dtype=float).ravel())
    b = np.sort(np.asarray(sample_b, dtype=float).ravel())
    n, m = a.size, b.size
    if n < 1 or m < 1:
        raise ValueError("both samples must be non-empty")
    merged = np.concatenate([a, b])
    Fa = np.searchsorted(a, merged, side="right") / n
    Fb = np.searchsorted(b, merged, side="right") / m
    D = float(np.max(np.abs(Fa - Fb)))
    threshold = ks_critical_value(alpha) * math.sqrt((n + m) / (n * m))
    pvalue = kolmogorov_sf(D * math.sqrt(n * m / (n + m)))
    return KsResult(D, pvalue, threshold, bool(D > threshold), n, m, alpha)


# -- accuracy metrics --------------------------------------------------------------


def q2(reference, predicted) -> tuple[np.ndarray, float]:
    """Predictive coefficient per column and its mean over columns.

    Columns with zero reference variance give NaN with a warning.
    """
    ref = _as_matrix(reference)
    pred = np.asarray(predicted, dtype=float).reshape(ref.shape)
    num = np.sum((ref - pred) ** 2, axis=0)
    den = np.sum((ref - ref.mean(axis=0)) ** 2, axis=0)
    zero = den == 0
    if np.any(zero):
        warnings.warn(
            f"columns {np.flatnonzero(zero).tolist()} have zero reference variance; Q2 undefined",
            RuntimeWarning,
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        per = 1.0 - num / den
    per[zero] = np.nan
    return per, float(np.mean(per))


def rmse(values, reference) -> float:
    """Root mean square difference over all entries (vectors or matrices)."""
    v = np.asarray(values, dtype=float)
    r = np.asarray(reference, dtype=float)
    if v.shape != r.shape:
        raise ValueError(f"shape mismatch {v.shape} vs {r.shape}")
    return float(np.sqrt(np.mean((v - r) ** 2)))


# -- report ------------------------------------------------------------------------


@dataclass(eq=False)
class StatsReport:
    """Statistics of one ensemble, plus metrics against a reference if given."""

    label: str
    mean: np.ndarray
    std: np.ndarray
    covariance: np.ndarray
    correlation: np.ndarray
    sobol: SobolResult | None = None
    pdfs: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    @classmethod
    def from_ensemble(cls, label, H, sobol=None, pdf_stations=(), grids=None) -> "StatsReport":
        H = _as_matrix(H)
        mean, std = ensemble_moments(H)
        C = ensemble_covariance(H)
        pdfs = {}
        for j in pdf_stations:
            grid = None if grids is None else grids.get(j)
            pdfs[j] = kde_pdf(H[:, j], grid=grid)
        return cls(label, mean, std, C, covariance_to_correlation(C), sobol, pdfs)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "covariance": self.covariance.tolist(),
            "correlation": self.correlation.tolist(),
            "sobol": None if self.sobol is None else self.sobol.to_dict(),
            "metrics": self.metrics,
        }
