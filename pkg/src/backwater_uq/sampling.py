"""Input laws, Monte Carlo and Halton designs, and Gaussian quadrature.

Two marginal families are supported. A :class:`Normal` dimension is
standardised by its z-score and pairs with Hermite polynomials; a
:class:`Uniform` dimension is mapped affinely onto ``[-1, 1]`` and pairs with
Legendre polynomials. Quadrature rules are normalised to the *probability*
measure, so weights always sum to one.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "Normal",
    "Uniform",
    "InputSpace",
    "QuadratureRule",
    "garonne_inputs",
    "mc_sample",
    "radical_inverse",
    "halton",
    "halton_design",
    "gauss_hermite",
    "gauss_legendre",
    "gauss_rule",
    "tensor_quadrature",
    "recurrence_coefficients",
    "grid_star_discrepancy",
    "write_design_csv",
    "read_design_csv",
]

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class Normal:
    mean: float
    std: float
    # bounded box used by space-filling designs
    design_bounds: tuple[float, float] | None = None

    family = "hermite"

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("standard deviation must be positive")
        if self.design_bounds is not None and not self.design_bounds[0] < self.design_bounds[1]:
            raise ValueError("design bounds must be increasing")

    @property
    def bounds(self) -> tuple[float, float]:
        if self.design_bounds is not None:
            return tuple(self.design_bounds)
        return (self.mean - 2.5 * self.std, self.mean + 2.5 * self.std)

    def standardize(self, x):
        return (np.asarray(x, dtype=float) - self.mean) / self.std

    def unstandardize(self, z):
        return self.mean + self.std * np.asarray(z, dtype=float)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.mean, self.std, n)

    def to_dict(self) -> dict:
        d = {"law": "normal", "mean": self.mean, "std": self.std}
        if self.design_bounds is not None:
            d["design_bounds"] = list(self.design_bounds)
        return d


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    family = "legendre"

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError("uniform law needs low < high")

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.low, self.high)

    def standardize(self, x):
        x = np.asarray(x, dtype=float)
        return (2.0 * x - (self.low + self.high)) / (self.high - self.low)

    def unstandardize(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * (self.low + self.high) + 0.5 * (self.high - self.low) * z

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, n)

    def to_dict(self) -> dict:
        return {"law": "uniform", "low": self.low, "high": self.high}


def marginal_from_dict(d: dict):
    law = d["law"]
    if law == "normal":
        bounds = d.get("design_bounds")
        return Normal(float(d["mean"]), float(d["std"]), tuple(bounds) if bounds else None)
    if law == "uniform":
        return Uniform(float(d["low"]), float(d["high"]))
    raise ValueError(f"unknown law {law!r}")


@dataclass(frozen=True)
class InputSpace:
    """Product law of independent marginals."""

    marginals: tuple
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        names = tuple(self.names) or tuple(f"x{i + 1}" for i in range(len(self.marginals)))
        if len(names) != len(self.marginals):
            raise ValueError("one name per marginal")
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return len(self.marginals)

    @property
    def families(self) -> tuple[str, ...]:
        return tuple(m.family for m in self.marginals)

    def standardize(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self._check_dim(X)
        return np.column_stack([m.standardize(X[:, i]) for i, m in enumerate(self.marginals)])

    def unstandardize(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        self._check_dim(Z)
        return np.column_stack([m.unstandardize(Z[:, i]) for i, m in enumerate(self.marginals)])

    def to_unit_box(self, X) -> np.ndarray:
        """Affine map of the design box onto ``[0, 1]^d``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self._check_dim(X)
        lo, hi = self.box()
        return (X - lo) / (hi - lo)

    def from_unit_box(self, U) -> np.ndarray:
        lo, hi = self.box()
        return lo + np.atleast_2d(U) * (hi - lo)

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        b = np.array([m.bounds for m in self.marginals], dtype=float)
        return b[:, 0], b[:, 1]

    def _check_dim(self, X):
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} columns, got {X.shape[1]}")

    def to_dict(self) -> dict:
        return {"names": list(self.names), "marginals": [m.to_dict() for m in self.marginals]}

    @classmethod
    def from_dict(cls, d: dict) -> "InputSpace":
        return cls(tuple(marginal_from_dict(m) for m in d["marginals"]), tuple(d.get("names", ())))


def garonne_inputs() -> InputSpace:
    """Upstream discharge N(4031, 400) and zone-3 Strickler U(15, 60)."""
    return InputSpace(
        (Normal(4031.0, 400.0, design_bounds=(3000.0, 5000.0)), Uniform(15.0, 60.0)),
        ("Q", "Ks3"),
    )


# -- random and quasi-random designs ------------------------------------------


def mc_sample(space: InputSpace, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. draws from the product law using PCG64 seeded by ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return np.column_stack([m.sample(rng, n) for m in space.marginals])


def radical_inverse(index, base: int):
    """Van der Corput radical inverse of non-negative integer ``index``."""
    index = np.asarray(index, dtype=np.int64)
    out = np.zeros(index.shape, dtype=float)
    scale = 1.0 / base
    k = index.copy()
    while np.any(k > 0):
        out += (k % base) * scale
        k //= base
        scale /= base
    return out


def halton(n: int, dim: int, offset: int = 1) -> np.ndarray:
    """First ``n`` Halton points in ``[0, 1)^dim`` starting at index ``offset``."""
    if dim > len(PRIMES):
        raise ValueError(f"at most {len(PRIMES)} dimensions supported")
    idx = np.arange(offset, offset + n)
    return np.column_stack([radical_inverse(idx, PRIMES[i]) for i in range(dim)])


def halton_design(space: InputSpace, n: int) -> np.ndarray:
    """Halton points (indices 1..n) mapped onto the design box of ``space``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return space.from_unit_box(halton(n, space.dim))


def grid_star_discrepancy(U, m: int = 64) -> float:
    """Star discrepancy of points in ``[0, 1]^2`` evaluated on an ``m x m`` grid of anchors."""
    U = np.asarray(U, dtype=float)
    t = np.arange(1, m + 1) / m
    inside = (U[:, None, None, 0] < t[None, :, None]) & (U[:, None, None, 1] < t[None, None, :])
    frac = inside.mean(axis=0)
    return float(np.max(np.abs(frac - np.outer(t, t))))


# -- Gaussian quadrature -------------------------------------------------------


def recurrence_coefficients(family: str, n: int) -> np.ndarray:
    """Off-diagonal ``b_1..b_n`` of the orthonormal three-term recurrence.

    ``z p_k = b_{k+1} p_{k+1} + b_k p_{k-1}`` for the probabilists' Hermite
    family (standard normal) and the Legendre family (uniform on [-1, 1]).
    """
    k = np.arange(1, n + 1, dtype=float)
    if family == "hermite":
        return np.sqrt(k)
    if family == "legendre":
        return k / np.sqrt(4.0 * k * k - 1.0)
    raise ValueError(f"unknown polynomial family {family!r}")


def _orthonormal_table(family, degree, z):
    """Values ``p_0..p_degree`` at ``z`` and the derivative of ``p_degree``."""
    b = recurrence_coefficients(family, degree)
    z = np.asarray(z, dtype=float)
    p = np.zeros((degree + 1,) + z.shape)
    dp = np.zeros_like(p)
    p[0] = 1.0
    if degree >= 1:
        p[1] = z / b[0]
        dp[1] = 1.0 / b[0]
    for k in range(1, degree):
        p[k + 1] = (z * p[k] - b[k - 1] * p[k - 1]) / b[k]
        dp[k + 1] = (p[k] + z * dp[k] - b[k - 1] * dp[k - 1]) / b[k]
    return p, dp[degree]


def gauss_rule(family: str, P: int) -> tuple[np.ndarray, np.ndarray]:
    """``P + 1`` point Gauss rule for the probability measure of ``family``.

    Nodes come from the Jacobi matrix eigenvalues (Golub-Welsch), polished by
    one Newton step; weights are the Christoffel numbers
    ``1 / sum_k p_k(x)^2``, which keeps the tail weights accurate. Paired
    nodes are symmetrised.
    """
    if P < 0:
        raise ValueError("degree must be non-negative")
    n = P + 1
    if n == 1:
        return np.zeros(1), np.ones(1)
    b = recurrence_coefficients(family, n - 1)
    x = eigh_tridiagonal(np.zeros(n), b, eigvals_only=True)
    p, dp = _orthonormal_table(family, n, x)
    x = x - p[n] / dp
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    p, _ = _orthonormal_table(family, n - 1, x)
    w = 1.0 / np.sum(p**2, axis=0)
    w = 0.5 * (w + w[::-1])
    return x, w / w.sum()


def gauss_hermite(P: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the standard normal measure, exact to degree ``2P + 1``."""
    return gauss_rule("hermite", P)


def gauss_legendre(P: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the uniform probability on ``[-1, 1]``."""
    return gauss_rule("legendre", P)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray  # (N, d) standardized
    weights: np.ndarray  # (N,)
    order: int
    points: np.ndarray = field(default=None)  # (N, d) physical

    @property
    def size(self) -> int:
        return self.weights.size


def tensor_quadrature(P: int, space: InputSpace) -> QuadratureRule:
    """Full tensor grid of 1-D Gauss rules, ``(P + 1)^d`` nodes.

    Nodes are ordered with the last dimension varying fastest.
    """
    rules = [gauss_rule(fam, P) for fam in space.families]
    nodes = np.array(list(itertools.product(*(r[0] for r in rules))))
    weights = np.prod(np.array(list(itertools.product(*(r[1] for r in rules)))), axis=1)
    return QuadratureRule(nodes, weights, P, space.unstandardize(nodes))


# -- design files ---------------------------------------------------------------


def write_design_csv(path, X, space: InputSpace, seed: int | None = None, **meta) -> None:
    """Write a design as ``index,<name columns>`` plus a JSON metadata sidecar."""
    path = Path(path)
    X = np.atleast_2d(X)
    header = ["index"] + [_column_name(n) for n in space.names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(X):
            w.writerow([i] + [repr(float(v)) for v in row])
    sidecar = {"seed": seed, "n": int(X.shape[0]), "space": space.to_dict(), **meta}
    path.with_suffix(".meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def read_design_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def _column_name(name: str) -> str:
    return {"Q": "Q_m3s"}.get(name, name)
