"""Polynomial chaos surrogate built by Gaussian-quadrature spectral projection.

The basis is the total-degree truncation of tensor products of orthonormal
1-D polynomials (Hermite for normal inputs, Legendre for uniform inputs), so
moments, the covariance matrix between outputs and Sobol' indices follow
directly from the coefficients.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sampling import InputSpace, QuadratureRule, _orthonormal_table, tensor_quadrature
from .stats import SobolResult

__all__ = [
    "MultiIndexBasis",
    "PcSurrogate",
    "orthonormal_poly_1d",
    "fit_pc",
    "build_pc",
    "eval_pc",
    "pc_moments",
    "pc_covariance",
    "pc_sobol",
]


def orthonormal_poly_1d(family: str, degree: int, z):
    """Orthonormal polynomial of ``degree`` evaluated at ``z``.

    ``family`` is ``"hermite"`` (``He_k / sqrt(k!)``, standard normal weight)
    or ``"legendre"`` (``L_k sqrt(2k + 1)``, uniform probability on [-1, 1]).
    Evaluated with the three-term recurrence.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    table, _ = _orthonormal_table(family, degree, z)
    return table[degree]


@dataclass(frozen=True, eq=False)
class MultiIndexBasis:
    """Total-degree multi-index set, graded then reverse-lexicographic.

    Row 0 is always the constant polynomial. For two inputs and ``order=2``
    the rows are ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.
    """

    families: tuple[str, ...]
    order: int
    indices: np.ndarray

    @classmethod
    def total_degree(cls, families, order: int) -> "MultiIndexBasis":
        families = tuple(families)
        d = len(families)
        rows = []
        for degree in range(order + 1):
            rows.extend(_compositions(degree, d))
        return cls(families, order, np.array(rows, dtype=int).reshape(-1, d))

    @property
    def dim(self) -> int:
        return len(self.families)

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def design_matrix(self, Z) -> np.ndarray:
        """``Psi_i(z)`` for every row of ``Z``: shape ``(n, size)``."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        out = np.ones((Z.shape[0], self.size))
        for j, fam in enumerate(self.families):
            table, _ = _orthonormal_table(fam, self.order, Z[:, j])
            out *= table[self.indices[:, j]].T
        return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class PcSurrogate:
    basis: MultiIndexBasis
    coefficients: np.ndarray  # (M, r), row a holds gamma_{a, i}
    space: InputSpace

    def __call__(self, X):
        return eval_pc(self, X)

    @property
    def n_outputs(self) -> int:
        return self.coefficients.shape[0]

    def to_dict(self) -> dict:
        return {
            "kind": "polynomial_chaos",
            "basis": {
                "families": list(self.basis.families),
                "order": self.basis.order,
                "truncation": "total_degree",
                "indices": self.basis.indices.tolist(),
            },
            "space": self.space.to_dict(),
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcSurrogate":
        b = d["basis"]
        basis = MultiIndexBasis(tuple(b["families"]), int(b["order"]), np.array(b["indices"], dtype=int))
        return cls(basis, np.array(d["coefficients"], dtype=float), InputSpace.from_dict(d["space"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "PcSurrogate":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write_coefficients_csv(self, path) -> None:
        cols = [f"i{j + 1}" for j in range(self.basis.dim)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["station"] + cols + ["gamma"])
            for a, row in enumerate(self.coefficients):
                for idx, g in zip(self.basis.indices, row):
                    w.writerow([a + 1] + idx.tolist() + [repr(float(g))])


def fit_pc(outputs, rule: QuadratureRule, basis: MultiIndexBasis, space: InputSpace) -> PcSurrogate:
    """Project node outputs on the basis: ``gamma_{a,i} = sum_k h_a(k) Psi_i(z_k) w_k``.

    ``outputs`` is ``(N,)`` or ``(N, M)`` in node order of ``rule``.
    """
    H = np.asarray(outputs, dtype=float)
    if H.ndim == 1:
        H = H[:, None]
    if H.shape[0] != rule.size:
        raise ValueError(f"{H.shape[0]} outputs supplied for a {rule.size}-node rule")
    if rule.order != basis.order:
        raise ValueError(f"rule order {rule.order} differs from basis order {basis.order}")
    if rule.nodes.shape[1] != basis.dim or basis.dim != space.dim:
        raise ValueError("dimension mismatch between rule, basis and input space")
    phi = basis.design_matrix(rule.nodes)
    gamma = H.T @ (phi * rule.weights[:, None])
    return PcSurrogate(basis, gamma, space)


def build_pc(model, space: InputSpace, order: int):
    """Run ``model`` on the tensor Gauss grid of ``order`` and fit.

    Returns the surrogate and the rule; the model is called once on all
    ``(order + 1)^d`` nodes.
    """
    rule = tensor_quadrature(order, space)
    H = np.asarray(model(rule.points), dtype=float)
    basis = MultiIndexBasis.total_degree(space.families, order)
    return fit_pc(H, rule, basis, space), rule


def eval_pc(s: PcSurrogate, X) -> np.ndarray:
    """Surrogate outputs ``(n, M)`` at physical inputs ``X``.

    Uniform inputs must lie in their support; normal inputs are unrestricted.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    for j, m in enumerate(s.space.marginals):
        if m.family == "legendre":
            col = X[:, j]
            if np.any((col < m.low) | (col > m.high)):
                raise ValueError(
                    f"{s.space.names[j]} outside its support [{m.low}, {m.high}]"
                )
    Z = s.space.standardize(X)
    return s.basis.design_matrix(Z) @ s.coefficients.T


def pc_moments(s: PcSurrogate) -> tuple[np.ndarray, np.ndarray]:
    """Analytic mean ``gamma_0`` and STD ``sqrt(sum_{i>0} gamma_i^2)`` per output."""
    g = s.coefficients
    return g[:, 0].copy(), np.sqrt(np.sum(g[:, 1:] ** 2, axis=1))


def pc_covariance(s: PcSurrogate) -> tuple[np.ndarray, np.ndarray]:
    """Analytic covariance and correlation matrices between outputs.

    Rows and columns of zero-variance outputs are NaN in the correlation.
    """
    g = s.coefficients[:, 1:]
    cov = g @ g.T
    cov = 0.5 * (cov + cov.T)
    std = np.sqrt(np.diag(cov))
    zero = std == 0
    if np.any(zero):
        warnings.warn(
            f"outputs {np.flatnonzero(zero).tolist()} have zero variance; correlation undefined",
            RuntimeWarning,
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / np.outer(std, std)
    corr[zero, :] = np.nan
    corr[:, zero] = np.nan
    np.fill_diagonal(corr, np.where(zero, np.nan, 1.0))
    return cov, corr


def pc_sobol(s: PcSurrogate) -> SobolResult:
    """First-order and total Sobol' indices from squared coefficients.

    Outputs with zero variance get NaN indices and a warning.
    """
    g2 = s.coefficients[:, 1:] ** 2
    idx = s.basis.indices[1:]
    var = g2.sum(axis=1)
    active = idx > 0
    only = active & (active.sum(axis=1, keepdims=True) == 1)
    zero = var == 0
    if np.any(zero):
        warnings.warn(
            f"outputs {np.flatnonzero(zero).tolist()} have zero variance; Sobol' indices undefined",
            RuntimeWarning,
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        first = (g2 @ only) / var[:, None]
        total = (g2 @ active) / var[:, None]
    return SobolResult(first=first, total=total, names=s.space.names, method="pc")


def basis_size(dim: int, order: int) -> int:
    return math.comb(dim + order, order)
