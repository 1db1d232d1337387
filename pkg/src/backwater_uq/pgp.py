"""POD-based Gaussian process surrogate.

The centred snapshot matrix (stations x snapshots) is decomposed by SVD,
``Y = U diag(lam) V^T``. Every mode amplitude ``(diag(lam) V^T)[i]`` is then
interpolated over the input space by its own zero-mean Gaussian process with
a squared-exponential kernel, and predictions are recombined as

    h(x) = h_mean + U @ psi_gp(x).

Inputs are mapped onto ``[0, 1]^d`` through the design box of the input space
before any distance is computed.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky
from scipy.optimize import minimize

from .sampling import InputSpace, halton, halton_design

__all__ = [
    "GpFitError",
    "SnapshotSet",
    "PodBasis",
    "GpMode",
    "PgpSurrogate",
    "HYPER_BOUNDS",
    "pod_decompose",
    "sq_exp_kernel",
    "kernel_matrix",
    "gp_log_likelihood",
    "gp_fit_mode",
    "gp_predict_mode",
    "fit_pgp",
    "build_pgp",
    "eval_pgp",
]

log = logging.getLogger(__name__)

# (length scale, signal variance, nugget) in units of standardised inputs and
# RMS-scaled mode amplitudes
HYPER_BOUNDS = ((1e-2, 1e1), (1e-8, 1e4), (1e-10, 1e-2))
TAU2_MIN = HYPER_BOUNDS[2][0]
MAX_JITTER = 1e-6


class GpFitError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SnapshotSet:
    X: np.ndarray  # (N, d) physical inputs
    Y_raw: np.ndarray  # (N, M) outputs

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y_raw, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.shape[0] != Y.shape[0]:
            raise ValueError("one output row per input row")
        if X.shape[0] < 2:
            raise ValueError("need at least two snapshots")
        if np.unique(X, axis=0).shape[0] != X.shape[0]:
            raise ValueError("snapshot inputs must be unique")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y_raw", Y)

    @property
    def mean(self) -> np.ndarray:
        return self.Y_raw.mean(axis=0)

    @property
    def centred(self) -> np.ndarray:
        """``(M, N)``: one column per snapshot."""
        return (self.Y_raw - self.mean).T

    def canonical(self) -> "SnapshotSet":
        """Same snapshots sorted lexicographically by input row."""
        order = np.lexsort(self.X.T[::-1])
        return SnapshotSet(self.X[order], self.Y_raw[order])


@dataclass(frozen=True, eq=False)
class PodBasis:
    singular_values: np.ndarray  # (r,)
    modes: np.ndarray  # U, (M, r)
    mode_samples: np.ndarray  # diag(lam) V^T, (r, N)

    @property
    def rank(self) -> int:
        return self.singular_values.size

    def reconstruct(self) -> np.ndarray:
        return self.modes @ self.mode_samples


def pod_decompose(snapshots: SnapshotSet) -> PodBasis:
    """Thin SVD of the centred snapshot matrix, keeping all ``min(M, N)`` modes.

    Singular values are those of the unscaled centred matrix; eigenvalues of
    the snapshot covariance ``Y^T Y / N`` are ``lam**2 / N``.
    """
    Y = snapshots.centred
    U, lam, Vt = np.linalg.svd(Y, full_matrices=False)
    if lam[0] <= _rounding_floor(snapshots):
        warnings.warn("identical snapshots: centred matrix is zero", RuntimeWarning, stacklevel=2)
    return PodBasis(lam, U, lam[:, None] * Vt)


def _rounding_floor(snapshots: SnapshotSet) -> float:
    """Singular values below this are left over from rounding in the mean."""
    Y = snapshots.Y_raw
    return 1e-13 * float(np.max(np.abs(Y))) * math.sqrt(Y.size)


# -- kernel and likelihood -------------------------------------------------------


def sq_exp_kernel(x, x2, length_scale: float) -> float:
    """``exp(-|x - x2|^2 / (2 l^2))`` for two points."""
    if not length_scale > 0:
        raise ValueError("length scale must be positive")
    diff = np.asarray(x, dtype=float) - np.asarray(x2, dtype=float)
    return float(np.exp(-0.5 * np.dot(diff, diff) / length_scale**2))


def _sqdist_exact(A, B):
    diff = np.atleast_2d(A)[:, None, :] - np.atleast_2d(B)[None, :, :]
    return np.sum(diff**2, axis=-1)


def kernel_matrix(A, B, length_scale: float) -> np.ndarray:
    return np.exp(-0.5 * _sqdist_exact(A, B) / length_scale**2)


def gp_log_likelihood(log_params, X, y, grad: bool = True):
    """Gaussian log marginal likelihood and its gradient.

    ``log_params = (log l, log sigma^2, log tau^2)`` and the covariance is
    ``sigma^2 Pi + tau^2 I``. Raises ``LinAlgError`` when the covariance is
    not numerically positive definite.
    """
    log_l, log_s2, log_t2 = (float(v) for v in log_params)
    ell, s2, t2 = math.exp(log_l), math.exp(log_s2), math.exp(log_t2)
    X = np.atleast_2d(X)
    y = np.asarray(y, dtype=float)
    n = y.size
    D2 = _sqdist_exact(X, X)
    Pi = np.exp(-0.5 * D2 / ell**2)
    K = s2 * Pi
    K[np.diag_indices(n)] += t2
    L = cholesky(K, lower=True, check_finite=False)
    alpha = cho_solve((L, True), y, check_finite=False)
    value = -0.5 * y @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2 * math.pi)
    if not grad:
        return value
    Kinv = cho_solve((L, True), np.eye(n), check_finite=False)
    W = np.outer(alpha, alpha) - Kinv
    dK_l = s2 * Pi * D2 / ell**2
    dK_s = s2 * Pi
    g = np.array(
        [
            0.5 * np.sum(W * dK_l),
            0.5 * np.sum(W * dK_s),
            0.5 * t2 * np.trace(W),
        ]
    )
    return value, g


# -- one GP per mode ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GpMode:
    """Fitted GP for one mode amplitude.

    ``signal_variance`` and ``nugget`` refer to the targets divided by
    ``output_scale``. ``weights`` solve
    ``(Pi + nugget / signal_variance * I) weights = targets`` in the original
    units, so the prediction is ``sum_k weights[k] * pi(x, x_k)``.
    """

    length_scale: float
    signal_variance: float
    nugget: float
    weights: np.ndarray
    inputs: np.ndarray
    output_scale: float = 1.0
    log_likelihood: float = float("nan")
    jitter: float = 0.0

    @property
    def noise_ratio(self) -> float:
        return self.nugget / self.signal_variance + self.jitter

    def to_dict(self) -> dict:
        return {
            "length_scale": self.length_scale,
            "signal_variance": self.signal_variance,
            "nugget": self.nugget,
            "output_scale": self.output_scale,
            "log_likelihood": self.log_likelihood,
            "jitter": self.jitter,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, inputs) -> "GpMode":
        return cls(
            d["length_scale"],
            d["signal_variance"],
            d["nugget"],
            np.array(d["weights"], dtype=float),
            np.asarray(inputs, dtype=float),
            d["output_scale"],
            d.get("log_likelihood", float("nan")),
            d.get("jitter", 0.0),
        )


def _zero_mode(inputs):
    n = inputs.shape[0]
    return GpMode(1.0, HYPER_BOUNDS[1][0], HYPER_BOUNDS[2][1], np.zeros(n), inputs, 0.0)


def gp_fit_mode(inputs, targets, bounds=HYPER_BOUNDS, n_restarts: int = 8) -> GpMode:
    """Maximum-likelihood GP fit of one mode.

    Hyperparameters are searched in log space within ``bounds`` by L-BFGS-B
    started from ``n_restarts`` Halton points of the log-bound box; the best
    optimum is kept.
    """
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if X.shape[0] != y.size:
        raise ValueError("one target per input point")
    if y.size < 3:
        raise ValueError("need at least three training points")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    scale = float(np.sqrt(np.mean(y**2)))
    if scale == 0.0:
        return _zero_mode(X)
    ys = y / scale
    lo = np.log([b[0] for b in bounds])
    hi = np.log([b[1] for b in bounds])
    starts = lo + halton(n_restarts, 3) * (hi - lo)

    def objective(theta):
        try:
            v, g = gp_log_likelihood(theta, X, ys)
        except (LinAlgError, ValueError):
            return 1e25, np.zeros(3)
        return -v, -g

    best = None
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=list(zip(lo, hi)),
            options={"maxiter": 500, "ftol": 1e-14, "gtol": 1e-9},
        )
        if res.fun < 1e24 and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise GpFitError("likelihood could not be evaluated at any restart")
    ell, s2, t2 = np.exp(best.x)
    Pi = kernel_matrix(X, X, ell)
    ratio = t2 / s2
    jitter = 0.0
    while True:
        try:
            factor = cho_factor(Pi + (ratio + jitter) * np.eye(y.size), lower=True, check_finite=False)
            break
        except LinAlgError:
            jitter = max(jitter * 10.0, TAU2_MIN)
            if jitter > MAX_JITTER:
                raise GpFitError(
                    f"kernel matrix not positive definite (l={ell:.3g}, sigma2={s2:.3g}, "
                    f"tau2={t2:.3g}) even with jitter {MAX_JITTER:g}"
                )
    if jitter:
        log.debug("GP fit needed jitter %g", jitter)
    weights = cho_solve(factor, y, check_finite=False)
    return GpMode(float(ell), float(s2), float(t2), weights, X, scale, float(-best.fun), jitter)


def gp_predict_mode(m: GpMode, x) -> np.ndarray:
    """Posterior mean ``sum_k w_k pi(x, x_k)`` at standardised point(s) ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return kernel_matrix(x, m.inputs, m.length_scale) @ m.weights


# -- surrogate ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PgpSurrogate:
    basis: PodBasis
    modes: tuple[GpMode, ...]
    mean: np.ndarray  # (M,)
    design: np.ndarray  # (N, d) physical
    space: InputSpace

    def __call__(self, X):
        return eval_pgp(self, X)

    def to_dict(self) -> dict:
        return {
            "kind": "pod_gaussian_process",
            "space": self.space.to_dict(),
            "design": self.design.tolist(),
            "mean": self.mean.tolist(),
            "modes_U": self.basis.modes.tolist(),
            "singular_values": self.basis.singular_values.tolist(),
            "mode_samples": self.basis.mode_samples.tolist(),
            "gp": [m.to_dict() for m in self.modes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PgpSurrogate":
        space = InputSpace.from_dict(d["space"])
        design = np.array(d["design"], dtype=float)
        unit = space.to_unit_box(design)
        basis = PodBasis(
            np.array(d["singular_values"], dtype=float),
            np.array(d["modes_U"], dtype=float),
            np.array(d["mode_samples"], dtype=float),
        )
        modes = tuple(GpMode.from_dict(g, unit) for g in d["gp"])
        return cls(basis, modes, np.array(d["mean"], dtype=float), design, space)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "PgpSurrogate":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write_spectrum_csv(self, path) -> None:
        lam = self.basis.singular_values
        energy = lam**2
        total = energy.sum() or 1.0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["mode", "singular_value", "energy_fraction", "cumulative_energy"])
            for i, (s, c) in enumerate(zip(lam, np.cumsum(energy) / total)):
                w.writerow([i + 1, repr(float(s)), repr(float(s * s / total)), repr(float(c))])


def fit_pgp(snapshots: SnapshotSet, space: InputSpace, workers: int = 1, n_restarts: int = 8) -> PgpSurrogate:
    """POD of the snapshots followed by one GP per mode.

    Snapshots are put in canonical input order first so the result does not
    depend on how they were supplied. Modes whose singular value is below
    ``1e-12`` of the largest, or at rounding level, are represented by a
    zero GP.
    """
    snap = snapshots.canonical()
    basis = pod_decompose(snap)
    unit = space.to_unit_box(snap.X)
    lam = basis.singular_values
    cutoff = max(1e-12 * lam[0], _rounding_floor(snap))

    def fit_one(i):
        if lam[i] <= cutoff:
            return _zero_mode(unit)
        return gp_fit_mode(unit, basis.mode_samples[i], n_restarts=n_restarts)

    failures = []

    def guarded(i):
        try:
            return fit_one(i)
        except GpFitError as exc:
            failures.append((i, str(exc)))
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            modes = list(pool.map(guarded, range(basis.rank)))
    else:
        modes = [guarded(i) for i in range(basis.rank)]
    if failures:
        detail = "; ".join(f"mode {i + 1}: {msg}" for i, msg in sorted(failures))
        raise GpFitError(f"{len(failures)} mode fit(s) failed: {detail}")
    return PgpSurrogate(basis, tuple(modes), snap.mean, snap.X, space)


def build_pgp(model, space: InputSpace, n: int, workers: int = 1) -> PgpSurrogate:
    """Evaluate ``model`` on an ``n``-point Halton design and fit."""
    X = halton_design(space, n)
    return fit_pgp(SnapshotSet(X, model(X)), space, workers=workers)


def eval_pgp(s: PgpSurrogate, X, chunk: int = 8192) -> np.ndarray:
    """Surrogate outputs ``(n, M)`` at physical inputs ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    unit = s.space.to_unit_box(X)
    out = np.empty((X.shape[0], s.mean.size))
    for start in range(0, X.shape[0], chunk):
        u = unit[start : start + chunk]
        amps = np.column_stack([gp_predict_mode(m, u) for m in s.modes])
        out[start : start + chunk] = s.mean + amps @ s.basis.modes.T
    return out
