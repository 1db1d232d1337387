import math
import warnings

import numpy as np
import pytest

from backwater_uq.pc import (
    MultiIndexBasis,
    PcSurrogate,
    basis_size,
    build_pc,
    eval_pc,
    fit_pc,
    orthonormal_poly_1d,
    pc_covariance,
    pc_moments,
    pc_sobol,
)
from backwater_uq.sampling import InputSpace, Uniform, mc_sample, tensor_quadrature


def _zeta(space, X):
    return space.standardize(X)


def test_orthonormal_poly_hand_values():
    assert orthonormal_poly_1d("hermite", 0, 0.3) == 1.0
    assert orthonormal_poly_1d("hermite", 1, 1.0) == pytest.approx(1.0)
    assert orthonormal_poly_1d("hermite", 2, 0.0) == pytest.approx(-1 / math.sqrt(2))
    assert orthonormal_poly_1d("legendre", 2, 1.0) == pytest.approx(math.sqrt(5))
    with pytest.raises(ValueError):
        orthonormal_poly_1d("hermite", -1, 0.0)


def test_basis_layout():
    b = MultiIndexBasis.total_degree(("hermite", "legendre"), 2)
    assert b.indices.tolist() == [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    for P in (6, 10, 15):
        assert MultiIndexBasis.total_degree(("hermite", "legendre"), P).size == basis_size(2, P)
        assert basis_size(2, P) == math.comb(P + 2, 2)


@pytest.mark.parametrize("P", [2, 6, 10, 15])
def test_orthonormality_under_quadrature(space, P):
    rule = tensor_quadrature(P, space)
    basis = MultiIndexBasis.total_degree(space.families, P)
    phi = basis.design_matrix(rule.nodes)
    gram = phi.T @ (phi * rule.weights[:, None])
    assert np.max(np.abs(gram - np.eye(basis.size))) < 1e-10


def test_constant_model(space):
    s, rule = build_pc(lambda X: np.full((X.shape[0], 3), 7.5), space, 4)
    assert np.allclose(s.coefficients[:, 0], 7.5, atol=1e-10)
    assert np.max(np.abs(s.coefficients[:, 1:])) < 1e-10
    assert np.allclose(s(mc_sample(space, 50, 1)), 7.5)
    mean, std = pc_moments(s)
    assert np.allclose(std, 0.0, atol=1e-10)


def test_projection_of_quadratic(space):
    def h(X):
        z = _zeta(space, X)
        return 2 + 3 * z[:, 0] + z[:, 1] ** 2

    s, _ = build_pc(h, space, 3)
    g = dict(zip(map(tuple, s.basis.indices.tolist()), s.coefficients[0]))
    assert g[(0, 0)] == pytest.approx(2 + 1 / 3, abs=1e-12)
    assert g[(1, 0)] == pytest.approx(3.0, abs=1e-12)
    assert g[(0, 2)] == pytest.approx((2 / 3) / math.sqrt(5), abs=1e-12)
    others = [v for k, v in g.items() if k not in {(0, 0), (1, 0), (0, 2)}]
    assert np.max(np.abs(others)) < 1e-12


def test_polynomial_exactness(space):
    def h(X):
        z = _zeta(space, X)
        return np.column_stack([1 - z[:, 0] * z[:, 1] ** 3 + 0.5 * z[:, 0] ** 2, z[:, 0] ** 4 - z[:, 1]])

    s, _ = build_pc(h, space, 4)
    X = mc_sample(space, 1000, 11)
    assert np.max(np.abs(s(X) - h(X))) < 1e-9


def test_linear_moments(space):
    s, _ = build_pc(lambda X: 2 + 3 * _zeta(space, X)[:, :1], space, 2)
    mean, std = pc_moments(s)
    assert mean[0] == pytest.approx(2.0) and std[0] == pytest.approx(3.0)


def test_quadrature_training_node_residual_is_small(model, space):
    s, rule = build_pc(model, space, 6)
    resid = np.abs(s(rule.points) - model(rule.points))
    # regression on the grid, not interpolation: bounded by truncation error
    assert np.max(resid) < 0.05


def test_fit_checks_dimensions(space):
    rule = tensor_quadrature(2, space)
    basis = MultiIndexBasis.total_degree(space.families, 2)
    with pytest.raises(ValueError):
        fit_pc(np.zeros(rule.size - 1), rule, basis, space)
    with pytest.raises(ValueError):
        fit_pc(np.zeros(rule.size), rule, MultiIndexBasis.total_degree(space.families, 3), space)


def test_eval_rejects_out_of_support_uniform(space):
    s, _ = build_pc(lambda X: X[:, :1], space, 1)
    with pytest.raises(ValueError):
        eval_pc(s, [[4000.0, 61.0]])
    eval_pc(s, [[9000.0, 30.0]])  # normal dimension is unrestricted


def test_moments_and_covariance_match_surrogate_sampling(model, space):
    s, _ = build_pc(model, space, 10)
    n = 100_000
    H = s(mc_sample(space, n, 2024))
    mean, std = pc_moments(s)
    se_mean = H.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(H.mean(axis=0) - mean) < 4 * se_mean)
    dev = H - H.mean(axis=0)
    var_mc = (dev**2).sum(axis=0) / (n - 1)
    se_var = np.sqrt(np.var(dev**2, axis=0) / n)
    assert np.all(np.abs(var_mc - std**2) < 4 * se_var)
    cov, corr = pc_covariance(s)
    prod = dev[:, :, None] * dev[:, None, :]
    cov_mc = prod.sum(axis=0) / (n - 1)
    se_cov = np.sqrt(prod.var(axis=0) / n)
    assert np.all(np.abs(cov_mc - cov) < 4 * se_cov)
    assert np.allclose(np.diag(cov), std**2, rtol=1e-12)
    assert np.allclose(np.diag(corr), 1.0)


def test_mc_mean_within_three_standard_errors(model, space):
    s, _ = build_pc(model, space, 6)
    n = 20_000
    H = s(mc_sample(space, n, 77))
    se = H.std(axis=0, ddof=1) / math.sqrt(n)
    assert np.all(np.abs(H.mean(axis=0) - s.coefficients[:, 0]) < 3 * se)


def test_parseval_against_quadrature_variance(model, space):
    P = 10
    s, rule = build_pc(model, space, P)
    fine = tensor_quadrature(2 * P, space)
    vals = s(fine.points)
    m = fine.weights @ vals
    var_q = fine.weights @ (vals - m) ** 2
    _, std = pc_moments(s)
    assert np.allclose(std**2, var_q, rtol=1e-9)


def test_proportional_rows_are_fully_correlated(space):
    basis = MultiIndexBasis.total_degree(space.families, 2)
    g = np.array([[1.0, 0.5, -0.2, 0.1, 0.0, 0.3]])
    s = PcSurrogate(basis, np.vstack([g, -2 * g]), space)
    cov, corr = pc_covariance(s)
    assert corr[0, 1] == pytest.approx(-1.0)
    assert cov[0, 0] == pytest.approx(np.sum(g[0, 1:] ** 2))


def test_zero_variance_station_is_flagged(space):
    basis = MultiIndexBasis.total_degree(space.families, 1)
    s = PcSurrogate(basis, np.array([[1.0, 0.0, 0.0], [2.0, 1.0, 0.5]]), space)
    with pytest.warns(RuntimeWarning):
        _, corr = pc_covariance(s)
    assert np.all(np.isnan(corr[0])) and corr[1, 1] == 1.0
    with pytest.warns(RuntimeWarning):
        sob = pc_sobol(s)
    assert np.all(np.isnan(sob.first[0]))


def test_sobol_additive_and_interaction(space):
    def additive(X):
        z = _zeta(space, X)
        return z[:, 0] + 2 * z[:, 1]

    sob = pc_sobol(build_pc(additive, space, 3)[0])
    var = 1 + 4 / 3
    assert sob.first[0] == pytest.approx([1 / var, (4 / 3) / var], abs=1e-12)
    assert np.allclose(sob.total, sob.first, atol=1e-12)

    def product(X):
        z = _zeta(space, X)
        return z[:, 0] * z[:, 1]

    sob = pc_sobol(build_pc(product, space, 3)[0])
    assert np.allclose(sob.first, 0.0, atol=1e-12)
    assert np.allclose(sob.total, 1.0, atol=1e-12)


def test_sobol_bounds_and_closure(model, space):
    sob = pc_sobol(build_pc(model, space, 10)[0])
    assert np.all(sob.first >= 0) and np.all(sob.first <= sob.total + 1e-15) and np.all(sob.total <= 1)
    assert np.allclose(sob.first.sum(axis=1) + sob.interaction, 1.0, atol=1e-12)


def ishigami_indices(a=7.0, b=0.1):
    """Closed-form variance decomposition of the Ishigami function."""
    v1 = 0.5 * (1 + b * math.pi**4 / 5) ** 2
    v2 = a**2 / 8
    v13 = b**2 * math.pi**8 * (1 / 18 - 1 / 50)
    var = v1 + v2 + v13
    return np.array([v1, v2, 0.0]) / var, np.array([v1 + v13, v2, v13]) / var


def test_ishigami_first_order(space):
    cube = InputSpace(tuple(Uniform(-math.pi, math.pi) for _ in range(3)), ("x1", "x2", "x3"))

    def f(X):
        return np.sin(X[:, 0]) + 7 * np.sin(X[:, 1]) ** 2 + 0.1 * X[:, 2] ** 4 * np.sin(X[:, 0])

    s, _ = build_pc(f, cube, 12)
    sob = pc_sobol(s)
    first, total = ishigami_indices()
    assert first[0] == pytest.approx(0.3139, abs=1e-4) and first[1] == pytest.approx(0.4424, abs=1e-4)
    assert np.all(np.abs(sob.first[0] - first) < 5e-3)
    assert np.all(np.abs(sob.total[0] - total) < 5e-3)


def test_serialisation_round_trip(model, space, tmp_path):
    s, _ = build_pc(model, space, 4)
    path = tmp_path / "pc.json"
    s.save(path)
    s2 = PcSurrogate.load(path)
    X = mc_sample(space, 20, 3)
    assert np.array_equal(s(X), s2(X))
    s.write_coefficients_csv(tmp_path / "coef.csv")
    lines = (tmp_path / "coef.csv").read_text().splitlines()
    assert lines[0] == "station,i1,i2,gamma"
    assert len(lines) == 1 + 14 * basis_size(2, 4)


def test_no_warning_for_regular_fit(model, space):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pc_covariance(build_pc(model, space, 3)[0])
