"""Acceptance criteria, one test and one printed verdict line per criterion.

The end-to-end criteria share a single run of the default pipeline
(N_ref = 20,000, budgets 49/121/256). Lines are collected and printed in
the terminal summary under "acceptance criteria".
"""

import json
import math
import time

import numpy as np
import pytest

from backwater_uq import experiment as ex
from backwater_uq.channel import garonne_analog, normal_depth, solve_backwater, uniform_channel
from backwater_uq.pc import MultiIndexBasis, PcSurrogate, build_pc, pc_covariance, pc_moments, pc_sobol
from backwater_uq.pgp import PgpSurrogate, SnapshotSet, fit_pgp, gp_log_likelihood, pod_decompose
from backwater_uq.sampling import InputSpace, Uniform, mc_sample, tensor_quadrature
from backwater_uq.stats import ks_two_sample, martinez_sobol
from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.slow


def verdict(cid, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    cfg = ex.ExperimentConfig({"out": str(out)})
    t0 = time.perf_counter()
    ex.run_reference(cfg)
    res = ex.run_comparison(cfg)
    return cfg, res, time.perf_counter() - t0


def test_c1_surrogate_accuracy(pipeline):
    _, res, wall = pipeline
    q = res["summary"]["q2"]
    ok = (
        q["pc"]["49"] > 0.995
        and q["pc"]["121"] > 0.995
        and q["pgp"]["49"] > 0.99
        and q["pgp"]["121"] > 0.99
        and wall < 600
    )
    verdict(
        "C1 surrogate accuracy",
        ok,
        f"Q2 pc49={q['pc']['49']:.6f} pc121={q['pc']['121']:.6f} (>0.995), "
        f"pgp49={q['pgp']['49']:.6f} pgp121={q['pgp']['121']:.6f} (>0.99); pipeline {wall:.0f} s (<600 s)",
    )


def test_c2_ks_acceptance(pipeline):
    _, res, _ = pipeline
    s = res["summary"]
    ks = s["ks"]
    pc, gp = ks["pc"]["121"], ks["pgp"]["121"]
    expected_thr = 1.36 * math.sqrt(2 / s["n_ref"])
    big = ks_two_sample(np.zeros(100_000), np.zeros(100_000), 0.05).threshold
    ok = (
        not pc["reject"]
        and not gp["reject"]
        and pc["n"] == pc["m"] == 20_000
        and math.isclose(pc["threshold"], expected_thr, rel_tol=1e-12)
        and round(big, 6) == 6.082e-3
    )
    verdict(
        "C2 KS acceptance",
        ok,
        f"station {s['marmande_station']} N=121: D_pc={pc['D']:.2e} p={pc['p_value']:.3f}, "
        f"D_pgp={gp['D']:.2e} p={gp['p_value']:.3f}, threshold {pc['threshold']:.3e} (n=m={pc['n']}); "
        f"n=m=1e5 threshold {big:.4e}",
    )


def test_c3_sobol_structure(pipeline):
    cfg, res, _ = pipeline
    s = res["summary"]
    ref = res["reports"]["reference"].sobol
    stations = np.array(s["stations_km"])
    a_in, a_out = cfg["channel"]["a_in"], cfg["channel"]["a_out"]
    upstream = stations <= a_in + (a_out - a_in) / 3
    downstream = stations >= a_in + (a_out - a_in) / 2
    SQ, SK = ref.first[:, 0], ref.first[:, 1]
    up_ok = bool(np.all(SQ[upstream] > SK[upstream]))
    ks_dom = np.flatnonzero(downstream & (SK > SQ))
    contiguous = ks_dom.size > 0 and np.all(np.diff(ks_dom) == 1)

    # the structure is stated for first-order indices; totals are reported only
    pc = res["reports"]["pc_121"].sobol
    inside_first = (ref.first_ci[..., 0] <= pc.first) & (pc.first <= ref.first_ci[..., 1])
    inside_total = (ref.total_ci[..., 0] <= pc.total) & (pc.total <= ref.total_ci[..., 1])
    agree = bool(np.all(inside_first))
    total_miss = (np.flatnonzero(~np.all(inside_total, axis=1)) + 1).tolist()
    worst = max(max(v.values()) for v in (s["sobol_rmse"]["pc"]["121"], s["sobol_rmse"]["pgp"]["121"]))
    ok = up_ok and contiguous and agree and worst <= 5e-2
    verdict(
        "C3 Sobol' structure",
        ok,
        f"S_Q>S_Ks3 at upstream stations {(np.flatnonzero(upstream) + 1).tolist()}: {up_ok}; "
        f"S_Ks3>S_Q downstream at {(ks_dom + 1).tolist()} contiguous: {bool(contiguous)}; "
        f"PC(121) first-order inside Martinez 95% CI at all 14 stations: {agree} "
        f"(total indices outside CI at stations {total_miss}); "
        f"max Sobol' RMSE at N=121 {worst:.2e} (<=5e-2)",
    )


def test_c4_correlation_matrix(pipeline):
    _, res, _ = pipeline
    c = res["summary"]["corr_rmse"]
    pc, gp = c["pc"]["121"], c["pgp"]["121"]
    verdict("C4 correlation matrix", pc <= 1e-2 and gp <= 1e-2, f"RMSE N=121 pc={pc:.3e} pgp={gp:.3e} (<=1e-2)")


def _ishigami_first():
    a, b = 7.0, 0.1
    v1 = 0.5 * (1 + b * math.pi**4 / 5) ** 2
    v2 = a**2 / 8
    v13 = b**2 * math.pi**8 * (1 / 18 - 1 / 50)
    return np.array([v1, v2, 0.0]) / (v1 + v2 + v13)


def test_c5_pc_properties(model, space):
    # orthonormality
    P = 15
    rule = tensor_quadrature(P, space)
    basis = MultiIndexBasis.total_degree(space.families, P)
    phi = basis.design_matrix(rule.nodes)
    ortho = float(np.max(np.abs(phi.T @ (phi * rule.weights[:, None]) - np.eye(basis.size))))

    # polynomial exactness
    def poly(X):
        z = space.standardize(X)
        return np.column_stack([1 + z[:, 0] ** 3 * z[:, 1] - 2 * z[:, 1] ** 4, z[:, 0] * z[:, 1]])

    sp, _ = build_pc(poly, space, 4)
    Xt = mc_sample(space, 1000, 1)
    exact = float(np.max(np.abs(sp(Xt) - poly(Xt))))

    # analytic moments and covariance vs surrogate sampling
    s, _ = build_pc(model, space, 10)
    n = 100_000
    H = s(mc_sample(space, n, 2))
    mean, std = pc_moments(s)
    cov, _ = pc_covariance(s)
    dev = H - H.mean(axis=0)
    z_mean = np.abs(H.mean(axis=0) - mean) / (H.std(axis=0, ddof=1) / math.sqrt(n))
    prod = dev[:, :, None] * dev[:, None, :]
    z_cov = np.abs(prod.sum(axis=0) / (n - 1) - cov) / np.sqrt(prod.var(axis=0) / n)
    mc_ok = float(max(z_mean.max(), z_cov.max()))

    # closure
    sob = pc_sobol(s)
    closure = float(np.max(np.abs(sob.first.sum(axis=1) + sob.interaction - 1.0)))

    # Ishigami
    cube = InputSpace(tuple(Uniform(-math.pi, math.pi) for _ in range(3)), ("x1", "x2", "x3"))
    ish, _ = build_pc(
        lambda X: np.sin(X[:, 0]) + 7 * np.sin(X[:, 1]) ** 2 + 0.1 * X[:, 2] ** 4 * np.sin(X[:, 0]), cube, 12
    )
    ish_err = float(np.max(np.abs(pc_sobol(ish).first[0] - _ishigami_first())))

    ok = ortho <= 1e-10 and exact <= 1e-9 and mc_ok <= 4 and closure <= 1e-12 and ish_err <= 5e-3
    verdict(
        "C5 PC properties",
        ok,
        f"orthonormality {ortho:.1e} (<=1e-10); polynomial exactness {exact:.1e} (<=1e-9); "
        f"moments/covariance max {mc_ok:.2f} standard errors (<=4); closure {closure:.1e} (<=1e-12); "
        f"Ishigami first-order error {ish_err:.1e} (<=5e-3)",
    )


def test_c6_pgp_properties(pipeline, model, space):
    cfg, _, _ = pipeline
    fits = cfg.out / "fits"
    train = {}
    for n in (49, 121, 256):
        s = PgpSurrogate.load(fits / f"pgp_{n:04d}.json")
        train[n] = float(np.max(np.abs(s(s.design) - model(s.design))))
    s121 = PgpSurrogate.load(fits / "pgp_0121.json")
    snap = SnapshotSet(s121.design, model(s121.design))
    basis = pod_decompose(snap)
    Y = snap.centred
    recon = float(np.linalg.norm(Y - basis.reconstruct()) / np.linalg.norm(Y))
    energy = float(abs(np.sum(basis.singular_values**2) - np.linalg.norm(Y) ** 2) / np.linalg.norm(Y) ** 2)

    rng = np.random.default_rng(0)
    unit = space.to_unit_box(snap.X)
    y = basis.mode_samples[0] / np.sqrt(np.mean(basis.mode_samples[0] ** 2))
    grad_err = 0.0
    for _ in range(5):
        theta = np.log([rng.uniform(0.1, 1.0), rng.uniform(0.1, 10.0), rng.uniform(1e-4, 1e-2)])
        _, g = gp_log_likelihood(theta, unit, y)
        for k in range(3):
            # a smaller step is dominated by rounding in the log-determinant
            h = 1e-4
            e = np.zeros(3)
            e[k] = h
            fd = (gp_log_likelihood(theta + e, unit, y, grad=False) - gp_log_likelihood(theta - e, unit, y, grad=False)) / (2 * h)
            grad_err = max(grad_err, abs(fd - g[k]) / max(abs(g[k]), 1e-3))

    perm = rng.permutation(snap.X.shape[0])
    s_perm = fit_pgp(SnapshotSet(snap.X[perm], snap.Y_raw[perm]), space)
    Xt = mc_sample(space, 2000, 3)
    perm_err = float(np.max(np.abs(s_perm(Xt) - s121(Xt))))

    ok = recon <= 1e-10 and energy <= 1e-10 and train[121] <= 1e-3 and grad_err <= 1e-5 and perm_err <= 1e-8
    verdict(
        "C6 pGP properties",
        ok,
        f"SVD reconstruction {recon:.1e}; energy identity {energy:.1e}; "
        f"training reproduction N=121 {train[121]:.2e} m (<=1e-3; N=49 {train[49]:.2e}, N=256 {train[256]:.2e}); "
        f"gradient rel. error {grad_err:.1e} (<=1e-5); permutation {perm_err:.1e} (<=1e-8)",
    )


def test_c7_forward_model():
    Q, Ks = 3500.0, 35.0
    prof = solve_backwater(uniform_channel(Q, Ks), (Q, Ks))
    uni = float(np.max(np.abs(prof.depth - normal_depth(Q, Ks, 250.0, 0.00033))))

    coarse, fine = garonne_analog(), garonne_analog(grid_step=25.0)
    q = np.linspace(3000, 5000, 20)
    k = np.linspace(15, 60, 20)
    Qg, Kg = np.meshgrid(q, k, indexing="ij")
    X = np.column_stack([Qg.ravel(), Kg.ravel()])
    Hc = coarse(X)
    conv = float(np.max(np.abs(fine(X) - Hc)))
    H = Hc.reshape(20, 20, -1)
    mono = bool(np.all(np.diff(H, axis=0) > 0) and np.all(np.diff(H, axis=1) < 0))
    verdict(
        "C7 forward model",
        uni <= 1e-8 and conv < 1e-5 and mono,
        f"uniform channel error {uni:.1e} m (<=1e-8); grid halving {conv:.1e} m (<1e-5); "
        f"monotone in Q and Ks3 at 14 stations over 20x20 grid: {mono}",
    )


def test_c8_martinez_oracle():
    cube = InputSpace(tuple(Uniform(-1.0, 1.0) for _ in range(3)), ("x1", "x2", "x3"))

    def toy(X):
        return X[:, 0] + X[:, 1] ** 2 + 2 * X[:, 0] * X[:, 2]

    rng = np.random.default_rng(0)
    total = toy(rng.uniform(-1, 1, (200_000, 3))).var()
    loop = []
    for i in range(3):
        xi = rng.uniform(-1, 1, 400)
        Xs = rng.uniform(-1, 1, (400, 400, 3))
        Xs[:, :, i] = xi[:, None]
        vals = toy(Xs.reshape(-1, 3)).reshape(400, 400)
        loop.append((vals.mean(axis=1).var(ddof=1) - vals.var(axis=1, ddof=1).mean() / 400) / total)
    mart = martinez_sobol(toy, cube, 20_000, seed=11).first[0]
    err = float(np.max(np.abs(mart - np.array(loop))))
    verdict(
        "C8 Martinez oracle",
        err <= 0.02,
        f"Martinez {np.round(mart, 3).tolist()} vs double loop {np.round(loop, 3).tolist()}, max diff {err:.3f} (<=0.02)",
    )


def test_c9_determinism(pipeline, tmp_path):
    cfg_full, _, _ = pipeline
    outs = []
    for name in ("a", "b"):
        cfg = ex.ExperimentConfig({"n_ref": 2000, "budgets": [49, 121], "out": str(tmp_path / name)})
        ex.run_reference(cfg)
        ex.run_comparison(cfg)
        outs.append(tmp_path / name)
    same_summary = (outs[0] / "summary.json").read_bytes() == (outs[1] / "summary.json").read_bytes()
    same_inputs = (outs[0] / "inputs.csv").read_bytes() == (outs[1] / "inputs.csv").read_bytes()
    ref_again = tmp_path / "full_inputs"
    ex.run_reference(ex.ExperimentConfig({"out": str(ref_again)}), with_sobol=False)
    same_full = (ref_again / "inputs.csv").read_bytes() == (cfg_full.out / "inputs.csv").read_bytes()
    no_timing = "wall" not in json.loads((outs[0] / "summary.json").read_text())
    ok = same_summary and same_inputs and same_full and no_timing
    verdict(
        "C9 determinism",
        ok,
        f"two fresh runs (n_ref 2000, N 49/121): summary.json identical {same_summary}, inputs.csv identical "
        f"{same_inputs}; default-config inputs.csv regenerated identically {same_full}",
    )
