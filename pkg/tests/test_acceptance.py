"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from scn2d.cli import main
from scn2d.configurator import TWOD, TrainConfig, train_scn
from scn2d.data import synth_matrix_regression
from scn2d.generalization import (PerturbationSpec, directional_derivative, indicator_theta_raw,
                                  normalize_indicators, perturb_inputs, saturation_matrix,
                                  test_error_bound as error_bound)
from scn2d.linalg import least_squares
from scn2d.metrics import rmse
from scn2d.model import Network, Provenance, TwoDNode, hidden_matrix, predict, to_oned
from scn2d.rvfl import train_rvfl
from scn2d.weight_stats import METHODS, TABLE_PS, TABLE_TAUS, estimate_grid

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def pool():
    with ThreadPoolExecutor(4) as ex:
        yield ex


_GRIDS = {}


def _grid(dist, pool):
    """Full 100k-trial grid; returns (grid, seconds), cached for the module."""
    if dist not in _GRIDS:
        t0 = time.perf_counter()
        grid = estimate_grid(dist, trials=100_000, seed=0, executor=pool)
        _GRIDS[dist] = grid, time.perf_counter() - t0
    return _GRIDS[dist]


def _cells(grid, tau, p):
    return {m: grid[m, tau, p].p_hat for m in METHODS}


def _ordered(grid):
    bad = []
    for tau in TABLE_TAUS:
        for p in TABLE_PS:
            c = _cells(grid, tau, p)
            if not c["M3"] >= c["M2"] >= c["M1"]:
                bad.append((tau, p, c))
    return bad


def test_c1_uniform_sparsity_table(verdict, pool):
    grid, elapsed = _grid("uniform_pm1", pool)
    a, b = _cells(grid, 0.01, 0.08), _cells(grid, 0.005, 0.10)
    checks = {
        "M3(8%,0.01)": abs(a["M3"] - 0.4022) <= 0.02,
        "M2(8%,0.01)": abs(a["M2"] - 0.2838) <= 0.02,
        "M1(8%,0.01)": grid["M1", 0.01, 0.08].hits == 0,
        "M3(10%,0.005)": abs(b["M3"] - 0.0160) <= 0.005,
        "runtime": elapsed < 120,
    }
    detail = (f"M3={a['M3']:.4f} M2={a['M2']:.4f} M1={a['M1']:g} at (8%,0.01); "
              f"M3={b['M3']:.4f} at (10%,0.005); {elapsed:.1f}s; failing: "
              + (", ".join(k for k, ok in checks.items() if not ok) or "none"))
    verdict(1, "uniform sparsity table", all(checks.values()), detail)


def test_c2_gaussian_sparsity_table(verdict, pool):
    grid, _ = _grid("standard_normal", pool)
    uniform, _ = _grid("uniform_pm1", pool)
    a = _cells(grid, 0.01, 0.08)
    unordered = _ordered(grid) + _ordered(uniform)
    checks = {
        "M3(8%,0.01)": abs(a["M3"] - 0.1781) <= 0.02,
        "M2(8%,0.01)": abs(a["M2"] - 4.6e-4) <= 3e-4,
        "M1(8%,0.01)": grid["M1", 0.01, 0.08].hits == 0,
        "ordering": not unordered,
    }
    detail = (f"M3={a['M3']:.4f} M2={a['M2']:.2e} M1={a['M1']:g} at (8%,0.01); "
              f"cells out of order: {len(unordered)}; failing: "
              + (", ".join(k for k, ok in checks.items() if not ok) or "none"))
    verdict(2, "gaussian sparsity table", all(checks.values()), detail)


def test_c3_geometric_residual_decay(verdict):
    violations, nodes = [], 0
    for seed in range(20):
        train, _ = synth_matrix_regression(100, 8, 8, k=3, noise_sd=0.05, seed=seed)
        _, rep = train_scn(train.inputs, train.targets, TrainConfig(L_max=50, seed=seed), TWOD)
        hist = rep.residual_history
        if any(b > a for a, b in zip(hist, hist[1:])):
            violations.append((seed, "residual increased"))
        for L in range(1, rep.n_nodes + 1):
            prev, cur = rep.column_sq_residuals[L - 1], rep.column_sq_residuals[L]
            if np.any(cur > rep.accepted_r[L - 1] * prev + 1e-9):
                violations.append((seed, L))
        nodes += rep.n_nodes
    verdict(3, "geometric residual decay", not violations,
            f"{nodes} accepted nodes over 20 tasks, {len(violations)} violations")


def test_c4_two_d_one_d_equivalence(verdict):
    g = np.random.default_rng(4)
    worst = 0.0
    # a blindly drawn network and a trained one
    nodes = [TwoDNode(g.uniform(-3, 3, 9), g.uniform(-3, 3, 7), g.uniform(-3, 3)) for _ in range(40)]
    nets = [Network((9, 7), nodes, g.normal(size=(40, 3)), Provenance("2DRVFL", 4))]
    train, _ = synth_matrix_regression(200, 9, 7, k=3, noise_sd=0.05, seed=4)
    nets.append(train_scn(train.inputs, train.targets, TrainConfig(L_max=30, seed=4))[0])
    X = g.uniform(-1, 1, (1000, 9, 7))
    for net in nets:
        twin = to_oned(net)
        worst = max(worst, float(np.max(np.abs(predict(net, X) - predict(twin, X)))))
    verdict(4, "2-D / 1-D equivalence", worst <= 1e-12, f"max |difference| = {worst:.2e}")


def test_c5_least_squares_oracle(verdict):
    g = np.random.default_rng(5)
    worst_wc, worst_rd = 0.0, 0.0
    for _ in range(100):
        m = int(g.integers(1, 4))
        H, T = g.normal(size=(20, 5)), g.normal(size=(20, m))
        oracle = np.linalg.solve(H.T @ H, H.T @ T)
        worst_wc = max(worst_wc, float(np.max(np.abs(least_squares(H, T) - oracle))))
    for _ in range(50):
        # rank 3 system with a known null space
        B = g.normal(size=(3, 5))
        H, T = g.normal(size=(20, 3)) @ B, g.normal(size=(20, 2))
        null = np.linalg.qr(B.T, mode="complete")[0][:, 3:]
        beta = least_squares(H, T)
        normal_eq = np.max(np.abs(H.T @ (H @ beta - T)))
        in_null = np.max(np.abs(null.T @ beta))
        worst_rd = max(worst_rd, float(normal_eq), float(in_null))
    ok = worst_wc <= 1e-8 and worst_rd <= 1e-8
    verdict(5, "least-squares oracle", ok,
            f"well-conditioned max error {worst_wc:.1e}; rank-deficient optimality/min-norm {worst_rd:.1e}")


def _taylor_instance(g):
    d1, d2, L, N = int(g.integers(2, 6)), int(g.integers(2, 6)), int(g.integers(3, 12)), 30
    nodes = [TwoDNode(g.uniform(-1, 1, d1), g.uniform(-1, 1, d2), g.uniform(-1, 1)) for _ in range(L)]
    net = Network((d1, d2), nodes, g.normal(size=(L, 1)), Provenance("2DRVFL", 0))
    return net, g.uniform(0, 1, (N, d1, d2)), g.normal(size=(N, d1 * d2))


def test_c6_taylor_remainder(verdict):
    g = np.random.default_rng(6)
    etas = 1e-2 / 2.0 ** np.arange(11)   # 1e-2 down to about 1e-5
    ratios = []
    for _ in range(20):
        net, X, Z = _taylor_instance(g)
        H0, dH = hidden_matrix(net.nodes, X), directional_derivative(net, X, Z)
        rem = [np.linalg.norm(hidden_matrix(net.nodes, perturb_inputs(net, X, Z, eta)) - H0 - eta * dH)
               for eta in etas]
        ratios += [a / b for a, b in zip(rem, rem[1:])]
    ratios = np.array(ratios)
    ok = bool(np.all((ratios >= 3.5) & (ratios <= 4.5)))
    verdict(6, "Taylor remainder", ok,
            f"{ratios.size} halving pairs, ratio range [{ratios.min():.3f}, {ratios.max():.3f}]")


def test_c7_bound_validity(verdict):
    g = np.random.default_rng(7)
    worst_gap, cs_fail, cases = -np.inf, 0, 0
    for seed in range(10):
        train, _ = synth_matrix_regression(80, 6, 5, k=3, noise_sd=0.05, seed=seed)
        net, _ = train_scn(train.inputs, train.targets, TrainConfig(L_max=30, seed=seed))
        for _ in range(3):
            Z = g.normal(size=(80, 30))
            lhs = np.linalg.norm(directional_derivative(net, train.inputs, Z))
            rhs = np.max(np.linalg.norm(Z, axis=1)) * np.linalg.norm(saturation_matrix(net, train.inputs))
            cs_fail += int(lhs > rhs * (1 + 1e-12))
            for eta in (1e-3, 3e-4, 1e-4, 1e-5):
                measured = np.linalg.norm(predict(net, perturb_inputs(net, train.inputs, Z, eta))
                                          - train.targets)
                bound = error_bound(net, train.inputs, train.targets, PerturbationSpec(eta, Z))
                worst_gap = max(worst_gap, measured - bound)
                cases += 1
    ok = worst_gap <= 1e-6 and cs_fail == 0
    verdict(7, "error bound validity", ok,
            f"{cases} cases, max(measured - bound) = {worst_gap:.3e}; Cauchy-Schwarz failures {cs_fail}")


def test_c8_qualitative_ordering(verdict):
    t0 = time.perf_counter()
    scn_rmse, rv_rmse, raws = [], [], []
    for seed in range(10):
        train, test = synth_matrix_regression(500, 16, 16, k=5, noise_sd=0.05, seed=seed)
        scn, _ = train_scn(train.inputs, train.targets, TrainConfig(L_max=200, seed=seed), TWOD)
        rv = train_rvfl(train.inputs, train.targets, 200, lam=1.0, kind="OneD", seed=seed)
        scn_rmse.append(rmse(predict(scn, test.inputs), test.targets))
        rv_rmse.append(rmse(predict(rv, test.inputs), test.targets))
        raws += [indicator_theta_raw(scn, train.inputs), indicator_theta_raw(rv, train.inputs)]
    theta = np.array(normalize_indicators(raws))   # pooled across all 20 models
    th_scn, th_rv = theta[0::2].mean(), theta[1::2].mean()
    elapsed = time.perf_counter() - t0
    checks = {"rmse": np.mean(scn_rmse) <= np.mean(rv_rmse), "theta": th_scn <= th_rv,
              "runtime": elapsed < 600}
    detail = (f"mean test RMSE 2DSCN {np.mean(scn_rmse):.4f} vs RVFL {np.mean(rv_rmse):.4f}; "
              f"mean Theta 2DSCN {th_scn:.4f} vs RVFL {th_rv:.4f}; {elapsed:.0f}s; failing: "
              + (", ".join(k for k, ok in checks.items() if not ok) or "none"))
    verdict(8, "2DSCN vs RVFL ordering", all(checks.values()), detail)


def test_c9_cli_determinism(verdict, tmp_path):
    data = ["--data", "synth", "--n", "150", "--d1", "8", "--d2", "8", "--k", "3"]

    def run(tag, threads):
        out = tmp_path / tag
        files = []
        for algo in ("2dscn", "scn", "2drvfl", "rvfl"):
            assert main(["train", "--algo", algo, *data, "--L", "25", "--seed", "11",
                         "--threads", str(threads), "--out-dir", str(out)]) == 0
            files.append(out / f"model-{algo}-seed11.json")
        files += [out / "report-2dscn-seed11.csv", out / "report-scn-seed11.csv"]
        assert main(["stats", "--trials", "5000", "--seed", "11", "--threads", str(threads),
                     "--format", "csv", "--out", str(out / "stats.csv")]) == 0
        assert main(["indicator", "--models", *map(str, files[:4]), *data, "--seed", "11",
                     "--threads", str(threads), "--out", str(out / "indicator.csv")]) == 0
        files += [out / "stats.csv", out / "indicator.csv"]
        return [f.read_bytes() for f in files]

    first, again, threaded = run("a", 1), run("b", 1), run("c", 4)
    # indicator rows name the model path, which differs per output directory
    strip = lambda blobs: blobs[:-1] + [b"\n".join(l.split(b",", 1)[-1] for l in blobs[-1].split(b"\n"))]
    same = strip(first) == strip(again) == strip(threaded)
    verdict(9, "CLI determinism", same, f"{len(first)} outputs compared across 3 runs (threads 1, 1, 4)")
