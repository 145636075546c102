"""End-to-end acceptance criteria; each test records one PASS/FAIL summary line."""
import time
from dataclasses import replace

import numpy as np
import pytest

from poibinglm import glm, poibin
from poibinglm.cli import cmd_fit
from poibinglm.config import RunConfig, SplitSpec
from poibinglm.dataset import SyntheticSpec, generate_synthetic, split
from poibinglm.evaluation import (landslide_report, precinct_predictions, primary_voter_report,
                                  r2_weighted)
from poibinglm.trainer import FitConfig, fit

from conftest import ACCEPTANCE_LINES, central_diff, random_precinct

THETA_STAR = (0.2, 1.0, -0.5, 0.3)


def record(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")
    assert ok, detail


def rel_error(analytic, numeric, floor=1e-8):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    return float(np.max(np.abs(analytic - numeric) / np.maximum(np.abs(numeric), floor)))


def test_distribution_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in range(1, 13):
        for _ in range(100):
            p = rng.uniform(0, 1, n)
            pmf = poibin.pmf_dft_all(p)
            oracle = np.array([poibin.pmf_enumerate(p, k) for k in range(n + 1)])
            worst = max(worst, float(np.max(np.abs(pmf - oracle))))
    worst_sum = 0.0
    for n in (1, 13, 100, 500, 1000, 1999, 2000):
        worst_sum = max(worst_sum, abs(poibin.pmf_dft_all(rng.uniform(0, 1, n)).sum() - 1.0))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and worst_sum <= 1e-9 and elapsed < 60
    record(1, "distribution correctness", ok,
           f"max |dft-enum|={worst:.2e}, max |sum-1|={worst_sum:.2e}, {elapsed:.1f}s")


def test_gradient_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_log = worst_net = 0.0
    hidden = (1, 3, 10)
    for i in range(50):
        d = int(rng.integers(2, 7))
        pr = random_precinct(rng, int(rng.integers(20, 51)), d)
        theta = rng.normal(0, 0.5, d + 1)
        numeric = central_diff(
            lambda t: poibin.loglik_normal(glm.precinct_probs(glm.LogisticParams(t), pr), pr.D),
            theta, h=1e-5)
        worst_log = max(worst_log, rel_error(glm.grad_logistic(theta, pr).theta, numeric))

        h = hidden[i % 3]
        params = glm.NeuralParams(rng.normal(0, 0.5, (h, d)), rng.normal(0, 0.5, h),
                                  rng.normal(0, 0.5, h), float(rng.normal(0, 0.5)))
        numeric = central_diff(
            lambda v: poibin.loglik_normal(glm.precinct_probs(params.from_vector(v), pr), pr.D),
            params.to_vector(), h=1e-5)
        worst_net = max(worst_net, rel_error(glm.grad_neural(params, pr).to_vector(), numeric))
    elapsed = time.perf_counter() - start
    ok = worst_log <= 1e-4 and worst_net <= 1e-4 and elapsed < 60
    record(2, "gradient correctness", ok,
           f"max rel err logistic={worst_log:.2e}, neural={worst_net:.2e}, {elapsed:.1f}s")


def test_clt_quality():
    ns = (16, 64, 256, 1024)
    ratio_err = max(abs(poibin.lyapunov_ratio(np.full(n, 0.5)) - 1.0 / n) for n in ns)
    errs = []
    for n in ns:
        k = np.arange(n + 1)
        exact = poibin.pmf_dft_all(np.full(n, 0.5))
        errs.append(float(np.max(np.abs(exact - poibin.normal_density(k, n / 2, n / 4)))))
    ok = ratio_err <= 1e-12 and all(a > b for a, b in zip(errs, errs[1:]))
    record(3, "CLT approximation quality", ok,
           f"lyapunov err={ratio_err:.1e}, sup errors " + ", ".join(f"{e:.2e}" for e in errs))


@pytest.fixture(scope="module")
def recovery_run():
    spec = SyntheticSpec(n_precincts=1000, voters_per_precinct=200, theta=THETA_STAR)
    ds, truth = generate_synthetic(spec, seed=0)
    train, test = split(ds, "precinct", 0.7, seed=0)
    config = FitConfig(epochs=30, track_exact_loss=True, exact_subsample=50)
    start = time.perf_counter()
    report = fit(train, "logistic", config)
    return train, test, truth, report, time.perf_counter() - start


def test_synthetic_recovery(recovery_run):
    _, test, truth, report, elapsed = recovery_run
    theta = report.params.theta
    err = float(np.max(np.abs(theta - truth.theta)))
    r2 = r2_weighted(precinct_predictions(test, report.params))
    ok = err <= 0.1 and r2 >= 0.9 and elapsed < 300
    record(4, "synthetic coefficient recovery", ok,
           f"theta={np.round(theta, 3).tolist()}, max |err|={err:.3f}, "
           f"test R2={r2:.4f}, {elapsed:.1f}s")


def test_training_dynamics(recovery_run):
    _, _, _, report, _ = recovery_run
    approx = np.array(report.approx_nll)
    drop = (approx[0] - approx[-1]) / abs(approx[0])
    exact = np.diff(report.exact_nll)
    scoped = np.diff(report.exact_scope_approx_nll)
    agree = float(np.mean(np.sign(exact) == np.sign(scoped)))
    ok = len(approx) == 30 and drop >= 0.01 and agree >= 0.8
    record(5, "training dynamics", ok,
           f"approx NLL drop={100 * drop:.1f}%, exact/approx direction agreement={agree:.2f}")


def test_county_split_semantics():
    spec = SyntheticSpec(n_precincts=200, voters_per_precinct=20, n_counties=20)
    ds, _ = generate_synthetic(spec, seed=6)
    assert len(ds.counties) == 20
    violations = 0
    for seed in range(100):
        train, test = split(ds, "county", 0.7, seed)
        shared = {p.county for p in train} & {p.county for p in test}
        parts = sorted(p.key for p in train) + sorted(p.key for p in test)
        violations += bool(shared) or len(parts) != len(ds) or len(set(parts)) != len(ds)
    record(6, "county split semantics", violations == 0,
           f"{violations} violations over 100 seeded splits")


def test_weak_label_separation():
    spec = SyntheticSpec(n_precincts=1000, voters_per_precinct=200, theta=(0.0, 2.5, -1.5, 1.0))
    ds, _ = generate_synthetic(spec, seed=7)
    train, test = split(ds, "precinct", 0.7, seed=7)
    params = fit(train, "logistic", FitConfig(epochs=30)).params
    land = landslide_report(test, params, 0.9)
    prim = primary_voter_report(test, params)
    dem, rep = land.group_means["dem_landslide"], land.group_means["rep_landslide"]
    pd, po, pr = (prim.group_means["dem_primary"], prim.overall_mean,
                  prim.group_means["rep_primary"])
    ok = None not in (dem, rep, pd, pr) and dem - rep >= 0.4 and pd > po > pr
    record(7, "weak-label separation", ok,
           f"landslide means {dem:.3f}/{rep:.3f}; primary dem {pd:.3f} > all {po:.3f} > rep {pr:.3f}")


def test_determinism(tmp_path):
    base = RunConfig(synthetic=SyntheticSpec(n_precincts=200, voters_per_precinct=50),
                     synthetic_seed=3, fit=FitConfig(epochs=5, seed=3),
                     split=SplitSpec(seed=3))
    blobs = []
    for name in ("run_a", "run_b"):
        cfg = replace(base, out_dir=tmp_path / name)
        cmd_fit(cfg)
        blobs.append((tmp_path / name / "params.json").read_bytes())
    record(8, "determinism", blobs[0] == blobs[1],
           f"params.json byte-identical across runs ({len(blobs[0])} bytes)")
