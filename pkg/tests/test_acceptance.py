"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import REFERENCE_DFS, REFERENCE_SEED, random_density, record_criterion
from hellinger_invariant.cli import main
from hellinger_invariant.density import EmpiricalDensity
from hellinger_invariant.hellinger import hellinger_sq, hellinger_sq_quadrature_oracle
from hellinger_invariant.market_data import SimulationSpec, simulate_student_market
from hellinger_invariant.markowitz import check_weights, feasible_return_range, solve_min_variance
from hellinger_invariant.optimizer import (
    OptimizerConfig,
    frontier_scan,
    project_to_constraint_set,
    solve_min_hellinger,
)
from hellinger_invariant.sensitivity import (
    PerturbationSpec,
    perturb_returns,
    perturbed_count,
    sensitivity_binning,
    sensitivity_perturbation,
)
from hellinger_invariant.stats_core import NormalTarget, sample_mean_cov
from test_hellinger import random_target
from test_markowitz import random_instance, slice_grid
from test_optimizer import slice_sweep

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def reference_scan(student_market):
    t0 = time.perf_counter()
    rep = frontier_scan(student_market, 50, OptimizerConfig())
    return rep, time.perf_counter() - t0


def test_criterion_1_closed_form_matches_quadrature():
    rng = np.random.default_rng(20240101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        edges, amps = random_density(rng)
        f = EmpiricalDensity(edges, amps)
        target = random_target(rng, edges)
        worst = max(worst, abs(hellinger_sq(f, target) - hellinger_sq_quadrature_oracle(f, target)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30
    record_criterion(1, ok, f"max |closed form - quadrature| = {worst:.3e} over 1000 pairs, {elapsed:.1f} s")
    assert ok


def test_criterion_2_markowitz_against_grid():
    t0 = time.perf_counter()
    worst_gap = -math.inf
    for seed in range(20):
        mean, cov, e = random_instance(1000 + seed)
        w, var = solve_min_variance(mean, cov, e)
        check_weights(w, mean, e)
        assert var == pytest.approx(w @ cov @ w, rel=1e-12)
        grid = slice_grid(mean, e, 1e-3)
        brute = np.einsum("ij,jk,ik->i", grid, cov, grid).min()
        worst_gap = max(worst_gap, (var - brute) / abs(brute))
    elapsed = time.perf_counter() - t0
    ok = worst_gap <= 1e-4 and elapsed < 60
    record_criterion(2, ok, f"worst (solver - grid) / grid = {worst_gap:.3e} on 20 instances, {elapsed:.1f} s")
    assert ok


def test_criterion_3_hellinger_optimizer_against_grid():
    t0 = time.perf_counter()
    worst_gap = -math.inf
    for seed in range(1000, 1005):
        data = simulate_student_market(SimulationSpec((4, 3, 2), 500, seed))
        mean, cov = sample_mean_cov(data)
        lo, hi = feasible_return_range(mean)
        bins = math.ceil(math.sqrt(500))
        for e in np.linspace(lo, hi, 5)[1:4]:
            w_mv, var = solve_min_variance(mean, cov, e)
            target = NormalTarget(float(e), var)
            w, h2 = solve_min_hellinger(data, e, target, mv_weights=w_mv)
            check_weights(w, mean, e)
            worst_gap = max(worst_gap, h2 - slice_sweep(data.returns, mean, e, target, bins))
    elapsed = time.perf_counter() - t0
    ok = worst_gap <= 1e-4 and elapsed < 300
    record_criterion(3, ok, f"worst h2 - grid minimum = {worst_gap:.3e} over 15 problems, {elapsed:.1f} s")
    assert ok


def test_criterion_4_table1_band(reference_scan):
    rep, elapsed = reference_scan
    h2 = rep.invariant_h2
    ok = 0.003 <= h2 <= 0.06 and elapsed < 300
    record_criterion(4, ok, f"invariant_h2 = {h2!r} (band [0.003, 0.06]), {elapsed:.1f} s")
    assert ok


def test_criterion_5_gaussian_limit(reference_scan):
    gauss = simulate_student_market(SimulationSpec((math.inf,) * len(REFERENCE_DFS), 100_000, REFERENCE_SEED))
    h2 = frontier_scan(gauss, 50, OptimizerConfig()).invariant_h2
    student = reference_scan[0].invariant_h2
    ok = h2 < 0.01 and h2 < student
    record_criterion(5, ok, f"Gaussian invariant_h2 = {h2!r} (< 0.01 and < Student-t {student!r})")
    assert ok


def test_criterion_6_table2_band(student_market):
    t0 = time.perf_counter()
    rep = sensitivity_perturbation(student_market, PerturbationSpec(0.05, 0.05, 100, REFERENCE_SEED), 50,
                                   OptimizerConfig())
    elapsed = time.perf_counter() - t0
    ok = 0.5 <= rep.mean_pct_change <= 15 and rep.mean_abs_change < 5e-3 and elapsed < 600
    record_criterion(6, ok, f"pct = {rep.mean_pct_change:.3f}% (band [0.5, 15]), abs = {rep.mean_abs_change:.3e} "
                            f"(< 5e-3), 100 replications, {rep.failed_replications} failed, {elapsed:.1f} s")
    assert ok


def test_criterion_7_table3_band(student_market):
    rep = sensitivity_binning(student_market, "auto", 50, OptimizerConfig())
    ok = 1 <= rep.mean_pct_change <= 40
    record_criterion(7, ok, f"pct = {rep.mean_pct_change:.3f}% (band [1, 40]), bins {rep.details['bin_count']} "
                            f"vs {rep.details['compared_bin_counts']}")
    assert ok


def _property_sweep():
    """Randomized checks of the module invariants; returns the number of cases run."""
    rng = np.random.default_rng(8)
    cases = 0
    for _ in range(200):
        edges, amps = random_density(rng)
        f = EmpiricalDensity(edges, amps)
        h2 = hellinger_sq(f, random_target(rng, edges))
        assert -1e-9 <= h2 <= 1 + 1e-9
        cases += 1
    for _ in range(200):
        n = int(rng.integers(2, 8))
        a = rng.normal(size=(n, n))
        cov = a @ a.T / n + 0.01 * np.eye(n)
        mean = rng.normal(0, 0.1, n)
        lo, hi = feasible_return_range(mean)
        e = rng.uniform(lo, hi)
        w, var = solve_min_variance(mean, cov, e)
        check_weights(w, mean, e)
        assert var >= 0
        check_weights(project_to_constraint_set(rng.normal(size=n), mean, e), mean, e)
        cases += 2
    base = simulate_student_market(SimulationSpec((3, 5), 60, 4))
    for r in range(200):
        spec = PerturbationSpec(float(rng.uniform(0.01, 1.0)), float(rng.uniform(0, 1)), 1, int(rng.integers(2**63)))
        out = perturb_returns(base, spec, r)
        assert np.count_nonzero(out.returns != base.returns) <= perturbed_count(spec, base.returns.size)
        cases += 1
    return cases


def test_criterion_8_invariants_and_determinism(tmp_path, capsys):
    cases = _property_sweep()

    data = simulate_student_market(SimulationSpec((4, 3, 2), 300, 21))
    a = frontier_scan(data, 8, OptimizerConfig())
    b = frontier_scan(data, 8, OptimizerConfig())
    assert a.invariant_h2 == b.invariant_h2 and a.argmin_e == b.argmin_e
    for p, q in zip(a.frontier, b.frontier):
        assert p.hellinger_sq_min == q.hellinger_sq_min
        assert np.array_equal(p.hellinger_weights, q.hellinger_weights)
        assert a.invariant_h2 <= p.hellinger_sq_min
    prev = math.inf
    for m in (1, 2, 4, 8):
        h2 = frontier_scan(data, 8, OptimizerConfig(multistart_count=m)).invariant_h2
        assert h2 <= prev
        prev = h2

    paths = [tmp_path / "first.json", tmp_path / "second.json"]
    for p in paths:
        assert main(["invariant", "--simulate", "dfs=4,3,3,2,T=400", "--seed", "7", "--grid", "6",
                     "--jobs", "1", "--format", "json", "--output", str(p)]) == 0
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    capsys.readouterr()
    record_criterion(8, identical, f"{cases} randomized property cases, frontier scan deterministic, "
                                   f"start-count monotone, CLI JSON byte-identical: {identical}")
    assert identical
