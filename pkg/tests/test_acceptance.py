"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from perimdef import analytics, engine
from perimdef.cli import main
from perimdef.geometry import (
    Point2,
    apollonius,
    assumption_clauses,
    validate_params,
)
from perimdef.strategy import (
    capture_circle_radius,
    capture_circle_solution,
    engagement_candidate,
    engagement_domain,
    evasion_point,
    guarded_arc,
)
from conftest import make_valid_params

BASE_ARGS = ["--r-t", "5", "--rho-t", "10", "--rho-a", "1", "--nu", "0.8"]


def _report(num: int, text: str, t0: float) -> None:
    print(f"PASS criterion {num}: {text} ({time.perf_counter() - t0:.2f}s)")


def test_criterion_1_parameter_validation():
    validate_params(5.0, 10.0, 1.0, 0.8)  # warm up
    t0 = time.perf_counter()
    params = validate_params(5.0, 10.0, 1.0, 0.8)
    elapsed = time.perf_counter() - t0
    first, second = assumption_clauses(5.0, 10.0, 1.0, 0.8)
    assert first == pytest.approx(49.0 / 9.0, abs=1e-9)
    assert second == pytest.approx(68.0 / 9.0, abs=1e-9)
    assert max(first, second) <= params.rho_t
    assert elapsed < 1e-3
    _report(1, f"baseline parameters validate (clauses {first:.3f}, {second:.3f}) "
               f"in {elapsed * 1e6:.0f}us", t0)


def test_criterion_2_closed_form_vs_dp_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(1, 20):
        p = 0.05 * k
        for n in range(1, 201):
            tails = analytics.resets_tail_all(n, p)
            pmf = analytics.markov_oracle(n, p)
            dp_tail = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
            dp_full = np.zeros(n + 1)
            dp_full[: len(dp_tail)] = dp_tail[: n + 1]
            worst = max(worst, float(np.max(np.abs(tails - dp_full))))
    assert worst <= 1e-10
    assert time.perf_counter() - t0 < 10.0
    _report(2, f"reset-count tails match the DP oracle for N<=200, "
               f"all m, 19 p values (max |diff| {worst:.2e})", t0)


def test_criterion_3_monte_carlo_reproduction(params):
    t0 = time.perf_counter()
    p = analytics.p_star(params)
    records = [engine.run_session(params, 200, seed=s + 1) for s in range(100)]
    finals = np.array([100.0 * r.n_capture / 200.0 for r in records])
    mean = float(finals.mean())
    se = float(finals.std(ddof=1)) / math.sqrt(len(finals))
    expected = analytics.expected_percentage(200, p)
    assert abs(mean - expected) <= 3.0 * se
    gap = abs(analytics.expected_percentage(2000, p) - analytics.asymptotic_percentage(p))
    assert gap <= 0.1
    assert time.perf_counter() - t0 < 30.0
    _report(3, f"100x200 Monte Carlo mean {mean:.2f}% vs analytic {expected:.2f}% "
               f"(|z| = {abs(mean - expected) / se:.2f}); horizon-2000 gap {gap:.3f}pp", t0)


def test_criterion_4_kinematic_oracle_agreement(params):
    t0 = time.perf_counter()
    report = engine.verify_outcome_agreement(
        params, 500, seed=2026, dt=1e-4, eps_capture=1e-3
    )
    assert report.n_mismatches == 0
    assert report.n_compared + report.n_boundary_skipped == 500
    assert report.max_circle_distance <= 5e-3
    assert report.max_capture_point_error <= 5e-3
    assert time.perf_counter() - t0 < 120.0
    _report(4, f"500 kinematic replays agree ({report.n_compared} compared, "
               f"{report.n_boundary_skipped} near-threshold skipped; "
               f"capture points within {report.max_circle_distance:.2e} of the circle", t0)


def test_criterion_5_geometry_property_suite(params):
    t0 = time.perf_counter()
    rng = random.Random(55)
    angles = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    cos_a, sin_a = np.cos(angles), np.sin(angles)

    # dominance-circle defining property: 1e4 random pairs x 64 boundary samples
    for _ in range(10_000):
        x_a = Point2(rng.uniform(-20, 20), rng.uniform(-20, 20))
        x_d = Point2(rng.uniform(-20, 20), rng.uniform(-20, 20))
        circle = apollonius(x_a, x_d, params)
        bx = circle.center.x + circle.radius * cos_a
        by = circle.center.y + circle.radius * sin_a
        residual = np.abs(
            np.hypot(bx - x_a.x, by - x_a.y)
            - params.nu * np.hypot(bx - x_d.x, by - x_d.y)
        )
        assert float(residual.max()) <= 1e-9 * (1.0 + x_a.distance_to(x_d))

    # engagement tangency and capture-circle landing
    inner = params.r_t + params.gamma * params.rho_a
    r_cc = capture_circle_radius(params)
    tau_lo, tau_hi = engagement_domain(params)
    for tau in np.linspace(tau_lo, tau_hi, 100):
        cand = engagement_candidate(float(tau), params)
        center = cand.x_a_eng - params.beta * params.rho_a * Point2.from_polar(1.0, cand.theta)
        assert abs(center.norm() - inner) <= 1e-9 * (1.0 + inner)
        x_p, _ = evasion_point(cand, params)
        assert abs(x_p.norm() - r_cc) <= 1e-9 * (1.0 + r_cc)

    # guarded arc non-increasing on a 200-point radius grid
    grid = np.linspace(params.rho_t / params.nu - params.r_t + 1e-9,
                       params.tsr_radius, 200)
    arcs = [guarded_arc(float(r), params) for r in grid]
    assert all(b <= a + 1e-12 for a, b in zip(arcs, arcs[1:]))

    # undetected approach on 1000 random valid configurations
    cfg_rng = random.Random(777)
    checked = 0
    while checked < 1000:
        p = make_valid_params(cfg_rng)
        sol = capture_circle_solution(p)
        r = capture_circle_radius(p)
        eng = sol.candidate.x_d_eng
        for _ in range(4):
            theta_d = cfg_rng.uniform(0.0, sol.theta_max)
            start = Point2.from_polar(r, theta_d)
            path_len = start.distance_to(eng)
            assert path_len <= sol.candidate.tau * (1 + 1e-12) + 1e-12
            t = np.linspace(0.0, sol.candidate.tau, 10_000, endpoint=False)
            travel = np.minimum(t, path_len)
            if path_len > 0.0:
                px = start.x + (eng.x - start.x) * travel / path_len
                py = start.y + (eng.y - start.y) * travel / path_len
            else:
                px, py = np.full_like(t, start.x), np.full_like(t, start.y)
            ax = p.tsr_radius - p.nu * t
            assert float(np.hypot(px - ax, py).min()) >= p.rho_a - 1e-6
            checked += 1
    _report(5, "dominance property (1e4 pairs), tangency, capture-circle landing, "
               "guarded-arc monotonicity, and 1e3 undetected approaches", t0)


def test_criterion_6_sweep_reproduction():
    t0 = time.perf_counter()
    rows = analytics.sweep(
        ("rho_a", np.linspace(0.2, 3.0, 15)),
        ("rho_t", np.linspace(4.0, 16.0, 25)),
        {"r_t": 5.0, "nu": 0.75},
        horizons=[20],
    )
    feasible = [r for r in rows if r.feasible]
    assert feasible
    for row in feasible:
        assert abs(row.percentage(20.0) - row.percentage(math.inf)) <= 5.0

    fit = None
    for target in (75.0, 80.0, 70.0):
        try:
            fit = analytics.level_set_slope(rows, target)
        except analytics.ContourNotFound:
            continue
        if 2.0 <= fit.slope <= 3.0 and fit.rel_residual <= 0.10:
            break
    assert fit is not None
    assert 2.0 <= fit.slope <= 3.0
    assert fit.rel_residual <= 0.10
    assert time.perf_counter() - t0 < 60.0
    _report(6, f"iso-percentage contour slope {fit.slope:.3f} "
               f"(rel residual {fit.rel_residual:.1%}); finite-vs-asymptotic gap <= 5pp "
               f"on {len(feasible)} feasible grid points", t0)


def test_criterion_7_determinism(params, tmp_path):
    t0 = time.perf_counter()
    # library level: session results independent of thread fan-out
    seeds = list(range(1, 33))
    sequential = [engine.run_session(params, 50, s) for s in seeds]
    for workers in (2, 8):
        with ThreadPoolExecutor(workers) as pool:
            parallel = list(pool.map(lambda s: engine.run_session(params, 50, s), seeds))
        assert parallel == sequential

    # CLI level: byte-identical files for identical config and seed
    args = ["simulate", *BASE_ARGS, "--n", "40", "--trials", "5", "--seed", "9"]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*args, "--out", str(out_a)]) == 0
    assert main([*args, "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert (tmp_path / "a_trials.csv").read_bytes() == (tmp_path / "b_trials.csv").read_bytes()
    _report(7, "thread-count-independent sessions and byte-identical CLI reruns", t0)
