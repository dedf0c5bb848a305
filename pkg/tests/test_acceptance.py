"""Acceptance gate: one test per criterion, summarised at the end of the run."""

import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from coupledtandem.bvp import bvp_metrics, bvp_solve, circle_map_error, model_map
from coupledtandem.closedform import closedform_metrics, p0_solution, p1_solution
from coupledtandem.kernel import KernelFunctions, branch_points, contour_L, poly_roots
from coupledtandem.model import ModelParams, empty_probability, is_stable, mode_probabilities
from coupledtandem.oracle import pgf_from_table, simulate, solve, oracle_metrics
from coupledtandem.psa import psa_metrics, solution_for

GRID = (0.2, 0.5, 0.8)


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.mark.criterion(1, "exact scalars")
def test_exact_scalars_and_ctmc(reference, record_property):
    start = time.perf_counter()
    p00 = empty_probability(reference)
    modes = mode_probabilities(reference)
    assert Fraction(p00).limit_denominator(1000) == Fraction(7, 24)
    assert abs(p00 - 7 / 24) <= 1e-15
    assert modes == pytest.approx((2 / 3, 1 / 3), abs=1e-15)

    m = oracle_metrics(solve(reference, 200))
    elapsed = time.perf_counter() - start
    err_p00 = abs(m.pi0_00 - 7 / 24)
    err_modes = max(abs(m.mode_probs[0] - 2 / 3), abs(m.mode_probs[1] - 1 / 3))
    record_property("detail", f"|P00-7/24|={err_p00:.1e}, modes err={err_modes:.1e}, {elapsed:.1f}s")
    assert err_p00 <= 1e-8
    assert err_modes <= 1e-8
    assert elapsed < 30


@pytest.mark.criterion(2, "end-point pgfs vs CTMC")
def test_endpoint_pgfs(reference, ctmc, record_property):
    worst = {}
    for p, route in ((0.0, p0_solution), (1.0, p1_solution)):
        params = reference.with_(p=p)
        table, _ = ctmc(params)
        err = 0.0
        for x, y in product(GRID, GRID):
            pi0, pi1 = route(x, y, params)
            err = max(err, abs(pi0 - pgf_from_table(table, x, y, 0)),
                      abs(pi1 - pgf_from_table(table, x, y, 1)))
        worst[p] = err
    record_property("detail", f"max grid error p=0: {worst[0.0]:.1e}, p=1: {worst[1.0]:.1e}")
    assert max(worst.values()) <= 1e-6


@pytest.mark.criterion(3, "series coefficient invariants")
def test_series_invariants(reference, record_property):
    sol = solution_for(reference)
    corner = max(abs(sol.v_jet(m, c, (0, 0)).value) for m in range(1, 5) for c in ((0, 0), (1, 1)))
    v0 = sol.v_jet(0, (1, 1), (0, 0)).value
    target = reference.tau / (reference.tau + reference.gamma)
    psa0 = psa_metrics(reference.with_(p=0.37), 0)
    cf = closedform_metrics("p0", reference)
    mean_err = max(abs(psa0.EQ1 - cf[0]), abs(psa0.EQ2 - cf[1]))
    record_property("detail", f"max|V_m| at corners={corner:.1e}, |V_0(1,1)-2/3|={abs(v0 - target):.1e}, "
                              f"M=0 vs p=0 means={mean_err:.1e}")
    assert corner <= 1e-9
    assert abs(v0 - target) <= 1e-10
    assert mean_err <= 1e-7


@pytest.mark.criterion(4, "series accuracy near p = 0")
def test_series_accuracy(reference, ctmc, record_property):
    start = time.perf_counter()
    parts = []
    for p in (0.05, 0.1):
        params = reference.with_(p=p)
        _, truth = ctmc(params)
        errs = {M: psa_metrics(params, M) for M in (0, 3, 5)}
        e = {M: (rel(r.EQ1, truth.EQ1), rel(r.EQ2, truth.EQ2)) for M, r in errs.items()}
        parts.append(f"p={p}: M5 {max(e[5]):.1e}, M3 {max(e[3]):.1e}, M0 {max(e[0]):.1e}")
        assert max(e[5]) <= 0.01
        for k in range(2):
            assert e[3][k] < e[0][k]
    elapsed = time.perf_counter() - start
    record_property("detail", "; ".join(parts) + f"; {elapsed:.1f}s")
    assert elapsed < 120


@pytest.mark.criterion(5, "boundary value machinery")
def test_boundary_machinery(reference, record_property):
    params = reference.with_(p=0.5)
    cm, circle_err = circle_map_error()
    residual = model_map(params).correspondence_residual()

    kf = KernelFunctions(params)
    xs = np.exp(2j * np.pi * (np.arange(32) + 0.5) / 32)
    counts = [int(np.sum(np.abs(poly_roots(kf.y_quadratic(x))) < 1)) for x in xs]

    L = contour_L(params)
    mod_err = float(np.max(np.abs(np.abs(L.points) ** 2 - L.modulus_factor * L.x_of_point)))
    br = branch_points(params)
    inner = np.linspace(br.x1, br.x2, 2001)[1:-1]
    delta_max = float(np.max(br.delta(inner)))

    record_property("detail", f"circle err={circle_err:.1e}, correspondence residual={residual:.1e}, "
                              f"root counts={sorted(set(counts))}, modulus err={mod_err:.1e}, "
                              f"max Delta on slit={delta_max:.2e}")
    assert circle_err <= 1e-12
    assert cm.correspondence_residual() <= 1e-12
    assert residual <= 1e-8
    assert counts == [1] * 32
    assert mod_err <= 1e-10
    assert delta_max < 0


@pytest.mark.criterion(6, "boundary value accuracy at p = 0.5")
def test_boundary_value_accuracy(reference, ctmc, record_property):
    params = reference.with_(p=0.5)
    start = time.perf_counter()
    sol = bvp_solve(params)
    EQ1, EQ2 = bvp_metrics(sol)
    grid_err = 0.0
    table, truth = ctmc(params)
    for x, y in product(GRID, GRID):
        pi0, pi1 = sol.pgf(x, y)
        grid_err = max(grid_err, abs(pi0 - pgf_from_table(table, x, y, 0)),
                       abs(pi1 - pgf_from_table(table, x, y, 1)))
    elapsed = time.perf_counter() - start
    e1, e2 = rel(EQ1, truth.EQ1), rel(EQ2, truth.EQ2)
    record_property("detail", f"rel err EQ1={e1:.1e}, EQ2={e2:.1e}, grid err={grid_err:.1e}, {elapsed:.1f}s")
    assert e1 <= 0.01 and e2 <= 0.01
    assert grid_err <= 1e-3
    assert elapsed < 120


@pytest.mark.criterion(7, "station-2 mean grows with the breakdown rate")
def test_breakdown_trend(reference, ctmc, record_property):
    series, truth = [], []
    for g in (1.0, 2.0, 3.0):
        params = reference.with_(p=0.2, gamma=g)
        series.append(psa_metrics(params, 3).EQ2)
        truth.append(ctmc(params)[1].EQ2)
    record_property("detail", "series " + ", ".join(f"{v:.4f}" for v in series)
                    + "; CTMC " + ", ".join(f"{v:.4f}" for v in truth))
    assert series[0] < series[1] < series[2]
    assert truth[0] < truth[1] < truth[2]


def random_stable_sets(count: int, seed: int, min_slack: float = 0.3):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        params = ModelParams(lambda0=rng.uniform(0.3, 1.5), lambda1=rng.uniform(0.0, 1.0),
                             nu1=rng.uniform(2.0, 6.0), nu2=rng.uniform(2.0, 6.0),
                             gamma=rng.uniform(0.5, 3.0), tau=rng.uniform(2.0, 6.0),
                             p=rng.uniform(0.05, 0.95))
        if is_stable(params) and empty_probability(params) / mode_probabilities(params)[0] >= min_slack:
            out.append(params)
    return out


@pytest.mark.criterion(8, "simulator agrees with CTMC and is reproducible")
def test_simulator(ctmc, record_property):
    misses = []
    for i, params in enumerate(random_stable_sets(5, seed=2026)):
        table, truth = ctmc(params)
        sim = simulate(params, horizon=1e5, seed=i + 1)
        exact = {"EQ1": truth.EQ1, "EQ2": truth.EQ2,
                 "mode0_fraction": float(table.probs[0].sum()), "empty_fraction": truth.pi0_00}
        for name, value in exact.items():
            est = getattr(sim, name)
            if not est.covers(value):
                misses.append(f"set {i} {name}: {value:.5f} outside [{est.low:.5f}, {est.high:.5f}]")
    params = random_stable_sets(1, seed=2026)[0]
    same = simulate(params, horizon=2e4, seed=7).to_csv() == simulate(params, horizon=2e4, seed=7).to_csv()
    record_property("detail", f"{20 - len(misses)}/20 CIs cover; byte-identical rerun={same}"
                    + ("; " + "; ".join(misses) if misses else ""))
    assert same
    assert not misses


@pytest.mark.criterion(9, "routes agree at p = 0.1")
def test_cross_route(reference, ctmc, record_property):
    params = reference.with_(p=0.1)
    routes = {
        "series": tuple(getattr(psa_metrics(params, 6), k) for k in ("EQ1", "EQ2")),
        "bvp": bvp_metrics(bvp_solve(params)),
        "ctmc": (ctmc(params)[1].EQ1, ctmc(params)[1].EQ2),
    }
    worst = 0.0
    names = list(routes)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            for k in range(2):
                worst = max(worst, rel(routes[a][k], routes[b][k]))
    record_property("detail", f"largest pairwise relative gap={worst:.1e}")
    assert worst <= 0.02
