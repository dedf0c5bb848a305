import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from coupledtandem.closedform import p0_pi0
from coupledtandem.jets import Jet1
from coupledtandem.kernel import KernelFunctions
from coupledtandem.model import ModelParams, empty_probability, is_stable
from coupledtandem.psa import OrderBudgetError, PsaSolution, psa_metrics, solution_for

GRID = [(0.2, 0.3), (0.5, 0.5), (-0.4, 0.7), (0.6 + 0.3j, 0.1 - 0.4j)]


@st.composite
def stable_rates(draw):
    params = ModelParams(
        lambda0=draw(st.floats(0.2, 1.5)), lambda1=draw(st.floats(0.0, 1.0)),
        nu1=draw(st.floats(2.0, 6.0)), nu2=draw(st.floats(2.0, 6.0)),
        gamma=draw(st.floats(0.5, 3.0)), tau=draw(st.floats(2.0, 6.0)), p=0.0)
    assume(is_stable(params))
    return params


@settings(max_examples=15, deadline=None)
@given(stable_rates())
def test_corner_values(params):
    sol = PsaSolution(params)
    assert sol.v_jet(0, (0, 0), (0, 0)).value == pytest.approx(empty_probability(params), abs=1e-13)
    total = sol.v_jet(0, (1, 1), (0, 0)).value
    assert total == pytest.approx(params.tau / (params.tau + params.gamma), abs=1e-10)
    for m in range(1, 4):
        assert abs(sol.v_jet(m, (0, 0), (0, 0)).value) < 1e-10
        assert abs(sol.v_jet(m, (1, 1), (0, 0)).value) < 1e-10


@settings(max_examples=10, deadline=None)
@given(stable_rates())
def test_leading_term_is_the_priority_system(params):
    sol = PsaSolution(params)
    for x, y in GRID:
        assert sol.pgf(x, y, 0.3, 0) == pytest.approx(p0_pi0(x, y, params), abs=1e-10)


def functional_residual(params, M, x, y):
    sol = solution_for(params)
    kf = KernelFunctions(params)
    p = params.p
    pi = sol.pgf(x, y, p, M)
    bx = sol.pgf(x, 0.0, p, M)
    by = sol.pgf(0.0, y, p, M)
    lhs = kf.H(x, y) * pi
    rhs = kf.D(x) * (kf.A(x, y) * bx + kf.B(x, y) * by + kf.C(x, y) * empty_probability(params))
    return abs(lhs - rhs)


def test_functional_equation_residual_shrinks_like_a_power_of_p(reference):
    params = reference.with_(p=0.05)
    for x, y in GRID:
        r = [functional_residual(params, M, x, y) for M in (1, 3, 5)]
        assert r[1] < 25 * 0.05 ** 2 * r[0]
        assert r[2] < 25 * 0.05 ** 2 * r[1]


def test_truncation_error_decreases_with_order(reference, ctmc):
    params = reference.with_(p=0.05)
    _, truth = ctmc(params)
    errs = [abs(psa_metrics(params, M).EQ1 - truth.EQ1) for M in range(6)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_means_grow_with_arrival_rate(reference):
    values = [psa_metrics(reference.with_(p=0.1, lambda0=l0), 5) for l0 in (0.6, 0.8, 1.0, 1.2)]
    assert all(b.EQ1 > a.EQ1 and b.EQ2 > a.EQ2 for a, b in zip(values, values[1:]))


def test_normalisation(reference):
    sol = solution_for(reference)
    g = reference.gamma / reference.tau
    for M in range(5):
        assert sol.pgf(1, 1, 0.3, M) * (1 + g) == pytest.approx(1.0, abs=1e-12)
        assert sol.pgf(1, 1, 0.3, M, mode=1) == pytest.approx(g * sol.pgf(1, 1, 0.3, M), abs=1e-12)


def test_coefficients_are_polynomials_in_y(reference):
    sol = solution_for(reference)
    for m in range(3):
        j = sol.v_jet(m, (0.4, 0.2), (0, m + 4))
        assert np.all(j.coeffs[:, m + 2:] == 0)
        assert abs(j.coeffs[0, m + 1]) > 0


def test_order_budget_is_enforced(reference):
    sol = PsaSolution(reference, max_order=4)
    with pytest.raises(OrderBudgetError, match="increase order budget"):
        sol.v_jet(0, (0.5, 0.5), (6, 1))


def test_boundary_function_is_smooth_through_the_removable_point(reference):
    sol = solution_for(reference)
    at = sol.v0_boundary_jet(1.0, 3)
    near = sol.v0_boundary_jet(1.0 - 1e-4, 3)
    assert at.value == pytest.approx(near.value, abs=1e-3)
    assert isinstance(at, Jet1)


def test_csv_columns(reference):
    text = psa_metrics(reference.with_(p=0.1), 2).to_csv().splitlines()
    assert text[0] == "p,M,EQ1,EQ2,v_m1_0,v_m1_1,v_m1_2,v_m2_0,v_m2_1,v_m2_2"
    assert len(text[1].split(",")) == 10


def test_rejects_orders_beyond_the_maximum(reference):
    with pytest.raises(ValueError):
        psa_metrics(reference.with_(p=0.1), 99)
