import numpy as np
import pytest

from coupledtandem.model import REFERENCE_PARAMS
from coupledtandem.oracle import TruncationError, build_generator, oracle_metrics, pgf_from_table, simulate, solve


def test_generator_rows_sum_to_zero():
    chain = build_generator(REFERENCE_PARAMS, 20)
    assert np.abs(np.asarray(chain.Q.sum(axis=1))).max() < 1e-12


@pytest.mark.parametrize("p", [0.0, 0.5, 1.0])
def test_stationary_table(p):
    table = solve(REFERENCE_PARAMS.with_(p=p), 120)
    assert table.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert table.residual < 1e-12
    assert table.boundary_mass < 1e-8
    assert pgf_from_table(table, 1.0, 1.0) == pytest.approx(2 / 3, abs=1e-9)


def test_truncation_escalates_or_reports():
    heavy = REFERENCE_PARAMS.with_(lambda0=1.8)
    with pytest.raises(TruncationError, match="increase N"):
        solve(heavy, 30, auto_escalate=False)
    assert solve(heavy, 30).N > 30


def test_truncation_level_does_not_matter_once_converged():
    a = oracle_metrics(solve(REFERENCE_PARAMS, 120))
    b = oracle_metrics(solve(REFERENCE_PARAMS, 200))
    assert a.EQ1 == pytest.approx(b.EQ1, rel=1e-10)
    assert a.EQ2 == pytest.approx(b.EQ2, rel=1e-10)


def test_simulation_is_reproducible():
    a = simulate(REFERENCE_PARAMS, horizon=5e3, seed=11)
    b = simulate(REFERENCE_PARAMS, horizon=5e3, seed=11)
    c = simulate(REFERENCE_PARAMS, horizon=5e3, seed=12)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != c.to_csv()
    assert a.to_csv().splitlines()[0] == "metric,mean,ci_low,ci_high"


def test_simulation_brackets_the_ctmc(ctmc):
    _, truth = ctmc(REFERENCE_PARAMS)
    sim = simulate(REFERENCE_PARAMS, horizon=5e4, seed=5)
    for est, value in ((sim.EQ1, truth.EQ1), (sim.EQ2, truth.EQ2), (sim.empty_fraction, 7 / 24),
                       (sim.mode0_fraction, 2 / 3)):
        assert abs(est.mean - value) < 4 * est.half_width
