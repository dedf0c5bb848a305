import pytest
from hypothesis import given, strategies as st

from coupledtandem.model import (REFERENCE_PARAMS, ModelParams, UnstableError, empty_probability, is_stable,
                                 load_profile, mode_probabilities, stability_check)


def test_reference_scalars():
    assert empty_probability(REFERENCE_PARAMS) == pytest.approx(7 / 24, abs=1e-15)
    assert mode_probabilities(REFERENCE_PARAMS) == pytest.approx((2 / 3, 1 / 3), abs=1e-15)
    assert load_profile(REFERENCE_PARAMS).margin == pytest.approx(1.75, abs=1e-15)


def test_instability_is_reported():
    heavy = REFERENCE_PARAMS.with_(lambda0=3.0)
    assert stability_check(heavy)[0] is False
    with pytest.raises(UnstableError):
        empty_probability(heavy)


def test_zero_margin_counts_as_unstable():
    edge = REFERENCE_PARAMS.with_(lambda0=2.0, lambda1=0.0, nu1=4.0, nu2=4.0)
    assert stability_check(edge) == (False, 0.0)
    assert not is_stable(edge)


@pytest.mark.parametrize("bad", [{"nu1": 0.0}, {"p": 1.5}, {"lambda1": -1.0}, {"tau": float("nan")}])
def test_invalid_parameters(bad):
    with pytest.raises(ValueError):
        REFERENCE_PARAMS.with_(**bad)


def test_dict_round_trip_and_validation():
    assert ModelParams.from_json(REFERENCE_PARAMS.to_json()) == REFERENCE_PARAMS
    with pytest.raises(ValueError, match="unknown"):
        ModelParams.from_dict({**REFERENCE_PARAMS.to_dict(), "rho": 1})
    with pytest.raises(ValueError, match="missing"):
        ModelParams.from_dict({"p": 0.5})
    with pytest.raises(ValueError, match="number"):
        ModelParams.from_dict({**REFERENCE_PARAMS.to_dict(), "p": "half"})


@given(st.floats(0.1, 3.0), st.floats(0.0, 2.0), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_empty_probability_is_the_scaled_margin(l0, l1, g, t):
    params = REFERENCE_PARAMS.with_(lambda0=l0, lambda1=l1, gamma=g, tau=t)
    if not is_stable(params):
        return
    prob = empty_probability(params)
    assert 0 < prob < mode_probabilities(params)[0]
    assert prob == pytest.approx(load_profile(params).margin / (t + g), rel=1e-12)
