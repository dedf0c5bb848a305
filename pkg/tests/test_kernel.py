import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from numpy.polynomial import polynomial as P

from coupledtandem.kernel import (KernelFunctions, branch_points, contour_L, count_zeros_in_disk, poly_roots,
                                  s_of_y, u_of_y, x_roots, y_roots)
from coupledtandem.model import ModelParams, is_stable

CIRCLE = np.exp(2j * np.pi * (np.arange(32) + 0.5) / 32)


@st.composite
def stable_params(draw, p_low=0.05, p_high=0.95):
    params = ModelParams(
        lambda0=draw(st.floats(0.2, 2.0)), lambda1=draw(st.floats(0.0, 1.5)),
        nu1=draw(st.floats(1.0, 8.0)), nu2=draw(st.floats(1.0, 8.0)),
        gamma=draw(st.floats(0.2, 4.0)), tau=draw(st.floats(0.5, 6.0)),
        p=draw(st.floats(p_low, p_high)))
    assume(is_stable(params))
    return params


points = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


@given(stable_params(), points, points)
def test_coefficient_identities(params, x, y):
    kf = KernelFunctions(params)
    p = params.p
    assert kf.B(x, y) == pytest.approx(-p / (1 - p) * kf.A(x, y), abs=1e-9)
    # H splits into the p-free part x G and a multiple of F
    assert kf.H(x, y) == pytest.approx(x * kf.G(x, y) - p * kf.D(x) * kf.F(x, y), abs=1e-8)
    assert kf.xG10(x, y) == pytest.approx(kf.D(x) * kf.F(x, y), abs=1e-8)
    a0, a1, a2 = kf.y_quadratic(x)
    assert a2 * y * y + a1 * y + a0 == pytest.approx(kf.H(x, y), abs=1e-8)
    assert P.polyval(x, kf.x_cubic(y)) == pytest.approx(kf.H(x, y), abs=1e-8)


@given(stable_params(), st.floats(-1.0, 1.0))
def test_discriminant_polynomial(params, x):
    kf = KernelFunctions(params)
    assert P.polyval(x, kf.delta_poly()) == pytest.approx(kf.delta(x), rel=1e-9, abs=1e-9)
    p = params.p
    assert kf.delta(1.0) == pytest.approx(params.tau ** 2 * (p * params.nu1 - (1 - p) * params.nu2) ** 2,
                                          rel=1e-10, abs=1e-10)


def test_reference_values(reference):
    kf = KernelFunctions(reference)
    assert kf.y_tilde(1.0) == pytest.approx(1.0, abs=1e-15)
    assert kf.y_tilde(0.0) == pytest.approx(22.5 / 28, abs=1e-15)
    assert s_of_y(0.5, reference) == pytest.approx(1 / 6.5, abs=1e-15)


@settings(max_examples=30)
@given(stable_params())
def test_root_below_unit_modulus_for_the_linear_kernel(params):
    kf = KernelFunctions(params)
    assert np.all(np.abs(kf.y_tilde(CIRCLE)) < 1)


@settings(max_examples=30, deadline=None)
@given(stable_params())
def test_one_kernel_root_in_the_disk(params):
    for z in CIRCLE:
        y_roots(z, params)  # strict mode raises unless exactly one root is inside
        x_roots(z, params)


@settings(max_examples=20, deadline=None)
@given(stable_params())
def test_one_reduced_root_in_the_disk(params):
    q = params.with_(p=1.0)
    assume(is_stable(q))
    kf = KernelFunctions(q)
    for y in CIRCLE:
        assert count_zeros_in_disk(kf.u_cubic(y)) == 1
        u = u_of_y(y, q)
        assert abs(kf.K1(u, y)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(stable_params())
def test_branch_points(params):
    br = branch_points(params)
    assert br.x1 == 0 and 0 < br.x2 <= 1
    inner = np.linspace(br.x1, br.x2, 401)[1:-1]
    assert np.all(br.delta(inner) < 0)
    assume(params.lambda1 > 1e-3)
    r1, r2 = br.g_roots
    assert (r1 * r2).real > 1 and (r1 + r2).real > 2


@settings(max_examples=15, deadline=None)
@given(stable_params())
def test_contour_shape(params):
    L = contour_L(params, n=128)
    assert L.points[0] == pytest.approx(L.points[-1], abs=1e-14)
    # the polar samples are closed under conjugation: rho(-phi) = rho(phi)
    assert np.allclose(L.rho[1:], L.rho[1:][::-1], atol=1e-12)
    mod = np.abs(np.abs(L.points) ** 2 - L.modulus_factor * L.x_of_point)
    assert mod.max() < 1e-10
    a = np.unwrap(np.angle(L.points - L.center))
    assert a[-1] - a[0] == pytest.approx(2 * np.pi, abs=1e-6)  # counterclockwise once around


@settings(max_examples=15, deadline=None)
@given(stable_params(p_low=0.5))
def test_contour_inside_unit_disk_when_station_one_share_dominates(params):
    assume((1 - params.p) * params.nu2 <= params.p * params.nu1)
    assert np.all(np.abs(contour_L(params, n=128).points) <= 1 + 1e-12)


def test_polished_roots_are_accurate():
    coeffs = P.polyfromroots([0.3, -0.7 + 0.2j, 2.0])
    got = np.sort_complex(poly_roots(coeffs))
    assert np.allclose(got, np.sort_complex([0.3, -0.7 + 0.2j, 2.0]), atol=1e-13)
    assert count_zeros_in_disk(coeffs) == 2
