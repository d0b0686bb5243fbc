import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseshift import green, unitary
from phaseshift.potential import GaussianBump, SquareWell, ZeroPotential
from phaseshift.specfun import free_regular


def well(kappa, eta):
    return SquareWell(1.0, eta * kappa), kappa


@settings(max_examples=30, deadline=None)
@given(l=st.integers(0, 3), r=st.floats(0.1, 20), rp=st.floats(0.1, 20))
def test_green_function_symmetric(l, r, rp):
    assert green.green_function(l, 1.3, r, rp, 1.0) == green.green_function(l, 1.3, rp, r, 1.0)


def test_green_function_continuous_with_derivative_jump():
    k, m, rp = 2.0, 1.5, 1.7
    for l in (0, 2):
        for eps in (1e-4, 1e-6):
            gap = green.green_function(l, k, rp + eps, rp, m) - green.green_function(l, k, rp - eps, rp, m)
            assert abs(gap) < 50 * eps
        # second-order one-sided differences from r = r'
        h = 1e-4
        g = [green.green_function(l, k, rp + j * h, rp, m) for j in (-2, -1, 0, 1, 2)]
        d_out = (-3 * g[2] + 4 * g[3] - g[4]) / (2 * h)
        d_in = (3 * g[2] - 4 * g[1] + g[0]) / (2 * h)
        assert d_out - d_in == pytest.approx(-2 * m, abs=1e-6)


def test_green_function_domain():
    with pytest.raises(ValueError):
        green.green_function(0, 1.0, 0.0, 1.0, 1.0)


def test_phase_from_coeffs():
    assert green.phase_from_coeffs(1.0, 0.0) == 0.0
    assert green.phase_from_coeffs(0.0, 1.0) == pytest.approx(math.pi / 2)
    for d in (0.3, -0.3, 1.2):
        assert green.phase_from_coeffs(math.cos(d), math.sin(d)) == pytest.approx(d, abs=1e-15)
        # renormalization: overall scale drops out
        assert green.phase_from_coeffs(3 * math.cos(d), 3 * math.sin(d)) == pytest.approx(d)
    with pytest.raises(ValueError):
        green.phase_from_coeffs(0.0, 0.0)


def test_free_iterate():
    model = SquareWell(1.0, 0.5)
    r = np.linspace(0.0, 5.0, 101)
    it = green.free_iterate(model, 0, 2.0, 1.0, r)
    assert it.order == 0 and it.Delta_n == 0.0
    np.testing.assert_array_equal(it.samples.samples, free_regular(0, 2.0, r))


def test_zero_potential_fixed_point():
    z = ZeroPotential(1.0)
    r = np.linspace(0.0, 5.0, 101)
    it = green.free_iterate(z, 1, 2.0, 1.0)
    for _ in range(3):
        it = green.iterate(z, 1, 2.0, 1.0, it, r)
        np.testing.assert_allclose(it.samples.samples, free_regular(1, 2.0, r), atol=1e-16)
        assert it.B_n == 0.0


def test_first_iteration_reproduces_first_order_coeffs():
    model, p = well(7.0, 0.05)
    it1 = green.iterate(model, 0, p, 1.0, green.free_iterate(model, 0, p, 1.0))
    A1, B1 = green.first_order_coeffs(model, 0, p, 1.0)
    assert it1.B_n == pytest.approx(-B1, rel=1e-13)
    assert it1.Delta_n == pytest.approx(math.atan(-B1), rel=1e-13)


def test_first_order_coeffs():
    assert green.first_order_coeffs(SquareWell(1.0, 0.0), 0, 2.0, 1.0) == (0.0, 0.0)
    model, p = well(math.pi / 2, 0.05)
    assert green.first_order_phase(model, 0, p, 1.0).value == pytest.approx(-0.05, abs=1e-14)
    for kappa in (0.3, 2.0, 15.0, 60.0):
        model, p = well(kappa, 0.05)
        A1, _ = green.first_order_coeffs(model, 0, p, 1.0)
        assert math.isfinite(A1)
    with pytest.raises(ValueError):
        green.first_order_coeffs(SquareWell(2.0, 0.1), 0, 1.0, 1.0, r_max=1.0)


@pytest.mark.parametrize("model,l,p", [(SquareWell(1.0, 0.4), 0, 6.0),
                                       (GaussianBump(0.5, 0.3), 0, 3.0),
                                       (SquareWell(1.0, 0.2), 2, 3.0)])
def test_agreement_with_unitary(model, l, p):
    assert green.first_order_phase(model, l, p, 1.0).value == \
        pytest.approx(unitary.delta1(model, l, p, 1.0).value, abs=1e-13)
    assert green.second_order_phase(model, l, p, 1.0).value == \
        pytest.approx(unitary.delta2(model, l, p, 1.0).value, abs=1e-10)


@pytest.mark.parametrize("kappa", [10.0, 20.0])
def test_second_iterate_total_phase(kappa):
    eta = 0.05
    model, p = well(kappa, eta)
    res = green.second_order_phase(model, 0, p, 1.0)
    d1 = unitary.delta1(model, 0, p, 1.0).value
    d2 = unitary.delta2(model, 0, p, 1.0).value
    # atan2 of the second iterate also carries -delta1^3/3 from expanding atan
    assert abs(res.diagnostics["Delta2"] - (d1 + d2 - d1**3 / 3)) < 1e-6
    assert abs(res.value - d2) < 1e-6


def test_second_order_trivial_and_even():
    assert green.second_order_phase(SquareWell(1.0, 0.0), 0, 3.0, 1.0).value == 0.0
    a = green.second_order_phase(SquareWell(1.0, 0.3), 0, 3.0, 1.0).value
    b = green.second_order_phase(SquareWell(1.0, -0.3), 0, 3.0, 1.0).value
    assert a == pytest.approx(b, rel=1e-13)


def test_norm_drift_is_second_order():
    drifts = []
    for lam in (0.2, 0.1):
        drifts.append(green.second_order_phase(SquareWell(1.0, lam), 0, 4.0, 1.0)
                      .diagnostics["norm_drift"])
    assert drifts[1] != 0.0
    assert drifts[0] / drifts[1] == pytest.approx(4.0, rel=0.1)


def test_first_iterate_piecewise_c1_at_range():
    model = SquareWell(1.0, 0.7)
    it = green.iterate(model, 0, 3.0, 1.0, green.free_iterate(model, 0, 3.0, 1.0))
    R = 1.0
    for eps in (1e-3, 1e-5):
        assert abs(it(R + eps) - it(R - eps)) < 10 * eps
        d_out = (it(R + 2 * eps) - it(R + eps)) / eps
        d_in = (it(R - eps) - it(R - 2 * eps)) / eps
        assert abs(d_out - d_in) < 100 * eps


def test_iterate_beyond_support_is_free_combination():
    model = SquareWell(1.0, 0.7)
    p = 3.0
    it = green.iterate(model, 0, p, 1.0, green.free_iterate(model, 0, p, 1.0))
    r = np.linspace(1.5, 9.0, 40)
    s, c = np.sin(p * r), np.cos(p * r)
    expected = math.sqrt(2 / math.pi) * (it.A_n * s + it.B_n * c)
    np.testing.assert_allclose(it(r), expected, atol=1e-13)
