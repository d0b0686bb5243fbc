import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phaseshift.params import ScatteringParams, derive_dimensionless


def test_zero_coupling_groups():
    g = derive_dimensionless(ScatteringParams(m=1, R=1, lam=0, p=2))
    assert (g.eta, g.kappa, g.kappa_prime) == (0.0, 2.0, 2.0)
    assert not g.evanescent


def test_barrier_interior_momentum():
    # V = lam/R > 0 lowers the interior momentum: kappa'^2 = 4 - 2 * 0.05 * 2
    g = derive_dimensionless(ScatteringParams(m=1, R=1, lam=0.1, p=2))
    assert g.eta == pytest.approx(0.05)
    assert g.kappa == 2.0
    assert g.kappa_prime == pytest.approx(math.sqrt(3.8), rel=1e-15)


def test_well_interior_momentum():
    g = derive_dimensionless(ScatteringParams(m=1, R=1, lam=-0.1, p=2))
    assert g.kappa_prime == pytest.approx(math.sqrt(4.2), rel=1e-15)


def test_evanescent_flag_for_high_barrier():
    g = derive_dimensionless(ScatteringParams(m=1, R=1, lam=3.0, p=1))
    assert g.evanescent
    assert g.kappa_prime_sq == pytest.approx(-5.0)
    assert g.kappa_prime == pytest.approx(math.sqrt(5.0))


def test_deep_well_is_not_evanescent():
    assert not derive_dimensionless(ScatteringParams(m=1, R=1, lam=-3.0, p=1)).evanescent


@pytest.mark.parametrize("field,value", [("m", 0.0), ("R", -1.0), ("p", 0.0), ("l", -1),
                                         ("l", 1.5), ("lam", math.inf)])
def test_invariants_enforced(field, value):
    with pytest.raises(ValueError):
        ScatteringParams(**{field: value})


def test_from_dimensionless_round_trip():
    prm = ScatteringParams.from_dimensionless(7.5, -0.03, m=2.0, R=0.5, l=1)
    assert prm.kappa == pytest.approx(7.5)
    assert prm.eta == pytest.approx(-0.03)
    assert prm.with_(l=3).l == 3


@given(lam=st.floats(-5, 5), p=st.floats(0.1, 10), m=st.floats(0.1, 5))
def test_eta_scaling(lam, p, m):
    base = derive_dimensionless(ScatteringParams(m=m, lam=lam, p=p)).eta
    assert derive_dimensionless(ScatteringParams(m=m, lam=2 * lam, p=p)).eta == \
        pytest.approx(2 * base, abs=1e-15)
    assert derive_dimensionless(ScatteringParams(m=m, lam=lam, p=2 * p)).eta == \
        pytest.approx(base / 2, abs=1e-15)


@given(p=st.floats(0.01, 100), R=st.floats(0.01, 10))
def test_kappa_prime_equals_kappa_without_coupling(p, R):
    g = derive_dimensionless(ScatteringParams(R=R, lam=0.0, p=p))
    assert g.kappa_prime == g.kappa
