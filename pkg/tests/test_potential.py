import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseshift.potential import (
    GaussianBump,
    InadmissiblePotentialError,
    KernelMatrix,
    PowerLaw,
    SquareWell,
    ZeroPotential,
    build_kernel,
    make_model,
    matrix_element,
    matrix_element_well_s,
    matrix_elements,
    u_elements,
)


def gaussian_s_oracle(w, k1, k2):
    return (np.exp(-((k1 - k2) ** 2) * w * w / 2) - np.exp(-((k1 + k2) ** 2) * w * w / 2)) \
        / math.sqrt(2 * math.pi)


def test_well_shape_is_exactly_zero_outside():
    well = SquareWell(2.0, -1.5)
    r = np.array([0.0, 1.0, 2.0, 2.0 + 1e-12, 5.0])
    np.testing.assert_array_equal(well(r), [-0.75, -0.75, -0.75, 0.0, 0.0])


def test_closed_form_values():
    p = math.pi / 2  # 2 p R = pi
    assert matrix_element_well_s(1.0, p, p) == pytest.approx(1 / math.pi, rel=1e-15)
    assert abs(matrix_element_well_s(1.0, 1e-9, 1e-9)) < 1e-15
    expected = (math.sin(1.0) - math.sin(3.0) / 3) / math.pi
    assert matrix_element_well_s(1.0, 2.0, 1.0) == pytest.approx(expected, rel=1e-14)
    assert matrix_element_well_s(1.0, 2.0, 1.0) == pytest.approx(0.25287, abs=1e-5)


def test_numeric_matches_closed_form_grid():
    well = SquareWell(1.0, 1.0)
    ks = np.linspace(0.3, 15.0, 10)
    for a in ks:
        for b in ks:
            assert matrix_element(well, 0, a, b) == \
                pytest.approx(matrix_element_well_s(1.0, a, b), abs=1e-10)


def test_vectorized_matches_closed_form():
    well = SquareWell(1.3, 0.2)
    k = np.linspace(0.1, 30.0, 77)
    np.testing.assert_allclose(matrix_elements(well, 0, k, 2.5),
                               matrix_element_well_s(1.3, k, 2.5), atol=1e-13)


def test_gaussian_against_oracle():
    g = GaussianBump(0.7, 0.3)
    k = np.linspace(0.2, 12.0, 25)
    np.testing.assert_allclose(u_elements(g, 0, k, 1.9), gaussian_s_oracle(0.7, k, 1.9),
                               atol=1e-13)
    assert matrix_element(g, 0, 3.0, 1.9) == pytest.approx(gaussian_s_oracle(0.7, 3.0, 1.9),
                                                           abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(l=st.integers(0, 4), k1=st.floats(0.1, 20), k2=st.floats(0.1, 20))
def test_symmetry(l, k1, k2):
    for model in (SquareWell(1.0, 1.0), GaussianBump(0.5, 1.0)):
        assert matrix_element(model, l, k1, k2) == matrix_element(model, l, k2, k1)


def test_zero_potential():
    z = ZeroPotential()
    assert matrix_element(z, 0, 1.0, 2.0) == 0.0
    k = np.linspace(0.5, 5.0, 6)
    kern = build_kernel(z, 2, k)
    assert not np.any(kern.entries)


def test_envelope_bound():
    p = 3.0
    k = np.linspace(p + 0.5, 400.0, 500)
    u = np.abs(matrix_element_well_s(1.0, k, p))
    assert np.all(u <= 2.0 / (math.pi * np.abs(k - p)))


def test_build_kernel_symmetric_and_matches_closed_form():
    k = np.linspace(0.4, 9.0, 12)
    kern = build_kernel(SquareWell(1.0, 2.0), 0, k)
    assert kern.symmetry_defect() == 0.0
    np.testing.assert_allclose(kern.entries, matrix_element_well_s(1.0, k[:, None], k[None, :]),
                               atol=1e-10)
    kern_num = build_kernel(GaussianBump(1.0, 1.0), 1, k)
    assert kern_num.symmetry_defect() == 0.0


def test_build_kernel_rejects_bad_grid():
    with pytest.raises(ValueError):
        build_kernel(SquareWell(), 0, [1.0, 0.5])
    with pytest.raises(ValueError):
        build_kernel(SquareWell(), 0, [0.0, 1.0])


def test_kernel_diagonal_exclusion_enforced():
    with pytest.raises(ValueError):
        KernelMatrix(np.ones(2), np.ones(2), np.eye(2), diagonal_excluded=True)


def test_admissibility_gate():
    with pytest.raises(InadmissiblePotentialError):
        matrix_element(PowerLaw(1.0, 1.0), 0, 1.0, 2.0)
    with pytest.raises(InadmissiblePotentialError):
        PowerLaw(0.5, 1.0).check_admissible()
    with pytest.raises(InadmissiblePotentialError):
        PowerLaw(3.0, 1.0).check_admissible()  # too singular at the origin
    PowerLaw(1.5, 1.0).check_admissible()
    with pytest.raises(InadmissiblePotentialError):
        PowerLaw(1.5, 1.0).r_max


def test_make_model():
    assert isinstance(make_model("barrier", R=2.0, lam=1.0), SquareWell)
    assert isinstance(make_model("gaussian", width=0.5), GaussianBump)
    assert isinstance(make_model("zero"), ZeroPotential)
    with pytest.raises(ValueError):
        make_model("coulomb")
