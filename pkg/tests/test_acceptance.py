"""Acceptance criteria 1-10.  Each test records one PASS/FAIL line."""

import math

import numpy as np
import pytest

from phaseshift import green, unitary
from phaseshift.asymptotics import numerov_phase, wronskian_sin_delta
from phaseshift.exact_well import eta_series_coefficients, exact_phase_shift_s
from phaseshift.params import ScatteringParams, derive_dimensionless
from phaseshift.potential import SquareWell, build_kernel
from phaseshift.quadrature import PVSpec, integrate_tail_oscillatory, pv_integrate
from phaseshift.specfun import sinc

pytestmark = pytest.mark.acceptance

ETAS = (-0.05, -0.02, 0.02, 0.05)


def well(kappa, eta, m=1.0, R=1.0):
    p = kappa / R
    return SquareWell(R, eta * p / m), p


def ref1(kappa, eta):
    return -eta * (1.0 - sinc(2 * kappa))


def ref2(kappa, eta):
    return -(eta**2) * (1 + 2 * math.cos(2 * kappa)) / (2 * kappa)


def shi1_series():
    # Shi(1) = sum 1 / ((2k+1) (2k+1)!)
    return sum(1.0 / ((2 * k + 1) * math.factorial(2 * k + 1)) for k in range(20))


def test_c1_first_order_closed_form(report):
    worst = 0.0
    for kappa in (5.0, 10.0, 20.0, 40.0):
        for eta in ETAS:
            model, p = well(kappa, eta)
            worst = max(worst, abs(unitary.delta1(model, 0, p, 1.0).value - ref1(kappa, eta)))
    assert report("criterion 1 first-order closed form", worst, 1e-9)


def test_c2_second_order_closed_form(report):
    worst = 0.0  # largest error as a fraction of the tolerance
    for kappa in (10.0, 20.0, 40.0):
        for eta in ETAS:
            model, p = well(kappa, eta)
            err = abs(unitary.delta2(model, 0, p, 1.0).value - ref2(kappa, eta))
            worst = max(worst, err / (3 * eta**2 / kappa**2))
    assert report("criterion 2 second-order closed form (error / 3 eta^2/kappa^2)", worst, 1.0)


def test_c3_exact_eta_series(report):
    worst1 = worst2 = 0.0
    for kappa in (10.0, 20.0, 40.0):
        series = eta_series_coefficients(ScatteringParams(1.0, 1.0, 0.0, 0, kappa))
        for eta in ETAS:
            model, p = well(kappa, eta)
            worst1 = max(worst1, abs(series.c1 * eta - unitary.delta1(model, 0, p, 1.0).value))
            tol2 = max(1e-7, 3 * eta**2 / kappa**2)
            err2 = abs(series.c2 * eta**2 - unitary.delta2(model, 0, p, 1.0).value)
            worst2 = max(worst2, err2 / tol2)
    ok1 = report("criterion 3a c1 eta = delta1", worst1, 1e-7)
    ok2 = report("criterion 3b c2 eta^2 = delta2 (error / tolerance)", worst2, 1.0)
    assert ok1 and ok2


def test_c4_third_order_residual_scaling(report):
    ratios = []
    for kappa in (10.0, 20.0):
        errs = []
        for eta in (0.1, 0.05):
            model, p = well(kappa, eta)
            exact = exact_phase_shift_s(ScatteringParams(1.0, 1.0, model.lam, 0, p)).delta0
            pt = unitary.delta1(model, 0, p, 1.0).value + unitary.delta2(model, 0, p, 1.0).value
            errs.append(abs(exact - pt))
        ratios.append(errs[0] / errs[1])
    worst = max(abs(r - 8.0) for r in ratios)
    ok = all(6.0 <= r <= 10.0 for r in ratios)
    assert report(f"criterion 4 residual ratios {', '.join(f'{r:.3f}' for r in ratios)} "
                  "in [6, 10] (|ratio - 8|)", worst, 2.0, ok)


def test_c5_green_unitary_agreement(report):
    worst = 0.0
    for kappa in (10.0, 20.0):
        model, p = well(kappa, 0.05)
        g1 = green.first_order_phase(model, 0, p, 1.0).value
        g2 = green.second_order_phase(model, 0, p, 1.0).value
        u1 = unitary.delta1(model, 0, p, 1.0).value
        u2 = unitary.delta2(model, 0, p, 1.0).value
        worst = max(worst, abs(g1 - u1), abs(g2 - u2))
    assert report("criterion 5 Green vs unitary phases", worst, 1e-6)


def test_c6_exact_vs_numerov(report):
    points = [(k, e) for k in np.linspace(0.5, 50.0, 20) for e in ETAS]
    # kappa=0.5, eta=-0.2 from the criterion, plus an interior that is truly evanescent
    points += [(0.5, -0.2), (0.5, 0.3)]
    assert derive_dimensionless(ScatteringParams.from_dimensionless(0.5, 0.3)).evanescent
    worst = 0.0
    for kappa, eta in points:
        model, p = well(float(kappa), eta)
        exact = exact_phase_shift_s(ScatteringParams(1.0, 1.0, model.lam, 0, p)).delta0
        worst = max(worst, abs(numerov_phase(model, 0, p, 1.0) - exact))
    assert report(f"criterion 6 exact vs Numerov over {len(points)} points", worst, 1e-8)


def test_c7_unitarity_suite(report):
    model = SquareWell(1.0, 1.0)
    k, w = unitary.momentum_grid(64, 41.0, avoid=1.0)
    kern = build_kernel(model, 0, k, w)
    theta = unitary.build_discrete_generator(kern, 1.0)
    defect = unitary.unitarity_defect(theta, 0.5)
    r1 = unitary.transformed_hamiltonian_residual(kern, theta, 0.02, 1.0)
    r2 = unitary.transformed_hamiltonian_residual(kern, theta, 0.01, 1.0)
    comm = unitary.commutator_residual(kern, theta, 1.0)
    scale = float(np.max(np.abs(kern.weighted_entries())))
    ok_a = report("criterion 7a unitarity defect", defect, 1e-12)
    ok_b = report(f"criterion 7b residual ratio {r1 / r2:.4f} (|ratio/4 - 1|)",
                  abs(r1 / r2 / 4.0 - 1.0), 0.2)
    ok_c = report("criterion 7c commutator identity (relative)", comm / scale, 1e-13)
    assert ok_a and ok_b and ok_c


def test_c8_first_order_norm(report):
    model = SquareWell(1.0, 1.0)
    k, w = unitary.momentum_grid(64, 41.0, avoid=1.0)
    theta = unitary.build_discrete_generator(build_kernel(model, 0, k, w), 1.0)
    lin = max(abs(unitary.norm_expansion(theta, 1e-3, j)[0]) for j in range(64))
    quad = [unitary.norm_expansion(theta, 1e-3, j)[1] for j in range(64)]
    assert all(q >= 0 for q in quad)
    assert report("criterion 8 linear term of the first-order norm", lin, 1e-12)


def test_c9_wronskian_route(report):
    model, p = well(20.0, 0.05)
    wf = unitary.first_order_wavefunction(model, 0, p, 1.0, None)
    s = wronskian_sin_delta(wf, model, 0, p, 1.0)
    ref = unitary.delta1(model, 0, p, 1.0).value + unitary.delta2(model, 0, p, 1.0).value
    assert report("criterion 9 Wronskian route vs delta1 + delta2", abs(s - ref), 1e-6)


def test_c10_quadrature_references(report):
    pv = pv_integrate(lambda q: np.exp(q) / q, PVSpec(0.0, -1.0, 1.0, 1e-12))
    err_pv = abs(pv.value - 2 * shi1_series())

    def dirichlet(x):
        return np.sin(x) / x

    from phaseshift.quadrature import integrate_adaptive

    head = integrate_adaptive(lambda x: np.sinc(np.asarray(x) / np.pi), 0.0, 1.0, 1e-13)
    tail = integrate_tail_oscillatory(dirichlet, 1.0, math.pi, 1e-12)
    err_sinc = abs(head.value + tail.value - math.pi / 2)
    ok_a = report("criterion 10a PV e^q/q = 2 Shi(1)", err_pv, 1e-10)
    ok_b = report("criterion 10b integral of sinc = pi/2", err_sinc, 1e-6)
    assert ok_a and ok_b
