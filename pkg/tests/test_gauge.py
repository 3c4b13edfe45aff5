import numpy as np
import pytest

from spinorcalc.algebra import Signature
from spinorcalc.fields import scalar_polynomial
from spinorcalc.gauge import (
    GaugePotential,
    d_squared_residual,
    delta_squared_residual,
    double_contraction,
    gauge_covariance_residual,
    gauge_section,
    gauged_delta_field,
    gauged_form_curvature_residual,
    gauged_integrability_residuals,
    gauged_lichnerowicz_residual,
    gauged_spinor_curvature_residual,
    gauged_twistor_residual,
    shift_residuals,
)
from spinorcalc.geometry import make_geometry
from spinorcalc.spin import twistor_ansatz, twistor_integrability_residuals

from conftest import random_form, random_points, random_spinor, random_spinor_field


def polynomial_potential(sig, rng, imaginary=False):
    comps = {}
    for a in range(sig.n):
        comps[f"e{a + 1}"] = [[float(rng.normal()), [int(e) for e in rng.integers(0, 3, size=sig.n)]]
                              for _ in range(2)]
    return GaugePotential.polynomial(sig, comps, imaginary)


def random_chi(sig, rng):
    return scalar_polynomial(sig, [[float(rng.normal()) * 0.5,
                                    [int(e) for e in rng.integers(0, 3, size=sig.n)]]
                                   for _ in range(3)])


BACKENDS = [
    (Signature.euclidean(3), "flat"),
    (Signature.euclidean(4), {"constant-curvature": 0.8}),
    (Signature.lorentzian(4), {"constant-curvature": -0.5}),
]


@pytest.mark.parametrize("sig,spec", BACKENDS)
@pytest.mark.parametrize("imaginary", [False, True])
def test_shifted_forms_agree(sig, spec, imaginary, rng):
    g = make_geometry(sig, spec)
    A = polynomial_potential(sig, rng, imaginary)
    f = random_form(sig, rng)
    for p in random_points(sig.n, 2, rng):
        for name, v in shift_residuals(g, A, f, p).items():
            assert v < 1e-10, name


@pytest.mark.parametrize("imaginary", [False, True])
def test_d_squared_is_wedge_with_F(imaginary, rng):
    sig = Signature.euclidean(4)
    g = make_geometry(sig, "flat")
    A = polynomial_potential(sig, rng, imaginary)
    f = random_form(sig, rng)
    for p in random_points(4, 3, rng):
        assert A.curvature(g).value(p).norm() > 1e-3
        assert d_squared_residual(g, A, f, p).norm() < 1e-9


def test_delta_squared_ordered_double_sum_fails(rng):
    sig = Signature.euclidean(4)
    g = make_geometry(sig, "flat")
    A = polynomial_potential(sig, rng)
    f = random_form(sig, rng)
    p = (0.2, -0.1, 0.3, 0.1)
    assert delta_squared_residual(g, A, f, p).norm() > 1e-3


@pytest.mark.parametrize("sig,spec", BACKENDS)
def test_delta_squared_with_pair_weighting(sig, spec, rng):
    g = make_geometry(sig, spec)
    A = polynomial_potential(sig, rng)
    f = random_form(sig, rng)
    for p in random_points(sig.n, 2, rng):
        dd = gauged_delta_field(g, A, gauged_delta_field(g, A, f)).value(p)
        F = A.curvature(g).value(p)
        assert (dd + double_contraction(F, f.value(p)) * 0.5).norm() < 1e-9


@pytest.mark.parametrize("sig,spec", BACKENDS)
def test_gauged_curvature_operator(sig, spec, rng):
    g = make_geometry(sig, spec)
    A = polynomial_potential(sig, rng, imaginary=True)
    f = random_form(sig, rng)
    psi = random_spinor_field(sig, rng)
    p = random_points(sig.n, 1, rng)[0]
    for a in range(sig.n):
        for b in range(sig.n):
            assert gauged_form_curvature_residual(g, A, f, a, b, p).norm() < 1e-9
            assert np.linalg.norm(gauged_spinor_curvature_residual(g, A, psi, a, b, p)) < 1e-9


@pytest.mark.parametrize("sig,spec", BACKENDS)
def test_gauged_lichnerowicz(sig, spec, rng):
    g = make_geometry(sig, spec)
    A = polynomial_potential(sig, rng)
    psi = random_spinor_field(sig, rng)
    for p in random_points(sig.n, 2, rng):
        assert np.linalg.norm(gauged_lichnerowicz_residual(g, A, psi, p)) < 1e-9


@pytest.mark.parametrize("sig,spec", BACKENDS)
@pytest.mark.parametrize("imaginary", [False, True])
def test_gauge_covariance(sig, spec, imaginary, rng):
    g = make_geometry(sig, spec)
    A = polynomial_potential(sig, rng, imaginary)
    chi = random_chi(sig, rng)
    psi = random_spinor_field(sig, rng)
    for p in random_points(sig.n, 2, rng):
        assert np.linalg.norm(gauge_covariance_residual(g, A, chi, psi, p)) < 1e-10


def test_exact_potential_is_flat(rng):
    sig = Signature.euclidean(4)
    g = make_geometry(sig, {"constant-curvature": 1.0})
    A = GaugePotential.exact(g, random_chi(sig, rng))
    for p in random_points(4, 3, rng):
        assert A.curvature(g).value(p).norm() < 1e-13
        assert A.value(p).norm() > 0


@pytest.mark.parametrize("sig,spec", BACKENDS)
@pytest.mark.parametrize("imaginary", [False, True])
def test_gauge_transformed_twistor(sig, spec, imaginary, rng):
    g = make_geometry(sig, spec)
    A = GaugePotential.exact(g, random_chi(sig, rng), imaginary)
    psi = gauge_section(A, twistor_ansatz(g, random_spinor(sig, rng), random_spinor(sig, rng)))
    for p in random_points(sig.n, 2, rng):
        for a in range(sig.n):
            assert np.linalg.norm(gauged_twistor_residual(g, A, psi, a, p)) < 1e-10
        r1, r2, r3 = gauged_integrability_residuals(g, A, psi, p)
        assert np.linalg.norm(r1) < 1e-9
        assert max(np.linalg.norm(r) for r in r2) < 1e-9
        assert max(np.linalg.norm(r) for r in r3) < 1e-9


def test_zero_potential_reduces_to_ungauged(rng):
    sig = Signature.euclidean(4)
    g = make_geometry(sig, {"constant-curvature": 0.5})
    A = GaugePotential.polynomial(sig, {})
    psi = random_spinor_field(sig, rng)
    p = (0.1, 0.2, -0.3, 0.05)
    gauged = gauged_integrability_residuals(g, A, psi, p)
    plain = twistor_integrability_residuals(g, psi, p)
    np.testing.assert_array_equal(gauged[0], plain[0])
    for x, y in zip(gauged[1], plain[1]):
        np.testing.assert_array_equal(x, y)
    for x, y in zip(gauged[2], plain[2]):
        np.testing.assert_array_equal(x, y)


def test_nonzero_F_breaks_twistor_integrability(rng):
    sig = Signature.euclidean(4)
    g = make_geometry(sig, "flat")
    A = polynomial_potential(sig, rng)
    psi = twistor_ansatz(g, random_spinor(sig, rng), random_spinor(sig, rng))
    assert max(np.linalg.norm(gauged_twistor_residual(g, A, psi, a, (0.1, 0.2, 0.3, 0.4)))
               for a in range(4)) > 1e-3
