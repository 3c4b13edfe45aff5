import numpy as np
import pytest

from spinorcalc.algebra import Multivector, Signature, wedge
from spinorcalc.fields import scalar_polynomial
from spinorcalc.geometry import (
    ChartDomainError,
    ConstantCurvature,
    Flat,
    GeometryError,
    certify,
    curvature_endomorphism_value,
    d_field,
    delta_field,
    laplace_field,
    laplace_split_residual,
    make_geometry,
    weitzenbock_residual,
)

from conftest import random_form, random_points


def test_make_geometry():
    sig = Signature.euclidean(3)
    assert isinstance(make_geometry(sig, "flat"), Flat)
    g = make_geometry(sig, {"constant-curvature": -2})
    assert isinstance(g, ConstantCurvature) and g.k == -2.0
    with pytest.raises(GeometryError):
        make_geometry(sig, "sphere")


def test_flat_certification_is_zero():
    rep = certify(make_geometry(Signature.euclidean(4), "flat"), points=5)
    assert all(v == 0 for v in rep["worst"].values())


@pytest.mark.parametrize("sig,k", [
    (Signature.euclidean(3), 1.0),
    (Signature.euclidean(4), -1.0),
    (Signature.lorentzian(4), 0.7),
    (Signature.euclidean(5), 0.3),
])
def test_constant_curvature_certifies(sig, k):
    rep = certify(make_geometry(sig, {"constant-curvature": k}), points=20, seed=3)
    for name, v in rep["worst"].items():
        assert v < 1e-9, name


def test_negative_curvature_rejects_points():
    g = make_geometry(Signature.euclidean(4), {"constant-curvature": -4.0})
    rep = certify(g, points=20, seed=0)
    assert rep["rejected"] > 0
    assert rep["points"] == 20


def test_chart_domain():
    g = make_geometry(Signature.euclidean(2), {"constant-curvature": -4.0})
    assert g.conformal_factor((1.0, 0.0)) == 0.0
    with pytest.raises(ChartDomainError):
        g.connection((1.0, 0.0), 1)


def test_closed_form_curvature_values():
    sig = Signature.euclidean(4)
    k = 0.6
    pack = make_geometry(sig, {"constant-curvature": k}).curvature((0.1, 0.2, 0.0, -0.3))
    assert abs(pack.scalar - k * 12) < 1e-14
    for a in range(4):
        ea = Multivector.basis_vector(sig, a)
        assert (pack.P[a] - ea * (3 * k)).norm() < 1e-14
        assert (pack.K[a] + ea * (k / 2)).norm() < 1e-14
        assert (pack.P[a] - ea * (pack.scalar / 4)).norm() < 1e-14


def test_bianchi_on_frames():
    sig = Signature.lorentzian(4)
    g = make_geometry(sig, {"constant-curvature": -0.4})
    p = (0.2, 0.1, -0.3, 0.4)
    R = g.curvature_two_forms(p)
    for a in range(4):
        acc = Multivector.zero(sig)
        for b in range(4):
            acc = acc + wedge(R[a][b], Multivector.basis_vector(sig, b))
        assert acc.norm() < 1e-14
    assert g.curvature(p).bianchi_defect() < 1e-14


def test_curvature_endomorphism_on_one_forms():
    sig = Signature.euclidean(3)
    k = 0.8
    g = make_geometry(sig, {"constant-curvature": k})
    p = (0.1, 0.2, 0.3)
    alpha = Multivector.from_dict(sig, {"e1": 1.0, "e3": -2.0})
    assert (curvature_endomorphism_value(g, alpha, p) - alpha * (k * 2)).norm() < 1e-14
    assert curvature_endomorphism_value(g, Multivector.scalar(sig, 3.0), p).norm() == 0
    assert curvature_endomorphism_value(make_geometry(sig, "flat"), alpha, p).norm() == 0


def test_harmonic_polynomial_laplacian():
    sig = Signature.euclidean(3)
    g = make_geometry(sig, "flat")
    f = scalar_polynomial(sig, [[1, [2, 0, 0]], [-1, [0, 2, 0]]])
    assert laplace_field(g, f).value((0.3, -0.1, 0.7)).norm() < 1e-14


@pytest.mark.parametrize("sig,spec,tol", [
    (Signature.euclidean(3), "flat", 1e-10),
    (Signature.lorentzian(4), "flat", 1e-10),
    (Signature.euclidean(3), {"constant-curvature": 1.0}, 1e-8),
    (Signature.euclidean(4), {"constant-curvature": -0.5}, 1e-8),
    (Signature.lorentzian(4), {"constant-curvature": 0.9}, 1e-8),
])
def test_weitzenbock(sig, spec, tol, rng):
    g = make_geometry(sig, spec)
    f = random_form(sig, rng)
    for p in random_points(sig.n, 3, rng):
        assert weitzenbock_residual(g, f, p).norm() < tol
        assert laplace_split_residual(g, f, p).norm() < tol


@pytest.mark.parametrize("spec", ["flat", {"constant-curvature": 0.7}])
def test_d_and_delta_square_to_zero(spec, rng):
    sig = Signature.euclidean(4)
    g = make_geometry(sig, spec)
    f = random_form(sig, rng)
    for p in random_points(4, 3, rng):
        assert d_field(g, d_field(g, f)).value(p).norm() < 1e-9
        assert delta_field(g, delta_field(g, f)).value(p).norm() < 1e-9


def test_d_of_coordinate_function_is_frame_component():
    sig = Signature.euclidean(3)
    k = 1.0
    g = make_geometry(sig, {"constant-curvature": k})
    x1 = scalar_polynomial(sig, [[1, [1, 0, 0]]])
    p = (0.2, 0.4, -0.1)
    h = g.conformal_factor(p)
    assert (d_field(g, x1).value(p) - Multivector.basis_vector(sig, 0) * h).norm() < 1e-14
