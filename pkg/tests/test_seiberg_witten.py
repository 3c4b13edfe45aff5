import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinorcalc.algebra import Multivector, Signature, random_multivector, wedge
from spinorcalc.fields import constant_spinor_field, scalar_polynomial
from spinorcalc.gauge import GaugePotential, gauge_section
from spinorcalc.geometry import make_geometry
from spinorcalc.operators import Context, flat_cky_basis, harmonic_polynomials
from spinorcalc.seiberg_witten import (
    SHAPES,
    SWError,
    SWState,
    anti_self_dual,
    candidate_pipelines,
    candidate_report,
    hodge_star,
    self_dual,
    sw_residuals,
    tau,
    vanishing_current_check,
)
from spinorcalc.spin import dirac_current, twistor_ansatz

from conftest import random_points, random_spinor

E4 = Signature.euclidean(4)


def test_star_on_blades():
    assert hodge_star(Multivector.blade(E4, "e12")).as_dict() == {"e34": 1}
    assert hodge_star(Multivector.blade(E4, "e13")).as_dict() == {"e24": -1}
    assert hodge_star(Multivector.scalar(E4)).as_dict() == {"e1234": 1}
    assert hodge_star(Multivector.blade(E4, "e1234")).as_dict() == {"1": 1}


def test_star_pairs_to_volume():
    for i in range(16):
        b = Multivector(E4, np.eye(16)[i])
        assert wedge(b, hodge_star(b)).as_dict() == {"e1234": 1}


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_projectors_exact(seed):
    F = random_multivector(E4, np.random.default_rng(seed), grades=[2], integer=True)
    assert (hodge_star(hodge_star(F)) - F).norm() == 0
    plus, minus = self_dual(F), anti_self_dual(F)
    assert (plus + minus - F).norm() == 0
    assert (hodge_star(plus) - plus).norm() == 0
    assert (hodge_star(minus) + minus).norm() == 0


def test_needs_euclidean_four():
    with pytest.raises(SWError):
        hodge_star(Multivector.scalar(Signature.lorentzian(4)))
    with pytest.raises(SWError):
        tau(np.zeros(2), Signature.euclidean(3))


def test_tau_is_grade_two_current(rng):
    for _ in range(100):
        psi = random_spinor(E4, rng)
        np.testing.assert_array_equal(tau(psi, E4).coeffs, dirac_current(psi, 2, E4).coeffs)


def test_trivial_solution():
    g = make_geometry(E4, "flat")
    chi = scalar_polynomial(E4, [[0.4, [1, 0, 0, 0]]])
    state = SWState(g, constant_spinor_field(E4, np.zeros(4)), GaugePotential.exact(g, chi, True))
    r1, r2 = sw_residuals(state, (0.1, 0.2, 0.3, 0.4))
    assert np.linalg.norm(r1) == 0
    assert r2.norm() == 0


def test_flat_connection_residual_is_quarter_current(rng):
    g = make_geometry(E4, "flat")
    psi = constant_spinor_field(E4, random_spinor(E4, rng))
    r1, r2 = sw_residuals(SWState(g, psi), (0.1, 0.2, 0.3, 0.4))
    assert np.linalg.norm(r1) == 0
    assert r2.norm() == 0.25 * tau(psi.value((0, 0, 0, 0)), E4).norm()


def test_current_check_reports_norms(rng):
    psi = constant_spinor_field(E4, random_spinor(E4, rng))
    pts = random_points(4, 3, rng)
    rep = vanishing_current_check(psi, pts)
    assert not rep.passed
    assert len(rep.norms) == 3 and rep.max_norm > 1e-2
    zero = vanishing_current_check(constant_spinor_field(E4, np.zeros(4)), pts)
    assert zero.passed and zero.max_norm == 0


def test_all_candidate_shapes_run(rng):
    g = make_geometry(E4, "flat")
    chi = scalar_polynomial(E4, [[0.4, [1, 0, 0, 0]], [0.2, [0, 1, 1, 0]]])
    A = GaugePotential.exact(g, chi, imaginary=True)
    ctx = Context(g, gauge=A)
    psi = gauge_section(A, twistor_ansatz(g, random_spinor(E4, rng), random_spinor(E4, rng)))
    alpha = harmonic_polynomials(E4)[2]
    cands = candidate_pipelines(alpha, flat_cky_basis(E4, 2)[7], flat_cky_basis(E4, 1)[5])
    assert tuple(cands) == SHAPES
    pts = random_points(4, 3, rng)
    for shape, stages in cands.items():
        rep = candidate_report(ctx, psi, stages, pts)
        assert rep["dirac_residual"] < 1e-9, shape
        assert rep["curvature_norm"] < 1e-12
        assert rep["current"]["max_current_norm"] > 0
        assert not rep["solution"]
