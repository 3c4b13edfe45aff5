import numpy as np
import pytest

from spinorcalc.algebra import Multivector, Signature, random_multivector
from spinorcalc.fields import JetDepthError, limit_order, polynomial_field, scalar_polynomial
from spinorcalc.gauge import GaugePotential, gauge_section
from spinorcalc.geometry import make_geometry
from spinorcalc.operators import (
    Context,
    EquationId,
    OperatorError,
    OperatorSpec,
    OpKind,
    PipelineError,
    PreconditionError,
    SingularityError,
    ansatz_first_condition,
    apply,
    build,
    check_potential_grade,
    conformal_cky,
    conformal_potential,
    equation_table,
    final_equation,
    flat_cky_basis,
    flat_potential_basis,
    harmonic_polynomials,
    mixed_grade_terms,
    obstruction_terms,
    omega_from_alpha,
    pipeline,
    residual,
    validate_pipeline,
)
from spinorcalc.spin import twistor_ansatz

from conftest import random_points, random_spinor, random_spinor_field

K = OpKind
S = OperatorSpec


def worst(eq, ctx, subject, points):
    return max(residual(eq, ctx, subject, p).norm for p in points)


def flat_setup(sig, rng):
    g = make_geometry(sig, "flat")
    ctx = Context(g)
    psi = twistor_ansatz(g, random_spinor(sig, rng), random_spinor(sig, rng))
    return g, ctx, psi


def exact_gauge(g, rng, imaginary=True):
    n = g.n
    chi = scalar_polynomial(g.sig, [[0.3, [1] + [0] * (n - 1)], [0.2, [0, 2] + [0] * (n - 2)],
                                    [-0.1, [1, 1] + [0] * (n - 2)]])
    return GaugePotential.exact(g, chi, imaginary)


class TestEquationIds:
    def test_table_covers_every_id(self):
        rows = equation_table()
        assert [r["id"] for r in rows] == [e.name for e in EquationId]
        assert all(r["equation"] for r in rows)

    def test_parse(self):
        assert EquationId.parse("CKY") is EquationId.CKY
        with pytest.raises(OperatorError):
            EquationId.parse("CKY47")

    def test_subject_type_checked(self, rng):
        sig = Signature.euclidean(3)
        g, ctx, psi = flat_setup(sig, rng)
        with pytest.raises(OperatorError):
            residual("CKY", ctx, psi, (0, 0, 0))
        with pytest.raises(OperatorError):
            residual("HARMONIC", ctx, flat_cky_basis(sig, 1)[0], (0, 0, 0))
        with pytest.raises(OperatorError):
            residual("CONF_LAPLACE", ctx, flat_cky_basis(sig, 1)[0], (0, 0, 0))


class TestIngredients:
    @pytest.mark.parametrize("sig", [Signature.euclidean(3), Signature.lorentzian(4)])
    def test_flat_cky_basis_certifies(self, sig, rng):
        ctx = Context(make_geometry(sig, "flat"))
        pts = random_points(sig.n, 2, rng)
        for p in range(sig.n + 1):
            for w in flat_cky_basis(sig, p):
                assert worst("CKY", ctx, w, pts) < 1e-10, w.name
                assert worst("CKY_INT", ctx, w, pts) < 1e-10, w.name

    def test_non_cky_form_fails(self, rng):
        sig = Signature.euclidean(3)
        ctx = Context(make_geometry(sig, "flat"))
        w = polynomial_field(sig, {"e12": [[1.0, [2, 0, 0]]]})
        assert worst("CKY", ctx, w, random_points(3, 2, rng)) > 1e-2

    @pytest.mark.parametrize("sig,k", [(Signature.euclidean(3), 1.0),
                                       (Signature.lorentzian(4), -0.5)])
    def test_curved_ingredients(self, sig, k, rng):
        g = make_geometry(sig, {"constant-curvature": k})
        ctx = Context(g)
        pts = random_points(sig.n, 2, rng)
        for p in range(sig.n + 1):
            for w0 in flat_cky_basis(sig, p, limit=4):
                w = conformal_cky(g, w0)
                for eq in ("CKY", "CKY_INT", "NORMAL_CKY_INT"):
                    assert worst(eq, ctx, w, pts) < 1e-9, (eq, w0.name)
        for f0 in harmonic_polynomials(sig):
            assert worst("CONF_LAPLACE", ctx, conformal_potential(g, f0), pts) < 1e-9
        for p in range(1, sig.n + 1):
            try:
                basis = flat_potential_basis(sig, p)
            except SingularityError:
                continue
            for a0 in basis[:4]:
                assert worst("POTENTIAL", ctx, conformal_potential(g, a0), pts) < 1e-9

    def test_singular_grades(self):
        with pytest.raises(SingularityError):
            check_potential_grade(2, 0)
        with pytest.raises(SingularityError):
            flat_potential_basis(Signature.euclidean(4), 1)
        with pytest.raises(SingularityError):
            flat_potential_basis(Signature.euclidean(6), 4)
        check_potential_grade(5, 2)

    @pytest.mark.parametrize("sig,spec", [(Signature.euclidean(5), "flat"),
                                          (Signature.euclidean(3), {"constant-curvature": 1.0})])
    def test_ansatz_first_condition(self, sig, spec, rng):
        g = make_geometry(sig, spec)
        p = random_points(sig.n, 1, rng)[0]
        for q in range(sig.n + 1):
            try:
                basis = flat_potential_basis(sig, q)
            except SingularityError:
                continue
            for a0 in basis[:4]:
                a = conformal_potential(g, a0)
                res = ansatz_first_condition(g, a, omega_from_alpha(g, a), p)
                assert res.norm() < 1e-12


class TestFlatOperators:
    @pytest.mark.parametrize("sig", [Signature.euclidean(3), Signature.lorentzian(4),
                                     Signature.euclidean(5)])
    def test_symmetry_preserves_twistors(self, sig, rng):
        g, ctx, psi = flat_setup(sig, rng)
        pts = random_points(sig.n, 2, rng)
        for p in range(sig.n + 1):
            for w in flat_cky_basis(sig, p, limit=6):
                out = apply(S(K.L_omega, w), psi, ctx)
                assert worst("TWISTOR", ctx, out, pts) < 1e-9, w.name

    @pytest.mark.parametrize("sig", [Signature.euclidean(3), Signature.euclidean(5)])
    def test_transformations_give_harmonic(self, sig, rng):
        g, ctx, psi = flat_setup(sig, rng)
        pts = random_points(sig.n, 2, rng)
        for f in harmonic_polynomials(sig):
            assert worst("HARMONIC", ctx, apply(S(K.L_f, f), psi, ctx), pts) < 1e-9
        for p in range(sig.n + 1):
            try:
                basis = flat_potential_basis(sig, p)
            except SingularityError:
                continue
            for a in basis[:5]:
                out = apply(S(K.L_alpha, a), psi, ctx)
                assert worst("HARMONIC", ctx, out, pts) < 1e-9, (p, a.name)

    def test_scalar_potential_normalisation(self, rng):
        sig = Signature.euclidean(5)
        g, ctx, psi = flat_setup(sig, rng)
        f = harmonic_polynomials(sig)[3]
        lf = apply(S(K.L_f, f), psi, ctx)
        la = apply(S(K.L_alpha, f), psi, ctx)
        p = (0.1, 0.2, -0.3, 0.2, 0.05)
        np.testing.assert_allclose(la.value(p) * (sig.n - 2) / sig.n, lf.value(p), atol=1e-13)

    def test_middle_form(self, rng):
        sig = Signature.euclidean(4)
        g, ctx, psi = flat_setup(sig, rng)
        om = polynomial_field(sig, {"e12": [[1.0, [0, 0, 0, 0]]], "e34": [[1.0, [0, 0, 0, 0]]]})
        out = apply(S(K.L_alpha, middle_form=om), psi, ctx)
        assert worst("HARMONIC", ctx, out, random_points(4, 3, rng)) < 1e-12

    def test_middle_form_grade_checked(self, rng):
        sig = Signature.euclidean(4)
        g, ctx, psi = flat_setup(sig, rng)
        om = polynomial_field(sig, {"e1": [[1.0, [0, 0, 0, 0]]]})
        out = apply(S(K.L_alpha, middle_form=om), psi, ctx)
        with pytest.raises(PreconditionError) as err:
            out.value((0.1, 0.1, 0.1, 0.1))
        assert err.value.equation == "MIDDLE_FORM"

    @pytest.mark.parametrize("sig", [Signature.euclidean(3), Signature.euclidean(4)])
    def test_harmonic_symmetry(self, sig, rng):
        g, ctx, psi = flat_setup(sig, rng)
        h = apply(S(K.L_f, harmonic_polynomials(sig)[2]), psi, ctx)
        pts = random_points(sig.n, 2, rng)
        assert worst("HARMONIC", ctx, h, pts) < 1e-9
        for p in range(sig.n + 1):
            for w in flat_cky_basis(sig, p, limit=5):
                out = apply(S(K.Script_L_omega, w), h, ctx)
                assert worst("HARMONIC", ctx, out, pts) < 1e-9, w.name

    def test_constant_spinor_is_harmonic_input(self, rng):
        from spinorcalc.fields import constant_spinor_field

        sig = Signature.euclidean(4)
        g, ctx, _ = flat_setup(sig, rng)
        psi = constant_spinor_field(sig, random_spinor(sig, rng))
        w = flat_cky_basis(sig, 2)[7]
        out = apply(S(K.Script_L_omega, w), psi, ctx)
        assert worst("HARMONIC", ctx, out, random_points(4, 3, rng)) < 1e-12


class TestPreconditions:
    def test_non_cky_named(self, rng):
        sig = Signature.euclidean(3)
        g, ctx, psi = flat_setup(sig, rng)
        w = polynomial_field(sig, {"e12": [[1.0, [2, 0, 0]]]})
        out = apply(S(K.L_omega, w), psi, ctx)
        with pytest.raises(PreconditionError) as err:
            out.value((0.1, 0.2, 0.3))
        assert err.value.equation == "CKY"
        assert err.value.norm > 1e-10

    def test_non_harmonic_function_named(self, rng):
        sig = Signature.euclidean(4)
        g, ctx, psi = flat_setup(sig, rng)
        out = apply(S(K.L_f, scalar_polynomial(sig, [[1.0, [2, 0, 0, 0]]])), psi, ctx)
        with pytest.raises(PreconditionError) as err:
            out.value((0.1, 0.2, 0.3, 0.1))
        assert err.value.equation == "CONF_LAPLACE"

    def test_build_skips_check(self, rng):
        sig = Signature.euclidean(3)
        g, ctx, psi = flat_setup(sig, rng)
        w = polynomial_field(sig, {"e12": [[1.0, [2, 0, 0]]]})
        build(S(K.L_omega, w), psi, ctx).value((0.1, 0.2, 0.3))

    def test_spec_validation(self):
        sig = Signature.euclidean(3)
        with pytest.raises(OperatorError):
            S(K.L_omega)
        with pytest.raises(OperatorError):
            S(K.L_f, flat_cky_basis(sig, 1)[0])
        with pytest.raises(OperatorError):
            S(K.L_omega, middle_form=flat_cky_basis(sig, 1)[0])

    def test_gauged_needs_gauge(self, rng):
        sig = Signature.euclidean(3)
        g, ctx, psi = flat_setup(sig, rng)
        with pytest.raises(OperatorError):
            build(S(K.hat_L_f, harmonic_polynomials(sig)[0]), psi, ctx)


class TestGaugedOperators:
    @pytest.mark.parametrize("sig,spec", [
        (Signature.euclidean(4), "flat"),
        (Signature.euclidean(3), {"constant-curvature": 1.0}),
        (Signature.lorentzian(4), {"constant-curvature": -0.5}),
    ])
    def test_flat_connection(self, sig, spec, rng):
        g = make_geometry(sig, spec)
        A = exact_gauge(g, rng)
        ctx = Context(g, gauge=A)
        psi = gauge_section(A, twistor_ansatz(g, random_spinor(sig, rng), random_spinor(sig, rng)))
        pts = random_points(sig.n, 2, rng)
        assert worst("GAUGED_TWISTOR", ctx, psi, pts) < 1e-10
        for p in range(sig.n + 1):
            for w0 in flat_cky_basis(sig, p, limit=3):
                w = conformal_cky(g, w0)
                assert worst("GAUGED_CKY", ctx, w, pts) < 1e-9
                out = apply(S(K.hat_L_omega, w), psi, ctx)
                assert worst("GAUGED_TWISTOR", ctx, out, pts) < 1e-9
        f = conformal_potential(g, harmonic_polynomials(sig)[2])
        h = apply(S(K.hat_L_f, f), psi, ctx)
        assert worst("GAUGED_HARMONIC", ctx, h, pts) < 1e-9
        for p in range(sig.n + 1):
            try:
                basis = flat_potential_basis(sig, p)
            except SingularityError:
                continue
            for a0 in basis[:2]:
                out = apply(S(K.hat_L_alpha, conformal_potential(g, a0)), psi, ctx)
                assert worst("GAUGED_HARMONIC", ctx, out, pts) < 1e-9
        for p in range(sig.n + 1):
            for w0 in flat_cky_basis(sig, p, limit=2):
                w = conformal_cky(g, w0)
                out = apply(S(K.hat_Script_L_omega, w), h, ctx)
                assert worst("GAUGED_HARMONIC", ctx, out, pts) < 1e-9
                assert worst("OBSTRUCTION", ctx, (w, h), pts) < 1e-12

    def test_gauged_potential_scalar_curvature_coefficient(self, rng):
        # n + 2(p - 1) in the scalar-curvature term; n - 2(p - 1) leaves a residual
        sig = Signature.euclidean(5)
        g = make_geometry(sig, {"constant-curvature": 0.8})
        ctx = Context(g, gauge=exact_gauge(g, rng))
        n, q = 5, 3
        x = random_points(5, 1, rng)[0]
        a = conformal_potential(g, flat_potential_basis(sig, q)[0])
        res = residual("GAUGED_POTENTIAL", ctx, a, x)
        assert res.norm < 1e-9
        shift = a.value(x) * (4 * (q - 1) / (4 * (n - 1) * (n - 2)) * g.curvature(x).scalar)
        assert (res.value - shift).norm() > 1e-2

    def test_charged_ingredient_fails_precondition(self, rng):
        sig = Signature.euclidean(4)
        g = make_geometry(sig, "flat")
        A = exact_gauge(g, rng)
        ctx = Context(g, gauge=A, charge=1.0)
        psi = gauge_section(A, twistor_ansatz(g, random_spinor(sig, rng), random_spinor(sig, rng)))
        out = apply(S(K.hat_L_f, harmonic_polynomials(sig)[2]), psi, ctx)
        with pytest.raises(PreconditionError) as err:
            out.value((0.1, 0.2, 0.3, -0.1))
        assert err.value.equation == "GAUGED_CONF_LAPLACE"

    def test_obstruction_terms_vanish_only_without_F(self, rng):
        sig = Signature.euclidean(5)
        g = make_geometry(sig, "flat")
        w = random_multivector(sig, rng, grades=[2])
        psi = random_spinor(sig, rng)
        zero = obstruction_terms(g, Multivector.zero(sig), w, psi)
        assert all(np.linalg.norm(t) == 0 for t in zero)
        F = random_multivector(sig, rng, grades=[2])
        assert sum(np.linalg.norm(t) for t in obstruction_terms(g, F, w, psi)) > 1e-3

    def test_mixed_grade_terms(self, rng):
        sig = Signature.euclidean(5)
        alpha = random_multivector(sig, rng, grades=[3])
        F = random_multivector(sig, rng, grades=[2])
        terms = mixed_grade_terms(5, F, alpha)
        assert terms["raised"].grades_present() <= {5}
        assert terms["lowered"].grades_present() == {1}
        none = mixed_grade_terms(5, Multivector.zero(sig), alpha)
        assert none["raised"].norm() == 0 and none["lowered"].norm() == 0


class TestPipelines:
    def setup(self, rng):
        sig = Signature.euclidean(4)
        g, ctx, psi = flat_setup(sig, rng)
        ws = flat_cky_basis(sig, 2)
        f = harmonic_polynomials(sig)[3]
        return sig, ctx, psi, ws, f

    def test_full_chain(self, rng):
        sig, ctx, psi, ws, f = self.setup(rng)
        stages = [S(K.L_omega, ws[7]), S(K.L_omega, ws[3]), S(K.L_f, f), S(K.Script_L_omega, ws[8])]
        assert final_equation(stages, ctx) is EquationId.HARMONIC
        out = pipeline(stages, psi, ctx)
        p = (0.1, 0.2, 0.3, 0.1)
        assert np.linalg.norm(out.value(p)) > 1e-3
        assert residual("HARMONIC", ctx, out, p).norm < 1e-9

    def test_empty_is_identity(self, rng):
        sig, ctx, psi, ws, f = self.setup(rng)
        assert pipeline([], psi, ctx) is psi
        assert final_equation([], ctx) is EquationId.TWISTOR

    def test_symmetry_only_is_twistor(self, rng):
        sig, ctx, psi, ws, f = self.setup(rng)
        assert final_equation([S(K.L_omega, ws[0])], ctx) is EquationId.TWISTOR

    @pytest.mark.parametrize("order", [
        ["Lf", "Lw"], ["SL"], ["Lf", "Lf"], ["Lw", "hatLf"],
    ])
    def test_invalid_orders(self, order, rng):
        sig, ctx, psi, ws, f = self.setup(rng)
        make = {"Lw": S(K.L_omega, ws[0]), "Lf": S(K.L_f, f), "SL": S(K.Script_L_omega, ws[0]),
                "hatLf": S(K.hat_L_f, f)}
        with pytest.raises(PipelineError):
            validate_pipeline([make[o] for o in order], ctx)

    def test_gauged_pipeline_needs_gauge(self, rng):
        sig, ctx, psi, ws, f = self.setup(rng)
        with pytest.raises(PipelineError):
            validate_pipeline([S(K.hat_L_f, f)], ctx)

    def test_jet_budget(self, rng):
        sig, ctx, psi, ws, f = self.setup(rng)
        stages = [S(K.L_omega, ws[7]), S(K.L_f, f), S(K.Script_L_omega, ws[8])]
        with pytest.raises(JetDepthError):
            pipeline(stages, limit_order(psi, 3), ctx)
        pipeline(stages, limit_order(psi, 4), ctx)
        with pytest.raises(JetDepthError):
            validate_pipeline([S(K.L_omega, limit_order(ws[7], 1)), S(K.L_f, f)], ctx, psi)

    def test_arbitrary_input_is_not_harmonic(self, rng):
        sig, ctx, _, ws, f = self.setup(rng)
        psi = random_spinor_field(sig, rng)
        out = apply(S(K.L_f, f), psi, ctx)
        assert residual("HARMONIC", ctx, out, (0.1, 0.2, 0.3, 0.1)).norm > 1e-3
