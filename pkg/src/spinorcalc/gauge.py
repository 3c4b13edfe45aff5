"""U(1)-gauged connection on forms and spinors.

The gauged derivative is ``nabla_X + q A(X)`` where ``q`` is the charge of
the section it acts on.  Spinors carry charge 1.  Forms carry charge 1 in the
gauged exterior calculus (``d^ = d + A∧`` and so on); a form that enters an
operator as a coefficient, such as the function in the twistor-to-harmonic
map, is neutral (charge 0) so that the product with a charge-1 spinor is
again charge 1.

With ``imaginary=True`` the potential acts as ``iA``, the unitary reading;
every identity here is linear in the effective potential, so both readings
verify the same way.
"""
from __future__ import annotations

import numpy as np

from .algebra import Multivector, Signature, clifford_mul, interior, interior_up, wedge
from .fields import (
    FieldError,
    FormField,
    SpinorField,
    exp_field,
    polynomial_field,
    scalar_times_spinor,
)
from .geometry import (
    Geometry,
    curvature_action_value,
    curvature_commutator_field,
    d_field,
    delta_field,
    dslash_field,
    nabla_field,
)
from .representation import act
from .spin import (
    dirac_field,
    penrose_field,
    spinor_curvature_commutator_field,
    spinor_nabla_field,
    spinor_rough_laplacian_field,
)


class _Charged:
    """The potential as seen by a section of charge ``q``."""

    def __init__(self, gauge: "GaugePotential", q: float):
        self.gauge = gauge
        self.q = q

    def component(self, p, order: int, a: int) -> np.ndarray:
        return self.q * self.gauge.component(p, order, a)


class GaugePotential:
    """Abelian potential 1-form with frame components ``A_a``."""

    def __init__(self, field: FormField, imaginary: bool = False, name: str = ""):
        if field.grades is not None and not field.grades <= {1}:
            raise FieldError("gauge potential must be a 1-form")
        self.field = field
        self.imaginary = bool(imaginary)
        self.factor = 1j if imaginary else 1.0
        self.name = name
        self._views: dict = {}
        self._curv: dict = {}

    @property
    def sig(self) -> Signature:
        return self.field.sig

    @classmethod
    def polynomial(cls, sig: Signature, components: dict, imaginary=False) -> "GaugePotential":
        if not components:
            components = {"e1": [[0.0, [0] * sig.n]]}
        return cls(polynomial_field(sig, components), imaginary)

    @classmethod
    def exact(cls, g: Geometry, chi: FormField, imaginary=False) -> "GaugePotential":
        """A = dχ for a scalar field χ (zero gauge curvature)."""
        pot = cls(d_field(g, chi), imaginary)
        pot.chi = chi
        return pot

    def component(self, p, order: int, a: int) -> np.ndarray:
        """Jet of the effective A(X_a) (charge 1)."""
        return self.factor * self.field.at(p, order).coeffs[1 << a]

    def charged(self, q: float):
        """Gauge view for charge ``q``; ``None`` for neutral sections."""
        if q == 0:
            return None
        if q == 1:
            return self
        if q not in self._views:
            self._views[q] = _Charged(self, q)
        return self._views[q]

    def value(self, p) -> Multivector:
        """Effective potential 1-form at ``p``."""
        return self.field.value(p) * self.factor

    def curvature(self, g: Geometry, charge: float = 1) -> FormField:
        """Effective gauge curvature q·dA (times i in the unitary reading)."""
        key = (id(g), charge)
        if key not in self._curv:
            self._curv[key] = d_field(g, self.field) * (self.factor * charge)
        return self._curv[key]

    def transformed(self, g: Geometry, chi: FormField) -> tuple["GaugePotential", FormField]:
        """Gauge transform A -> A + dχ; returns the new potential and the
        scalar field multiplying charge-1 sections (e^{-χ}, or e^{-iχ})."""
        new = GaugePotential(self.field + d_field(g, chi), self.imaginary)
        return new, exp_field(chi, -self.factor)


def gauge_section(A: GaugePotential, psi: SpinorField) -> SpinorField:
    """e^{-χ}psi (e^{-iχ}psi when imaginary) for an exact potential A = dχ:
    maps solutions of an ungauged equation to the gauged one."""
    chi = getattr(A, "chi", None)
    if chi is None:
        raise FieldError("gauge_section needs an exact potential built by GaugePotential.exact")
    return scalar_times_spinor(exp_field(chi, -A.factor), psi)


def _view(A: GaugePotential | None, charge):
    return None if A is None else A.charged(charge)


# ---------------------------------------------------------------------------
# gauged form operators (connection definitions)


def gauged_d_field(g, A, f, charge=1) -> FormField:
    return d_field(g, f, _view(A, charge))


def gauged_delta_field(g, A, f, charge=1) -> FormField:
    return delta_field(g, f, _view(A, charge))


def gauged_dslash_field(g, A, f, charge=1) -> FormField:
    return dslash_field(g, f, _view(A, charge))


def gauged_laplace_field(g, A, f, charge=1) -> FormField:
    view = _view(A, charge)
    return dslash_field(g, dslash_field(g, f, view), view)


def gauged_d(g, A, f, p, charge=1) -> Multivector:
    return gauged_d_field(g, A, f, charge).value(p)


def gauged_delta(g, A, f, p, charge=1) -> Multivector:
    return gauged_delta_field(g, A, f, charge).value(p)


def gauged_hodge_de_rham(g, A, f, p, charge=1) -> Multivector:
    return gauged_dslash_field(g, A, f, charge).value(p)


def gauged_laplace(g, A, f, p, charge=1) -> Multivector:
    return gauged_laplace_field(g, A, f, charge).value(p)


# shifted forms: d + A∧, δ - i_Ã, d̸ + A·


def _a_eff(A, p, charge):
    return A.value(p) * charge


def shifted_d(g, A, f, p, charge=1) -> Multivector:
    return d_field(g, f).value(p) + wedge(_a_eff(A, p, charge), f.value(p))


def shifted_delta(g, A, f, p, charge=1) -> Multivector:
    a = _a_eff(A, p, charge)
    m = f.value(p)
    contraction = m * 0
    for b in range(g.n):
        contraction = contraction + interior_up(b, m) * a.coeffs[1 << b]
    return delta_field(g, f).value(p) - contraction


def shifted_hodge_de_rham(g, A, f, p, charge=1) -> Multivector:
    return dslash_field(g, f).value(p) + clifford_mul(_a_eff(A, p, charge), f.value(p))


def shift_residuals(g, A, f, p, charge=1) -> dict[str, float]:
    """Connection definitions minus shifted forms for d^, δ^, d̸^."""
    return {
        "d": (gauged_d(g, A, f, p, charge) - shifted_d(g, A, f, p, charge)).norm(),
        "delta": (gauged_delta(g, A, f, p, charge) - shifted_delta(g, A, f, p, charge)).norm(),
        "dslash": (gauged_hodge_de_rham(g, A, f, p, charge)
                   - shifted_hodge_de_rham(g, A, f, p, charge)).norm(),
    }


def double_contraction(F: Multivector, m: Multivector) -> Multivector:
    """(i_{X^a} i_{X^b} F) i_{X_a} i_{X_b} m, summed over all a, b."""
    out = m * 0
    n = m.n
    for a in range(n):
        for b in range(n):
            c = interior_up(a, interior_up(b, F)).coeffs[0]
            if np.any(c != 0):
                inner = interior(a, interior(b, m))
                out = out + inner._new(inner.coeffs * c)
    return out


def d_squared_residual(g, A, f, p, charge=1) -> Multivector:
    """d^²α - F∧α."""
    view = _view(A, charge)
    dd = d_field(g, d_field(g, f, view), view).value(p)
    F = A.curvature(g, charge).value(p)
    return dd - wedge(F, f.value(p))


def delta_squared_residual(g, A, f, p, charge=1) -> Multivector:
    """δ^²α + (i_{X^a} i_{X^b} F) i_{X_a} i_{X_b} α, with the double sum
    over all ordered index pairs."""
    view = _view(A, charge)
    dd = delta_field(g, delta_field(g, f, view), view).value(p)
    F = A.curvature(g, charge).value(p)
    return dd + double_contraction(F, f.value(p))


def gauged_form_curvature_residual(g, A, f, a, b, p, charge=1) -> Multivector:
    """Gauged commutator minus R(X_a, X_b)α + (i_{X_a} i_{X_b} F)α."""
    comm = curvature_commutator_field(g, f, a, b, _view(A, charge)).value(p)
    F = A.curvature(g, charge).value(p)
    m = f.value(p)
    iif = interior(a, interior(b, F)).coeffs[0]
    return comm - curvature_action_value(g, m, a, b, p) + iif * m


# ---------------------------------------------------------------------------
# gauged spinor operators


def gauged_spinor_derivative(g, A, psi: SpinorField, a: int, p) -> np.ndarray:
    return spinor_nabla_field(g, psi, a, A).value(p)


def gauged_dirac_field(g, A, psi: SpinorField) -> SpinorField:
    return dirac_field(g, psi, A)


def gauged_dirac(g, A, psi: SpinorField, p) -> np.ndarray:
    return dirac_field(g, psi, A).value(p)


def shifted_dirac(g, A, psi: SpinorField, p) -> np.ndarray:
    """D psi + A·psi."""
    return dirac_field(g, psi).value(p) + act(A.value(p), psi.value(p))


def gauged_spinor_curvature_residual(g, A, psi, a, b, p) -> np.ndarray:
    """Gauged commutator minus ½R_ab·psi + (i_{X_a} i_{X_b} F) psi."""
    comm = spinor_curvature_commutator_field(g, psi, a, b, A).value(p)
    R = g.curvature_two_forms(p)
    F = A.curvature(g).value(p)
    iif = interior(a, interior(b, F)).coeffs[0]
    val = psi.value(p)
    return comm - 0.5 * act(R[a][b], val) + iif * val


def gauged_curvature_action(g, A, subject, a: int, b: int, p, charge=1):
    """R(X_a, X_b) - i_{X_a} i_{X_b} F applied to a form or spinor value."""
    F = A.curvature(g, charge).value(p)
    iif = interior(a, interior(b, F)).coeffs[0]
    if isinstance(subject, SpinorField):
        val = subject.value(p)
        return 0.5 * act(g.curvature_two_forms(p)[a][b], val) - iif * val
    m = subject.value(p)
    return curvature_action_value(g, m, a, b, p) - iif * m


def gauged_lichnerowicz_residual(g, A, psi, p) -> np.ndarray:
    """D^²psi - ∇^²psi + ¼R psi - F·psi."""
    dd = dirac_field(g, dirac_field(g, psi, A), A).value(p)
    rough = spinor_rough_laplacian_field(g, psi, A).value(p)
    scalar = g.curvature(p).scalar
    F = A.curvature(g).value(p)
    val = psi.value(p)
    return dd - rough + 0.25 * scalar * val - act(F, val)


def gauged_twistor_residual(g, A, psi, a: int, p) -> np.ndarray:
    return penrose_field(g, psi, a, A).value(p)


def gauged_integrability_residuals(g, A, psi, p):
    """Residuals of the three gauged twistor integrability conditions; the
    second is a list over a, the third over pairs a < b."""
    n = g.n
    if n < 3:
        raise FieldError("gauged twistor integrability conditions need n >= 3")
    pack = g.curvature(p)
    F = A.curvature(g).value(p)
    val = psi.value(p)
    Fpsi = act(F, val)
    dpsi = dirac_field(g, psi, A)
    r1 = (dirac_field(g, dpsi, A).value(p) + n / (4 * (n - 1)) * pack.scalar * val
          - n / (n - 1) * Fpsi)
    r2 = []
    for a in range(n):
        ea = Multivector.lowered_basis_vector(g.sig, a)
        r2.append(spinor_nabla_field(g, dpsi, a, A).value(p)
                  - 0.5 * n * act(pack.K[a], val)
                  + n / ((n - 1) * (n - 2)) * act(ea, Fpsi)
                  - n / (n - 2) * act(interior(a, F), val))
    r3 = []
    for a in range(n):
        ea = Multivector.lowered_basis_vector(g.sig, a)
        for b in range(a + 1, n):
            eb = Multivector.lowered_basis_vector(g.sig, b)
            iif = interior(a, interior(b, F)).coeffs[0]
            rhs = (2 * iif * val
                   + n / (n - 2) * act(clifford_mul(eb, interior(a, F))
                                       - clifford_mul(ea, interior(b, F)), val)
                   + 4 / ((n - 1) * (n - 2)) * act(clifford_mul(clifford_mul(ea, eb), F), val))
            r3.append(act(pack.C[a][b], val) - rhs)
    return r1, r2, r3


def gauge_covariance_residual(g, A, chi: FormField, psi: SpinorField, p) -> np.ndarray:
    """D^'(e^{-χ}psi) - e^{-χ} D^psi for A' = A + dχ."""
    A2, phase = A.transformed(g, chi)
    psi2 = scalar_times_spinor(phase, psi)
    lhs = dirac_field(g, psi2, A2).value(p)
    rhs = phase.value(p).coeffs[0] * dirac_field(g, psi, A).value(p)
    return lhs - rhs


def nabla_hat_field(g, A, f: FormField, a: int, charge=1) -> FormField:
    return nabla_field(g, f, a, _view(A, charge))
