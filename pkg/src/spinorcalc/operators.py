"""Equation residuals, symmetry and transformation operators, pipelines.

Every equation the engine checks has an :class:`EquationId`; ``residual``
returns its left-minus-right side at a point.  ``apply`` builds the spinor
field produced by an operator and checks, lazily at each point where the
output is evaluated, that the operator's ingredient satisfies its defining
equation.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import Multivector, Signature, interior, interior_up, tables, wedge
from .fields import (
    FieldError,
    FormField,
    JetDepthError,
    SpinorField,
    as_point,
    clifford_action,
    polynomial_field,
    power_field,
    scalar_times_spinor,
)
from .gauge import GaugePotential, double_contraction
from .geometry import (
    Geometry,
    curvature_action_value,
    d_field,
    delta_field,
    dslash_field,
    nabla_field,
)
from .representation import act
from .spin import dirac_field, penrose_field, spinor_nabla_field

PRECONDITION_TOL = 1e-10


class OperatorError(ValueError):
    pass


class PreconditionError(OperatorError):
    """An operator ingredient fails its defining equation."""

    def __init__(self, equation: str, norm: float, point):
        self.equation = equation
        self.norm = norm
        self.point = point
        super().__init__(
            f"ingredient fails {equation}: residual {norm:.3e} at point {tuple(point)}"
        )


class SingularityError(OperatorError):
    """A grade-dependent coefficient is singular for this (n, p)."""


class PipelineError(OperatorError):
    pass


class EquationId(enum.Enum):
    # (subject, gauged, directional, formula)
    HARMONIC = ("spinor", False, False, "D psi = 0")
    MASSIVE = ("spinor", False, False, "D psi = m psi")
    TWISTOR = ("spinor", False, True, "nabla_X psi = (1/n) X·D psi")
    CKY = ("form", False, True,
           "nabla_X w = i_X dw/(p+1) - X∧δw/(n-p+1)")
    CKY_INT = ("form", False, False,
               "p/(p+1) δdw + (n-p)/(n-p+1) dδw = e^b∧i_{X^a} R(X_a,X_b) w")
    NORMAL_CKY_INT = ("form", False, False,
                      "p/(p+1) δdw + (n-p)/(n-p+1) dδw = -2(n-p) K_a∧i_{X^a} w")
    CONF_LAPLACE = ("function", False, False, "Δf - (n-2)/(4(n-1)) R f = 0")
    POTENTIAL = ("form", False, False,
                 "δdα/(n-2(p+1)) + dδα/(n-2(p-1)) = P_a∧i_{X^a}α/(n-2)"
                 " - (n+2(p-1))/(4(n-1)(n-2)) R α")
    GAUGED_HARMONIC = ("spinor", True, False, "D^ psi = 0")
    GAUGED_MASSIVE = ("spinor", True, False, "D^ psi = m psi")
    GAUGED_TWISTOR = ("spinor", True, True, "nabla^_X psi = (1/n) X·D^ psi")
    GAUGED_LAPLACE_GAMMA = ("function", True, False,
                            "Δ^f + [(1 + (n-2)/(n-1)) γ - (n-2)/(4(n-1)) R] f = 0")
    GAUGED_CONF_LAPLACE = ("function", True, False, "Δ^f - (n-2)/(4(n-1)) R f = 0")
    GAUGED_POTENTIAL = ("form", True, False,
                        "δ^d^α/(n-2(p+1)) + d^δ^α/(n-2(p-1))"
                        " = (p/(n(n-2)) - (n+2(p-1))/(4(n-1)(n-2))) R α")
    GAUGED_CKY = ("form", True, True,
                  "nabla^_X w = i_X d^w/(p+1) - X∧δ^w/(n-p+1)")
    GAUGED_CKY_INT = ("form", True, False,
                      "p/(p+1) δ^d^w + (n-p)/(n-p+1) d^δ^w = e^b∧i_{X^a} R^(X_a,X_b) w")
    OBSTRUCTION = ("pair", True, False,
                   "p/(p+1)(F∧w)·psi - 3(i_{X^a}F∧i_{X_a}w)·psi"
                   " - (n-p)/(n-p+1)((i_{X^a}i_{X^b}F) i_{X_a}i_{X_b}w)·psi")

    @property
    def subject(self) -> str:
        return self.value[0]

    @property
    def gauged(self) -> bool:
        return self.value[1]

    @property
    def directional(self) -> bool:
        return self.value[2]

    @property
    def formula(self) -> str:
        return self.value[3]

    @classmethod
    def parse(cls, name: str) -> "EquationId":
        try:
            return cls[name]
        except KeyError:
            raise OperatorError(f"unknown equation id {name!r}") from None


def equation_table() -> list[dict]:
    return [{"id": e.name, "subject": e.subject, "gauged": e.gauged,
             "directional": e.directional, "equation": e.formula} for e in EquationId]


@dataclass
class Context:
    """Geometry plus optional gauge.  ``charge`` is the charge carried by form
    ingredients in gauged equations (0: neutral coefficients)."""

    geometry: Geometry
    gauge: GaugePotential | None = None
    charge: float = 0.0
    gamma: float = 0.0
    mass: float = 0.0
    precondition_tol: float = PRECONDITION_TOL

    @property
    def sig(self) -> Signature:
        return self.geometry.sig

    @property
    def n(self) -> int:
        return self.geometry.n

    def form_view(self):
        return None if self.gauge is None else self.gauge.charged(self.charge)

    def gauge_curvature(self, p, charge=1) -> Multivector:
        if self.gauge is None:
            return Multivector.zero(self.sig)
        return self.gauge.curvature(self.geometry, charge).value(p)


@dataclass
class Residual:
    value: object
    norm: float
    detail: list = field(default_factory=list)


def _norm(v) -> float:
    if isinstance(v, Multivector):
        return v.norm()
    return float(np.linalg.norm(np.asarray(v)))


def form_grade(f: FormField, p=None) -> int:
    if f.grades is not None and len(f.grades) == 1:
        return next(iter(f.grades))
    if p is not None:
        g = f.value(p).homogeneous_grade()
        if g is not None:
            return g
    raise FieldError(f"form {f.name or '?'} has no single grade")


def check_potential_grade(n: int, p: int):
    if n == 2:
        raise SingularityError("potential-form coefficients are singular for n = 2")
    if n == 2 * (p + 1) or n == 2 * (p - 1):
        raise SingularityError(
            f"unsupported: n = {n}, p = {p} makes a coefficient 1/(n - 2(p ± 1)) singular"
        )


def _lowered(sig, a):
    return Multivector.lowered_basis_vector(sig, a)


# ---------------------------------------------------------------------------
# residual evaluators


def _directional(values) -> Residual:
    norms = [_norm(v) for v in values]
    worst = int(np.argmax(norms))
    return Residual(values[worst], norms[worst], norms)


def _cky(ctx: Context, w: FormField, p, view) -> Residual:
    g = ctx.geometry
    n = g.n
    q = form_grade(w, p)
    dw = d_field(g, w, view).value(p)
    dl = delta_field(g, w, view).value(p)
    vals = []
    for a in range(n):
        vals.append(nabla_field(g, w, a, view).value(p)
                    - interior(a, dw) / (q + 1)
                    + wedge(_lowered(g.sig, a), dl) / (n - q + 1))
    return _directional(vals)


def _cky_lhs(ctx, w, p, view, q):
    g = ctx.geometry
    n = g.n
    dd = delta_field(g, d_field(g, w, view), view).value(p)
    dl = d_field(g, delta_field(g, w, view), view).value(p)
    return dd * (q / (q + 1)) + dl * ((n - q) / (n - q + 1))


def curvature_contraction(g: Geometry, m: Multivector, p, F: Multivector | None = None):
    """e^b ∧ i_{X^a} R(X_a, X_b) m, with R replaced by R - i_{X_a} i_{X_b} F
    when a gauge curvature is supplied."""
    n = g.n
    out = m * 0
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            act_ab = curvature_action_value(g, m, a, b, p)
            if F is not None:
                act_ab = act_ab - m * interior(a, interior(b, F)).coeffs[0]
            out = out + wedge(Multivector.basis_vector(g.sig, b), interior_up(a, act_ab))
    return out


def _cky_int(ctx, w, p, view, F) -> Residual:
    q = form_grade(w, p)
    v = _cky_lhs(ctx, w, p, view, q) - curvature_contraction(ctx.geometry, w.value(p), p, F)
    return Residual(v, v.norm())


def _normal_cky_int(ctx, w, p) -> Residual:
    g = ctx.geometry
    q = form_grade(w, p)
    n = g.n
    pack = g.curvature(p)
    m = w.value(p)
    rhs = m * 0
    for a in range(n):
        rhs = rhs + wedge(pack.K[a], interior_up(a, m))
    v = _cky_lhs(ctx, w, p, None, q) + rhs * (2 * (n - q))
    return Residual(v, v.norm())


def _laplace_gamma(ctx, f, p, view, gamma) -> Residual:
    g = ctx.geometry
    n = g.n
    if n == 1:
        raise SingularityError("conformal Laplace coefficient singular for n = 1")
    lap = dslash_field(g, dslash_field(g, f, view), view).value(p)
    scalar = g.curvature(p).scalar
    coef = (1 + (n - 2) / (n - 1)) * gamma - (n - 2) / (4 * (n - 1)) * scalar
    v = lap + f.value(p) * coef
    return Residual(v, v.norm())


def _potential(ctx, a_field, p, view, gauged) -> Residual:
    g = ctx.geometry
    n = g.n
    q = form_grade(a_field, p)
    check_potential_grade(n, q)
    dd = delta_field(g, d_field(g, a_field, view), view).value(p)
    dl = d_field(g, delta_field(g, a_field, view), view).value(p)
    lhs = dd / (n - 2 * (q + 1)) + dl / (n - 2 * (q - 1))
    pack = g.curvature(p)
    m = a_field.value(p)
    if gauged:
        coef = q / (n * (n - 2)) - (n + 2 * (q - 1)) / (4 * (n - 1) * (n - 2))
        rhs = m * (coef * pack.scalar)
    else:
        rhs = m * (-(n + 2 * (q - 1)) / (4 * (n - 1) * (n - 2)) * pack.scalar)
        for a in range(n):
            rhs = rhs + wedge(pack.P[a], interior_up(a, m)) / (n - 2)
    v = lhs - rhs
    return Residual(v, v.norm())


def obstruction_terms(g: Geometry, F: Multivector, w: Multivector, psi) -> list[np.ndarray]:
    """The three gauge-curvature terms obstructing the gauged harmonic
    symmetry operator, each acting on the spinor value ``psi``."""
    n = g.n
    q = w.homogeneous_grade() or 0
    mixed = w * 0
    for a in range(n):
        mixed = mixed + wedge(interior_up(a, F), interior(a, w))
    return [
        q / (q + 1) * act(wedge(F, w), psi),
        -3 * act(mixed, psi),
        -(n - q) / (n - q + 1) * act(double_contraction(F, w), psi),
    ]


def residual(eq: EquationId | str, ctx: Context, subject, p) -> Residual:
    """Left minus right side of ``eq`` for ``subject`` at point ``p``.

    Directional equations report the worst frame direction, with the
    per-direction norms in ``detail``.  ``OBSTRUCTION`` takes the pair
    ``(w, psi)``.
    """
    if isinstance(eq, str):
        eq = EquationId.parse(eq)
    g = ctx.geometry
    p = as_point(p)
    E = EquationId
    gauge = ctx.gauge
    if eq in (E.HARMONIC, E.GAUGED_HARMONIC, E.MASSIVE, E.GAUGED_MASSIVE):
        _expect_spinor(eq, subject)
        A = gauge if eq.gauged else None
        v = dirac_field(g, subject, A).value(p)
        if eq in (E.MASSIVE, E.GAUGED_MASSIVE):
            v = v - ctx.mass * subject.value(p)
        return Residual(v, _norm(v))
    if eq in (E.TWISTOR, E.GAUGED_TWISTOR):
        _expect_spinor(eq, subject)
        A = gauge if eq.gauged else None
        return _directional([penrose_field(g, subject, a, A).value(p) for a in range(g.n)])
    if eq is E.OBSTRUCTION:
        w, psi = subject
        terms = obstruction_terms(g, ctx.gauge_curvature(p), w.value(p), psi.value(p))
        v = sum(terms)
        return Residual(v, _norm(v), [_norm(t) for t in terms])
    _expect_form(eq, subject)
    view = ctx.form_view() if eq.gauged else None
    if eq is E.CKY:
        return _cky(ctx, subject, p, None)
    if eq is E.GAUGED_CKY:
        return _cky(ctx, subject, p, view)
    if eq is E.CKY_INT:
        return _cky_int(ctx, subject, p, None, None)
    if eq is E.GAUGED_CKY_INT:
        F = ctx.gauge_curvature(p, ctx.charge) if gauge is not None else None
        return _cky_int(ctx, subject, p, view, F)
    if eq is E.NORMAL_CKY_INT:
        return _normal_cky_int(ctx, subject, p)
    if eq is E.CONF_LAPLACE:
        return _laplace_gamma(ctx, subject, p, None, 0.0)
    if eq is E.GAUGED_CONF_LAPLACE:
        return _laplace_gamma(ctx, subject, p, view, 0.0)
    if eq is E.GAUGED_LAPLACE_GAMMA:
        return _laplace_gamma(ctx, subject, p, view, ctx.gamma)
    if eq is E.POTENTIAL:
        return _potential(ctx, subject, p, None, False)
    if eq is E.GAUGED_POTENTIAL:
        return _potential(ctx, subject, p, view, True)
    raise OperatorError(f"no evaluator for {eq.name}")  # pragma: no cover


def _expect_spinor(eq, subject):
    if not isinstance(subject, SpinorField):
        raise OperatorError(f"{eq.name} needs a spinor field")


def _expect_form(eq, subject):
    if not isinstance(subject, FormField):
        raise OperatorError(f"{eq.name} needs a form field")
    if eq.subject == "function" and subject.grades is not None and subject.grades != {0}:
        raise OperatorError(f"{eq.name} needs a scalar function")


# ---------------------------------------------------------------------------
# operators


class OpKind(enum.Enum):
    L_omega = "L_omega"
    Script_L_omega = "Script_L_omega"
    L_f = "L_f"
    L_alpha = "L_alpha"
    hat_L_omega = "hat_L_omega"
    hat_L_f = "hat_L_f"
    hat_L_alpha = "hat_L_alpha"
    hat_Script_L_omega = "hat_Script_L_omega"

    @property
    def gauged(self) -> bool:
        return self.value.startswith("hat_")

    @property
    def base(self) -> str:
        return self.value[4:] if self.gauged else self.value

    @property
    def phase(self) -> int:
        """0: twistor-preserving, 1: twistor to harmonic, 2: harmonic-preserving."""
        return {"L_omega": 0, "L_f": 1, "L_alpha": 1, "Script_L_omega": 2}[self.base]


@dataclass(frozen=True)
class OperatorSpec:
    """An operator with its ingredient form.  For ``L_alpha`` kinds a
    ``middle_form`` may be given instead of ``ingredient``: the operator is
    then multiplication by that harmonic middle form."""

    kind: OpKind
    ingredient: FormField | None = None
    middle_form: FormField | None = None
    label: str = ""

    def __post_init__(self):
        kind = OpKind(self.kind) if not isinstance(self.kind, OpKind) else self.kind
        object.__setattr__(self, "kind", kind)
        if self.middle_form is not None:
            if kind.base != "L_alpha":
                raise OperatorError("a middle form is only allowed for L_alpha kinds")
            if self.ingredient is not None:
                raise OperatorError("give either an ingredient or a middle form, not both")
        elif self.ingredient is None:
            raise OperatorError(f"{kind.value} needs an ingredient form")
        if kind.base == "L_f" and self.ingredient.grades not in (None, frozenset({0})):
            raise OperatorError("L_f needs a scalar function")

    def precondition(self) -> EquationId | None:
        base = self.kind.base
        if self.middle_form is not None:
            return None
        if base in ("L_omega", "Script_L_omega"):
            if self.kind is OpKind.hat_Script_L_omega:
                return EquationId.GAUGED_CKY
            return EquationId.CKY
        if base == "L_f":
            return EquationId.GAUGED_LAPLACE_GAMMA if self.kind.gauged else EquationId.CONF_LAPLACE
        return EquationId.GAUGED_POTENTIAL if self.kind.gauged else EquationId.POTENTIAL


def omega_from_alpha(g: Geometry, alpha: FormField, gauge: GaugePotential | None = None,
                     charge: float = 0.0) -> FormField:
    """Ω = (-1)^p n/(n-2(p+1)) dα - (-1)^p n/(n-2(p-1)) δα, with gauged
    d and δ when a gauge is given."""
    n = g.n
    q = form_grade(alpha)
    check_potential_grade(n, q)
    view = None if gauge is None else gauge.charged(charge)
    s = (-1) ** q * n
    return (d_field(g, alpha, view) * (s / (n - 2 * (q + 1)))
            - delta_field(g, alpha, view) * (s / (n - 2 * (q - 1))))


def _precondition_label(op: OperatorSpec, ctx: Context) -> str:
    eq = op.precondition()
    if eq is EquationId.GAUGED_LAPLACE_GAMMA and ctx.gamma == 0:
        return EquationId.GAUGED_CONF_LAPLACE.name
    return eq.name if eq else "MIDDLE_FORM"


def _check_ingredient(op: OperatorSpec, ctx: Context, p):
    g = ctx.geometry
    if op.middle_form is not None:
        m = op.middle_form
        view = ctx.form_view() if op.kind.gauged else None
        n = g.n
        if n % 2 or form_grade(m, p) != n // 2:
            raise PreconditionError("MIDDLE_FORM", float("inf"), p)
        norm = max(d_field(g, m, view).value(p).norm(), delta_field(g, m, view).value(p).norm())
    else:
        norm = residual(op.precondition(), ctx, op.ingredient, p).norm
    if not norm <= ctx.precondition_tol:
        raise PreconditionError(_precondition_label(op, ctx), norm, p)


def _guarded(op: OperatorSpec, ctx: Context, out: SpinorField) -> SpinorField:
    checked: set = set()

    def ev(p, k):
        key = as_point(p)
        if key not in checked:
            _check_ingredient(op, ctx, key)
            checked.add(key)
        return out.at(p, k)

    return SpinorField(out.sig, ev, max_order=out.max_order, name=op.kind.value)


def build(op: OperatorSpec, psi: SpinorField, ctx: Context) -> SpinorField:
    """The operator's output field without the ingredient check."""
    g = ctx.geometry
    n = g.n
    sig = g.sig
    kind = op.kind
    if kind.gauged and ctx.gauge is None:
        raise OperatorError(f"{kind.value} needs a gauge context")
    A = ctx.gauge if kind.gauged else None
    view = ctx.form_view() if kind.gauged else None
    dpsi = dirac_field(g, psi, A)
    base = kind.base

    if base == "L_alpha" and op.middle_form is not None:
        return clifford_action(op.middle_form, psi)

    w = op.ingredient
    q = form_grade(w)
    if base == "L_omega":
        # ordinary d and δ of the CKY form in both readings
        out = clifford_action(w * (-((-1) ** q) * q / n), dpsi)
        if q:
            out = out + clifford_action(d_field(g, w) * (q / (2 * (q + 1))), psi)
            out = out + clifford_action(delta_field(g, w) * (q / (2 * (n - q + 1))), psi)
        return out
    if base == "Script_L_omega":
        out = None
        for a in range(n):
            t = clifford_action(w.__rmul__(Multivector.basis_vector(sig, a)),
                                spinor_nabla_field(g, psi, a, A))
            out = t if out is None else out + t
        out = out + clifford_action(d_field(g, w, view) * (q / (q + 1)), psi)
        out = out - clifford_action(delta_field(g, w, view) * ((n - q) / (n - q + 1)), psi)
        return out
    if base == "L_f":
        return (scalar_times_spinor(w, dpsi) * ((n - 2) / n)
                + clifford_action(d_field(g, w, view), psi))
    if base == "L_alpha":
        omega = omega_from_alpha(g, w, A, ctx.charge)
        return clifford_action(w, dpsi) + clifford_action(omega, psi)
    raise OperatorError(f"unknown operator kind {kind}")  # pragma: no cover


def apply(op: OperatorSpec, psi: SpinorField, ctx: Context) -> SpinorField:
    """Lazily evaluated output of ``op`` on ``psi``.  At each point where it
    is evaluated, the ingredient must pass its defining equation within
    ``ctx.precondition_tol``, otherwise :class:`PreconditionError` names it."""
    return _guarded(op, ctx, build(op, psi, ctx))


# ---------------------------------------------------------------------------
# pipelines


def validate_pipeline(stages, ctx: Context, psi: SpinorField | None = None) -> EquationId:
    """Check stage order, gauge consistency and jet budget; return the
    equation the final output must satisfy."""
    stages = list(stages)
    gauged = {s.kind.gauged for s in stages}
    if len(gauged) > 1:
        raise PipelineError("cannot mix gauged and ungauged stages")
    is_gauged = gauged == {True}
    if is_gauged and ctx.gauge is None:
        raise PipelineError("gauged stages need a gauge context")
    phases = [s.kind.phase for s in stages]
    if phases != sorted(phases):
        raise PipelineError(
            "stage order must be: twistor symmetries, one twistor-to-harmonic map, "
            "harmonic symmetries"
        )
    if phases.count(1) > 1:
        raise PipelineError("at most one twistor-to-harmonic stage")
    if 2 in phases and 1 not in phases:
        raise PipelineError("harmonic symmetry stage needs a twistor-to-harmonic stage before it")
    # each stage consumes one derivative order; the final check one more
    L = len(stages)
    if psi is not None and psi.max_order is not None and psi.max_order < L + 1:
        raise JetDepthError(
            f"input spinor supplies jets to order {psi.max_order}; "
            f"{L} stages and the final check need {L + 1}"
        )
    for j, s in enumerate(stages):
        need = L - j + 1
        ing = s.ingredient if s.ingredient is not None else s.middle_form
        if ing.max_order is not None and ing.max_order < max(need, 2):
            raise JetDepthError(
                f"stage {j} ({s.kind.value}) ingredient supplies order {ing.max_order}, "
                f"needs {max(need, 2)}"
            )
    if 1 in phases:
        return EquationId.GAUGED_HARMONIC if is_gauged else EquationId.HARMONIC
    if is_gauged or (not stages and ctx.gauge is not None):
        return EquationId.GAUGED_TWISTOR
    return EquationId.TWISTOR


def pipeline(stages, psi: SpinorField, ctx: Context) -> SpinorField:
    validate_pipeline(stages, ctx, psi)
    out = psi
    for s in stages:
        out = apply(s, out, ctx)
    return out


def final_equation(stages, ctx: Context) -> EquationId:
    return validate_pipeline(stages, ctx)


# ---------------------------------------------------------------------------
# conditions along the general ansatz


def ansatz_first_condition(g: Geometry, alpha: FormField, omega: FormField, p,
                           gauge=None, charge=0.0) -> Multivector:
    """d̸α + ((n - 2Π)/n) ηΩ for the constructed Ω."""
    n = g.n
    view = None if gauge is None else gauge.charged(charge)
    m = omega.value(p)
    t = tables(g.sig).grade
    c = m.coeffs.copy()
    c *= ((n - 2 * t) / n) * (-1.0) ** t
    return dslash_field(g, alpha, view).value(p) + Multivector(g.sig, c)


def mixed_grade_terms(n: int, F: Multivector, alpha: Multivector) -> dict[str, Multivector]:
    """The F-dependent parts of the expanded gauged potential condition that
    leave grade p: a (p+2)-form built from F∧α and a (p-2)-form built from
    the double contraction.  For inspection only; both vanish when F = 0."""
    p = alpha.homogeneous_grade()
    if p is None:
        raise OperatorError("mixed-grade terms need a homogeneous form")
    check_potential_grade(n, p)
    up = 1 / (n - 2 * (p + 1)) - (n - 2 * p) / (n * (n - 1) * (n - 2)) - 2 / (n - 2)
    down = (1 / (n - 2 * (p - 1)) - (n - 2 * p) / (2 * n * (n - 1) * (n - 2))
            + 1 / (n - 2))
    return {"raised": wedge(F, alpha) * up,
            "lowered": double_contraction(F, alpha) * (-down)}


# ---------------------------------------------------------------------------
# flat-space ingredient bases


def _linear_form(sig: Signature, per_coord: list[Multivector], name="") -> FormField:
    """Σ_a x^a M_a for constant multivectors M_a."""
    n = sig.n
    comps: dict = {}
    for a, m in enumerate(per_coord):
        for blade, coef in m.as_dict().items():
            comps.setdefault(blade, []).append([[coef.real, coef.imag], [int(b == a) for b in range(n)]])
    return polynomial_field(sig, comps, name=name)


def _blades(sig: Signature, grade: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(sig.n), grade))


def _blade_name(idx) -> str:
    return "1" if not idx else "e" + "".join(str(a + 1) for a in idx)


def flat_cky_basis(sig: Signature, p: int, limit: int | None = None) -> list[FormField]:
    """Constant p-forms, rotation-type forms i_x β and dilation-type forms
    x̃ ∧ β (β constant) on flat space."""
    out = []
    for idx in _blades(sig, p):
        out.append(polynomial_field(sig, {_blade_name(idx): [[1.0, [0] * sig.n]]},
                                    name=f"const {_blade_name(idx)}"))
    if p + 1 <= sig.n:
        for idx in _blades(sig, p + 1):
            beta = Multivector.blade(sig, idx)
            per = [interior(a, beta) for a in range(sig.n)]
            out.append(_linear_form(sig, per, name=f"rotation i_x {_blade_name(idx)}"))
    if p >= 1:
        for idx in _blades(sig, p - 1):
            beta = Multivector.blade(sig, idx)
            per = [wedge(_lowered(sig, a), beta) for a in range(sig.n)]
            out.append(_linear_form(sig, per, name=f"dilation x∧{_blade_name(idx)}"))
    return out[:limit] if limit else out


HARMONIC_POLYNOMIALS = [
    ("1", [[1.0, (0, 0, 0)]]),
    ("x1", [[1.0, (1, 0, 0)]]),
    ("x1 x2", [[1.0, (1, 1, 0)]]),
    ("x1^2 - x2^2", [[1.0, (2, 0, 0)], [-1.0, (0, 2, 0)]]),
    ("x1^3 - 3 x1 x2^2", [[1.0, (3, 0, 0)], [-3.0, (1, 2, 0)]]),
    ("x1 x2 x3", [[1.0, (1, 1, 1)]]),
    ("x1^2 x3 - x2^2 x3", [[1.0, (2, 0, 1)], [-1.0, (0, 2, 1)]]),
]


def harmonic_polynomials(sig: Signature) -> list[FormField]:
    """Flat harmonic polynomials (Euclidean; for other signatures only the
    ones harmonic for every sign pattern are returned)."""
    n = sig.n
    out = []
    for name, terms in HARMONIC_POLYNOMIALS:
        used = max((i for _, e in terms for i, k in enumerate(e) if k), default=-1)
        if used >= n:
            continue
        sq = [i for _, e in terms for i, k in enumerate(e) if k >= 2]
        if sq and len({sig.g(i) for i in range(3) if i < n}) > 1:
            continue
        mono = [[c, list(e[:n]) + [0] * max(0, n - 3)] for c, e in terms]
        mono = [[c, e[:n]] for c, e in mono]
        out.append(polynomial_field(sig, {"1": mono}, name=name))
    return out


def flat_potential_basis(sig: Signature, p: int) -> list[FormField]:
    """Potential p-forms on flat space: harmonic polynomials for p = 0;
    constant, linear and harmonic-coefficient forms otherwise."""
    n = sig.n
    check_potential_grade(n, p)
    if p == 0:
        return harmonic_polynomials(sig)
    out = []
    zero = [0] * n
    for idx in _blades(sig, p)[:3]:
        name = _blade_name(idx)
        out.append(polynomial_field(sig, {name: [[1.0, zero]]}, name=f"const {name}"))
        for a in range(n):
            e = list(zero)
            e[a] = 1
            out.append(polynomial_field(sig, {name: [[1.0, e]]}, name=f"x{a + 1} {name}"))
            if len(out) > 8:
                break
        rest = [a for a in range(n) if a not in idx]
        if len(rest) >= 2:
            e = list(zero)
            e[rest[0]] = e[rest[1]] = 1
            out.append(polynomial_field(sig, {name: [[1.0, e]]},
                                        name=f"x{rest[0] + 1} x{rest[1] + 1} {name}"))
    return out


# ---------------------------------------------------------------------------
# curved-space ingredients by conformal rescaling of flat ones


def conformal_cky(g: Geometry, w: FormField) -> FormField:
    """CKY form of the stereographic chart from a flat one: frame
    components divided by h."""
    return w.times_scalar(power_field(g.conformal_factor_field(), -1.0))


def conformal_potential(g: Geometry, alpha: FormField) -> FormField:
    """Potential form of the chart from a flat one: frame components times
    h^{(n-2)/2} (for p = 0, the conformal Laplace rescaling)."""
    return alpha.times_scalar(power_field(g.conformal_factor_field(), (g.n - 2) / 2))
