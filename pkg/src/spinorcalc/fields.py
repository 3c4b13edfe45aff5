"""Form and spinor fields evaluated as jets.

A field is a closure ``(point, order) -> jet-valued value``.  Derived fields
(derivatives, operator outputs) ask their inputs for one more order than
they were asked for, so composing k differential stages needs inputs that
can produce order-k jets.  Closed-form fields (polynomials, exponentials)
produce any order; fields with a finite ``max_order`` make the budget
explicit.
"""
from __future__ import annotations

from collections import OrderedDict
from fractions import Fraction
from numbers import Number

import numpy as np

from .algebra import AlgebraError, Multivector, Signature, parse_blade, tables, wedge
from .jets import Jet, jet_space
from .representation import act_jet, gamma_rep

_CACHE_SIZE = 48


class FieldError(ValueError):
    pass


class JetDepthError(FieldError):
    pass


def as_point(p) -> tuple[float, ...]:
    return tuple(float(x) for x in p)


def _min_order(*orders):
    finite = [o for o in orders if o is not None]
    return min(finite) if finite else None


def _consume(max_order, k=1):
    return None if max_order is None else max_order - k


class _Field:
    def __init__(self, sig: Signature, evaluator, max_order=None, name=""):
        self.sig = sig
        self._evaluator = evaluator
        self.max_order = max_order
        self.name = name
        self._cache: OrderedDict = OrderedDict()
        self._derived: dict = {}

    @property
    def n(self) -> int:
        return self.sig.n

    def _lookup(self, p, order: int):
        if order < 0:
            raise JetDepthError(f"field {self.name or '?'} asked for a negative jet order")
        if self.max_order is not None and order > self.max_order:
            raise JetDepthError(
                f"field {self.name or '?'} supports jets up to order {self.max_order}, "
                f"asked for {order}"
            )
        key = (as_point(p), order)
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        out = self._evaluator(key[0], order)
        self._cache[key] = out
        if len(self._cache) > _CACHE_SIZE:
            self._cache.popitem(last=False)
        return out

    def derived(self, key, factory):
        """Memoise a field derived from this one (e.g. its derivative)."""
        hit = self._derived.get(key)
        if hit is None:
            hit = factory()
            self._derived[key] = hit
        return hit


class FormField(_Field):
    """Clifford-form-valued field; coefficients are frame components."""

    def __init__(self, sig, evaluator, *, grades=None, max_order=None, name=""):
        super().__init__(sig, evaluator, max_order, name)
        self.grades = None if grades is None else frozenset(grades)

    def at(self, p, order: int = 0) -> Multivector:
        return self._lookup(p, order)

    def value(self, p) -> Multivector:
        return self.at(p, 0).value()

    @property
    def grade(self) -> int:
        if self.grades is None or len(self.grades) != 1:
            raise FieldError(f"field {self.name or '?'} has no single declared grade")
        return next(iter(self.grades))

    def _combine(self, other, op, grades):
        if isinstance(other, FormField):
            mo = _min_order(self.max_order, other.max_order)
            return FormField(self.sig, lambda p, k: op(self.at(p, k), other.at(p, k)),
                             grades=grades, max_order=mo)
        if isinstance(other, Multivector):
            return FormField(self.sig, lambda p, k: op(self.at(p, k), other),
                             grades=grades, max_order=self.max_order)
        raise TypeError(f"cannot combine FormField with {type(other).__name__}")

    def _union(self, other):
        og = other.grades if isinstance(other, FormField) else other.grades_present()
        if self.grades is None or og is None:
            return None
        return self.grades | og

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, self._union(other))

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b, self._union(other))

    def __neg__(self):
        return self * -1

    def __mul__(self, other):
        if isinstance(other, (FormField, Multivector)):
            return self._combine(other, lambda a, b: a * b, None)
        return FormField(self.sig, lambda p, k: self.at(p, k) * other,
                         grades=self.grades, max_order=self.max_order)

    def __rmul__(self, other):
        if isinstance(other, Multivector):
            return FormField(self.sig, lambda p, k: other * self.at(p, k),
                             max_order=self.max_order)
        return self * other

    def wedge(self, other) -> "FormField":
        return self._combine(other, wedge, None)

    def times_scalar(self, f: "FormField") -> "FormField":
        """Pointwise product with a scalar (grade-0) field."""
        return FormField(self.sig, lambda p, k: _scalar_times(f.at(p, k), self.at(p, k)),
                         grades=self.grades, max_order=_min_order(self.max_order, f.max_order))


def _scalar_part(m: Multivector) -> np.ndarray:
    return m.coeffs[0]


def _scalar_times(f: Multivector, m: Multivector) -> Multivector:
    return m.scale(_scalar_part(f), f.space)


class SpinorField(_Field):
    """Spinor-valued field with ``2**(n//2)`` complex components."""

    def __init__(self, sig, evaluator, *, max_order=None, name=""):
        super().__init__(sig, evaluator, max_order, name)
        self.dim = gamma_rep(sig).dim

    def at(self, p, order: int = 0) -> Jet:
        return self._lookup(p, order)

    def value(self, p) -> np.ndarray:
        return self.at(p, 0).value

    def jet_value(self, p, order: int = 2) -> Jet:
        return self.at(p, order)

    def __add__(self, other: "SpinorField"):
        return SpinorField(self.sig, lambda p, k: self.at(p, k) + other.at(p, k),
                           max_order=_min_order(self.max_order, other.max_order))

    def __sub__(self, other: "SpinorField"):
        return SpinorField(self.sig, lambda p, k: self.at(p, k) - other.at(p, k),
                           max_order=_min_order(self.max_order, other.max_order))

    def __mul__(self, c):
        return SpinorField(self.sig, lambda p, k: self.at(p, k) * c, max_order=self.max_order)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1


# ---------------------------------------------------------------------------
# evaluation helpers shared by the differential operators


def multiply_scalar_spinor(f: Multivector, psi: Jet) -> Jet:
    order = min(f.space.order, psi.order)
    s = jet_space(f.n, order)
    return Jet(s, s.mul(f.coeffs[0][: s.size], psi.c[..., : s.size]))


def clifford_action(form: FormField | Multivector, psi: SpinorField) -> SpinorField:
    """Field of ω·ψ (left Clifford multiplication)."""
    if isinstance(form, Multivector):
        return SpinorField(psi.sig, lambda p, k: _act_jet(form, psi.at(p, k)),
                           max_order=psi.max_order)
    return SpinorField(psi.sig, lambda p, k: _act_jet(form.at(p, k), psi.at(p, k)),
                       max_order=_min_order(form.max_order, psi.max_order))


def _act_jet(m: Multivector, psi: Jet) -> Jet:
    out, space = act_jet(m, psi.c, psi.space)
    return Jet(space, out)


def scalar_times_spinor(f: FormField, psi: SpinorField) -> SpinorField:
    return SpinorField(psi.sig, lambda p, k: multiply_scalar_spinor(f.at(p, k), psi.at(p, k)),
                       max_order=_min_order(f.max_order, psi.max_order))


# ---------------------------------------------------------------------------
# constructors


def constant_form(m: Multivector, name="") -> FormField:
    if m.space is not None:
        m = m.value()
    sig = m.sig

    def ev(p, k):
        s = jet_space(sig.n, k)
        return Multivector(sig, s.constant(m.coeffs), s)

    return FormField(sig, ev, grades=m.grades_present() or {0}, name=name)


def constant_scalar(sig: Signature, value) -> FormField:
    return constant_form(Multivector.scalar(sig, value))


def _coordinate_powers(p, k, degrees):
    s = jet_space(len(p), k)
    powers = []
    for mu, x0 in enumerate(p):
        base = s.coordinate(mu, x0)
        row = [s.constant(1.0)]
        for _ in range(degrees[mu]):
            row.append(s.mul(row[-1], base))
        powers.append(row)
    return s, powers


def _parse_coef(c) -> complex:
    if isinstance(c, (list, tuple)):
        if len(c) != 2:
            raise FieldError(f"complex coefficient must be [re, im], got {c!r}")
        return complex(c[0], c[1])
    if isinstance(c, Number):
        return complex(c)
    if isinstance(c, str):
        try:
            return complex(Fraction(c))
        except (ValueError, ZeroDivisionError):
            pass
    raise FieldError(f"malformed coefficient {c!r}")


def polynomial_field(sig: Signature, components: dict, name="") -> FormField:
    """Form field with polynomial frame components.

    ``components`` maps a blade name (``"1"``, ``"e2"``, ``"e13"``...) to a
    list of monomials ``[coef, [k_1, ..., k_n]]`` meaning
    ``coef * x_1**k_1 * ... * x_n**k_n``.
    """
    n = sig.n
    terms = []
    for blade_name, monomials in components.items():
        try:
            mask = parse_blade(blade_name)
        except AlgebraError as exc:
            raise FieldError(str(exc)) from exc
        if mask >= 1 << n:
            raise FieldError(f"blade {blade_name} out of range for n={n}")
        if not isinstance(monomials, (list, tuple)):
            raise FieldError(f"monomial list expected for blade {blade_name}")
        for mono in monomials:
            if not isinstance(mono, (list, tuple)) or len(mono) != 2:
                raise FieldError(f"monomial must be [coef, powers], got {mono!r}")
            coef, powers = mono
            if (not isinstance(powers, (list, tuple)) or len(powers) != n
                    or any(not isinstance(e, int) or e < 0 for e in powers)):
                raise FieldError(f"powers must be {n} non-negative integers, got {powers!r}")
            terms.append((mask, _parse_coef(coef), tuple(powers)))
    degrees = [max((t[2][mu] for t in terms), default=0) for mu in range(n)]
    grades = {int(tables(sig).grade[m]) for m, _, _ in terms}

    def ev(p, k):
        s, powers = _coordinate_powers(p, k, degrees)
        out = np.zeros((1 << n, s.size), dtype=complex)
        for mask, coef, exps in terms:
            mono = s.constant(coef)
            for mu, e in enumerate(exps):
                if e:
                    mono = s.mul(mono, powers[mu][e])
            out[mask] += mono
        return Multivector(sig, out, s)

    return FormField(sig, ev, grades=grades or {0}, name=name)


def scalar_polynomial(sig: Signature, monomials, name="") -> FormField:
    return polynomial_field(sig, {"1": monomials}, name=name)


def exp_field(f: FormField, scale: complex = 1.0) -> FormField:
    """exp(scale * f) for a scalar field f."""
    sig = f.sig

    def ev(p, k):
        m = f.at(p, k)
        out = np.zeros_like(m.coeffs)
        out[0] = m.space.exp(scale * m.coeffs[0])
        return Multivector(sig, out, m.space)

    return FormField(sig, ev, grades={0}, max_order=f.max_order)


def power_field(f: FormField, r: float) -> FormField:
    sig = f.sig

    def ev(p, k):
        m = f.at(p, k)
        out = np.zeros_like(m.coeffs)
        out[0] = m.space.power(m.coeffs[0], r)
        return Multivector(sig, out, m.space)

    return FormField(sig, ev, grades={0}, max_order=f.max_order)


def limit_order(field, max_order: int):
    """Wrap a field so it refuses jets above ``max_order`` (data-like fields)."""
    if isinstance(field, SpinorField):
        return SpinorField(field.sig, field.at, max_order=max_order, name=field.name)
    return FormField(field.sig, field.at, grades=field.grades, max_order=max_order,
                     name=field.name)


def constant_spinor_field(sig: Signature, phi, name="") -> SpinorField:
    phi = np.asarray(phi, dtype=complex)
    dim = gamma_rep(sig).dim
    if phi.shape != (dim,):
        raise FieldError(f"spinor must have {dim} components, got shape {phi.shape}")

    def ev(p, k):
        s = jet_space(sig.n, k)
        return Jet(s, s.constant(phi))

    return SpinorField(sig, ev, name=name)


def coordinate_spinor_field(sig: Signature, phi0, phi1, name="") -> SpinorField:
    """ψ(x) = φ0 + (x^a e_a)·φ1, the flat-space twistor ansatz."""
    rep = gamma_rep(sig)
    phi0 = np.asarray(phi0, dtype=complex)
    phi1 = np.asarray(phi1, dtype=complex)
    if phi0.shape != (rep.dim,) or phi1.shape != (rep.dim,):
        raise FieldError(f"spinors must have {rep.dim} components for n={sig.n}")
    lowered = [rep.gamma[a] * sig.g(a) @ phi1 for a in range(sig.n)]

    def ev(p, k):
        s = jet_space(sig.n, k)
        out = s.constant(phi0)
        for a in range(sig.n):
            out = out + lowered[a][:, None] * s.coordinate(a, p[a])[None, :]
        return Jet(s, out)

    return SpinorField(sig, ev, name=name)


def spinor_times_scalar(psi: SpinorField, f: FormField) -> SpinorField:
    return scalar_times_spinor(f, psi)


def spinor_polynomial_field(sig: Signature, components: list, name="") -> SpinorField:
    """Spinor field whose components are polynomials: ``components[i]`` is a
    monomial list as in :func:`polynomial_field`."""
    dim = gamma_rep(sig).dim
    if len(components) != dim:
        raise FieldError(f"expected {dim} spinor components")
    scalars = [scalar_polynomial(sig, c) for c in components]

    def ev(p, k):
        rows = [f.at(p, k).coeffs[0] for f in scalars]
        return Jet(jet_space(sig.n, k), np.array(rows))

    return SpinorField(sig, ev, name=name)
