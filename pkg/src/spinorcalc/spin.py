"""Spinor connection, Dirac and Penrose operators, and their identities.

The spinor covariant derivative along ``X_a`` is
``X_a(psi) + sum_{b<c} omega_bc(X_a) ½ e^b·e^c·psi``, the lift of the form
connection, so Clifford multiplication obeys the Leibniz rule.  An optional
gauge object adds ``A(X_a) psi``.
"""
from __future__ import annotations

import numpy as np

from .algebra import Multivector, Signature, blade_mask
from .fields import FormField, SpinorField, _act_jet
from .geometry import Geometry, GeometryError
from .jets import Jet, jet_space
from .representation import (  # noqa: F401  (re-exported)
    HERMITIAN,
    DualPairing,
    GammaRep,
    act,
    act_jet,
    dirac_current,
    dirac_current_bruteforce,
    gamma_rep,
    represent,
)


def _key(gauge):
    return None if gauge is None else id(gauge)


def spinor_nabla_jet(g: Geometry, psi: Jet, p, a: int, gauge_coeff=None) -> Jet:
    """Covariant derivative of an order-K spinor jet; returns order K-1."""
    s = psi.space
    if s.order < 1:
        raise GeometryError("spinor covariant derivative needs a jet of order >= 1")
    lo = jet_space(s.n, s.order - 1)
    E = g.frame(p, lo.order)
    out = np.zeros(psi.c.shape[:-1] + (lo.size,), dtype=complex)
    for mu in range(g.n):
        if np.any(E[a, mu]):
            out += lo.mul(E[a, mu][None], s.diff(psi.c, mu))
    low = psi.c[..., : lo.size]
    w = g.connection(p, lo.order)
    blades = gamma_rep(g.sig).blades
    for b in range(g.n):
        for c in range(b + 1, g.n):
            if not np.any(w[a, b, c]):
                continue
            rotated = 0.5 * blades[blade_mask((b, c))] @ low
            out += lo.mul(w[a, b, c][None], rotated)
    if gauge_coeff is not None:
        out += lo.mul(np.asarray(gauge_coeff)[None, : lo.size], low)
    return Jet(lo, out)


def spinor_nabla_field(g: Geometry, psi: SpinorField, a: int, gauge=None) -> SpinorField:
    def build():
        def ev(p, k):
            gc = None if gauge is None else gauge.component(p, k, a)
            return spinor_nabla_jet(g, psi.at(p, k + 1), p, a, gc)

        mo = None if psi.max_order is None else psi.max_order - 1
        return SpinorField(psi.sig, ev, max_order=mo)

    return psi.derived(("nabla", id(g), a, _key(gauge)), build)


def dirac_field(g: Geometry, psi: SpinorField, gauge=None) -> SpinorField:
    """e^a·nabla_{X_a} psi (gauged when ``gauge`` is given)."""

    def build():
        parts = [spinor_nabla_field(g, psi, a, gauge) for a in range(g.n)]
        gam = gamma_rep(g.sig).gamma

        def ev(p, k):
            acc = None
            for a, part in enumerate(parts):
                j = part.at(p, k)
                t = np.tensordot(gam[a], j.c, axes=([1], [0]))
                acc = t if acc is None else acc + t
            return Jet(jet_space(g.n, k), acc)

        return SpinorField(psi.sig, ev, max_order=parts[0].max_order)

    return psi.derived(("dirac", id(g), _key(gauge)), build)


def spinor_rough_laplacian_field(g: Geometry, psi: SpinorField, gauge=None) -> SpinorField:
    """g^aa (nabla_a nabla_a - nabla_{nabla_{X_a} X_a}) psi."""
    n = g.n
    first = [spinor_nabla_field(g, psi, a, gauge) for a in range(n)]
    second = [spinor_nabla_field(g, first[a], a, gauge) for a in range(n)]

    def ev(p, k):
        s = jet_space(n, k)
        w = g.connection(p, k)
        acc = np.zeros((psi.dim, s.size), dtype=complex)
        for a in range(n):
            acc += g.sig.g(a) * second[a].at(p, k).c
            for c in range(n):
                coef = w[a, c, a]
                if np.any(coef):
                    acc -= g.sig.g(c) * g.sig.g(a) * s.mul(coef[None], first[c].at(p, k).c)
        return Jet(s, acc)

    mo = None if psi.max_order is None else psi.max_order - 2
    return SpinorField(psi.sig, ev, max_order=mo)


def spinor_curvature_commutator_field(g: Geometry, psi: SpinorField, a: int, b: int,
                                      gauge=None) -> SpinorField:
    """[nabla_a, nabla_b] psi - nabla_{[X_a, X_b]} psi through jets."""
    from .geometry import bracket_direction_coeffs

    n = g.n
    first = [spinor_nabla_field(g, psi, c, gauge) for c in range(n)]
    ab = spinor_nabla_field(g, first[b], a, gauge)
    ba = spinor_nabla_field(g, first[a], b, gauge)

    def ev(p, k):
        s = jet_space(n, k)
        out = ab.at(p, k).c - ba.at(p, k).c
        for c, coef in enumerate(bracket_direction_coeffs(g, p, k, a, b)):
            if np.any(coef):
                out = out - s.mul(np.asarray(coef)[None], first[c].at(p, k).c)
        return Jet(s, out)

    mo = None if psi.max_order is None else psi.max_order - 2
    return SpinorField(psi.sig, ev, max_order=mo)


def penrose_field(g: Geometry, psi: SpinorField, a: int, gauge=None) -> SpinorField:
    """nabla_a psi - (1/n) e_a·Dpsi, gauged when ``gauge`` is given."""
    n = g.n
    nab = spinor_nabla_field(g, psi, a, gauge)
    dirac = dirac_field(g, psi, gauge)
    ea = Multivector.lowered_basis_vector(g.sig, a)

    def ev(p, k):
        return nab.at(p, k) - _act_jet(ea, dirac.at(p, k)) * (1.0 / n)

    return SpinorField(psi.sig, ev, max_order=nab.max_order)


def twistor_ansatz(g: Geometry, phi0, phi1) -> SpinorField:
    """Twistor spinor h^{-1/2}(phi0 + x^a e_a·phi1) of the backend's chart
    (h = 1 on flat space)."""
    from .fields import coordinate_spinor_field, power_field, scalar_times_spinor
    from .geometry import Flat

    flat = coordinate_spinor_field(g.sig, phi0, phi1, name="twistor")
    if isinstance(g, Flat):
        return flat
    return scalar_times_spinor(power_field(g.conformal_factor_field(), -0.5), flat)


# ---------------------------------------------------------------------------
# point-level API


def _norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v)))


def spinor_covariant_derivative(g: Geometry, psi: SpinorField, a: int, p, gauge=None):
    return spinor_nabla_field(g, psi, a, gauge).value(p)


def dirac(g: Geometry, psi: SpinorField, p, gauge=None) -> np.ndarray:
    return dirac_field(g, psi, gauge).value(p)


def penrose_residual(g: Geometry, psi: SpinorField, a: int, p, gauge=None) -> np.ndarray:
    return penrose_field(g, psi, a, gauge).value(p)


def penrose_worst(g: Geometry, psi: SpinorField, p, gauge=None) -> tuple[float, list[float]]:
    """Worst Penrose residual norm over frame directions, with the detail."""
    per = [_norm(penrose_residual(g, psi, a, p, gauge)) for a in range(g.n)]
    return max(per), per


def twistor_integrability_residuals(g: Geometry, psi: SpinorField, p):
    """Residuals of D²psi = -n/(4(n-1)) R psi, nabla_a Dpsi = (n/2) K_a psi,
    C_ab psi = 0; the last two are lists over a and over pairs a < b."""
    n = g.n
    if n < 3:
        raise GeometryError("twistor integrability conditions need n >= 3")
    pack = g.curvature(p)
    val = psi.value(p)
    dd = dirac_field(g, dirac_field(g, psi)).value(p)
    r1 = dd + n / (4 * (n - 1)) * pack.scalar * val
    dpsi = dirac_field(g, psi)
    r2 = [spinor_nabla_field(g, dpsi, a).value(p) - 0.5 * n * act(pack.K[a], val)
          for a in range(n)]
    r3 = [act(pack.C[a][b], val) for a in range(n) for b in range(a + 1, n)]
    return r1, r2, r3


def lichnerowicz_residual(g: Geometry, psi: SpinorField, p) -> np.ndarray:
    """D²psi - nabla²psi + ¼ R psi."""
    dd = dirac_field(g, dirac_field(g, psi)).value(p)
    rough = spinor_rough_laplacian_field(g, psi).value(p)
    scalar = g.curvature(p).scalar
    return dd - rough + 0.25 * scalar * psi.value(p)


def spinor_curvature_residual(g: Geometry, psi: SpinorField, a: int, b: int, p) -> np.ndarray:
    """Commutator of spinor derivatives minus ½ R_ab·psi."""
    comm = spinor_curvature_commutator_field(g, psi, a, b).value(p)
    R = g.curvature_two_forms(p)
    return comm - 0.5 * act(R[a][b], psi.value(p))


def spinor_leibniz_residual(g: Geometry, form: FormField, psi: SpinorField, a: int, p):
    """nabla_a(alpha·psi) - nabla_a alpha·psi - alpha·nabla_a psi."""
    from .fields import clifford_action
    from .geometry import nabla_field

    lhs = spinor_nabla_field(g, clifford_action(form, psi), a).value(p)
    rhs = (act(nabla_field(g, form, a).value(p), psi.value(p))
           + act(form.value(p), spinor_nabla_field(g, psi, a).value(p)))
    return lhs - rhs


def massive_residual(g: Geometry, psi: SpinorField, m: float, p, gauge=None) -> np.ndarray:
    return dirac(g, psi, p, gauge) - m * psi.value(p)


def harmonic_residual(g: Geometry, psi: SpinorField, p, gauge=None) -> np.ndarray:
    return dirac(g, psi, p, gauge)


__all__ = [
    "DualPairing", "GammaRep", "HERMITIAN", "Signature", "act", "act_jet", "dirac",
    "dirac_current", "dirac_current_bruteforce", "dirac_field", "gamma_rep",
    "harmonic_residual", "lichnerowicz_residual", "massive_residual", "penrose_field",
    "penrose_residual", "penrose_worst", "represent", "spinor_covariant_derivative",
    "spinor_curvature_commutator_field", "spinor_curvature_residual",
    "spinor_leibniz_residual", "spinor_nabla_field", "spinor_nabla_jet",
    "spinor_rough_laplacian_field", "twistor_ansatz", "twistor_integrability_residuals",
]
