"""Seiberg–Witten residuals in oriented Euclidean four-space.

The orientation is the volume blade e1234.  Current checks compare the
magnitudes of the 2-form current components, so they do not depend on
whether the pairing makes those components real or imaginary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Multivector, Signature, blade_indices, tables, wedge
from .fields import SpinorField, as_point
from .gauge import GaugePotential
from .geometry import Geometry
from .operators import Context, OperatorSpec, OpKind, pipeline
from .representation import HERMITIAN, DualPairing, dirac_current
from .spin import dirac_field

ORIENTATION = "e1234"


class SWError(ValueError):
    pass


def _check_sig(sig: Signature):
    if sig.n != 4 or any(sig.g(a) != 1 for a in range(4)):
        raise SWError(f"Seiberg–Witten module needs Euclidean n = 4, got {sig}")


def hodge_star(m: Multivector) -> Multivector:
    """⋆ with orientation e1234: e^I ∧ ⋆e^I = vol for each blade."""
    sig = m.sig
    _check_sig(sig)
    full = (1 << 4) - 1
    out = np.zeros_like(m.coeffs)
    for i in range(1 << 4):
        if not np.any(m.coeffs[i]):
            continue
        j = full ^ i
        sign = wedge(Multivector.blade(sig, blade_indices(i)),
                     Multivector.blade(sig, blade_indices(j))).coeffs[full].real
        out[j] += sign * m.coeffs[i]
    return Multivector(sig, out, m.space)


def self_dual(F: Multivector) -> Multivector:
    return (F + hodge_star(F)) * 0.5


def anti_self_dual(F: Multivector) -> Multivector:
    return (F - hodge_star(F)) * 0.5


def tau(psi, sig: Signature, pairing: DualPairing = HERMITIAN) -> Multivector:
    """τ^ψ, the 2-form Dirac current of a spinor value."""
    _check_sig(sig)
    return dirac_current(psi, 2, sig, pairing)


@dataclass
class SWState:
    geometry: Geometry
    psi: SpinorField
    gauge: GaugePotential | None = None
    pairing: DualPairing = HERMITIAN

    def __post_init__(self):
        _check_sig(self.geometry.sig)


def sw_residuals(state: SWState, p) -> tuple[np.ndarray, Multivector]:
    """(D^ψ, F⁺ + ¼τ^ψ) at ``p``."""
    g = state.geometry
    p = as_point(p)
    g.check_point(p)
    r1 = dirac_field(g, state.psi, state.gauge).value(p)
    if state.gauge is None:
        F = Multivector.zero(g.sig)
    else:
        F = state.gauge.curvature(g).value(p)
    r2 = self_dual(F) + tau(state.psi.value(p), g.sig, state.pairing) * 0.25
    return r1, r2


@dataclass
class CurrentCheck:
    passed: bool
    max_norm: float
    norms: list = field(default_factory=list)
    max_component: float = 0.0

    def as_dict(self) -> dict:
        return {"pass": self.passed, "max_current_norm": self.max_norm,
                "max_component": self.max_component, "norms": self.norms}


def vanishing_current_check(candidate: SpinorField, points, tolerance: float = 1e-9,
                            pairing: DualPairing = HERMITIAN) -> CurrentCheck:
    """Largest 2-form current over ``points`` against ``tolerance``."""
    sig = candidate.sig
    _check_sig(sig)
    grade2 = tables(sig).grade == 2
    norms, comps = [], []
    for p in points:
        t = tau(candidate.value(p), sig, pairing)
        mags = np.abs(t.coeffs[grade2])
        norms.append(float(np.linalg.norm(mags)))
        comps.append(float(mags.max()))
    worst = max(norms, default=0.0)
    return CurrentCheck(worst <= tolerance, worst, norms, max(comps, default=0.0))


SHAPES = ("L_alpha", "L_alpha.L_omega", "Script_L_omega'.L_alpha",
          "Script_L_omega'.L_alpha.L_omega")


def candidate_pipelines(alpha, omega, omega_prime) -> dict[str, list[OperatorSpec]]:
    """The four gauged pipelines whose outputs are Seiberg–Witten candidates
    (stages in application order)."""
    la = OperatorSpec(OpKind.hat_L_alpha, alpha)
    lw = OperatorSpec(OpKind.hat_L_omega, omega)
    sl = OperatorSpec(OpKind.hat_Script_L_omega, omega_prime)
    return {
        SHAPES[0]: [la],
        SHAPES[1]: [lw, la],
        SHAPES[2]: [la, sl],
        SHAPES[3]: [lw, la, sl],
    }


def candidate_report(ctx: Context, psi: SpinorField, stages, points, tolerance=1e-9) -> dict:
    """Run one candidate pipeline: gauged harmonic residual, gauge curvature
    and 2-form current.  Passing requires all three to vanish."""
    _check_sig(ctx.sig)
    out = pipeline(stages, psi, ctx)
    state = SWState(ctx.geometry, out, ctx.gauge)
    dirac_norm, curv_norm = 0.0, 0.0
    for p in points:
        r1, _ = sw_residuals(state, p)
        dirac_norm = max(dirac_norm, float(np.linalg.norm(r1)))
        if ctx.gauge is not None:
            curv_norm = max(curv_norm, ctx.gauge.curvature(ctx.geometry).value(p).norm())
    cur = vanishing_current_check(out, points, tolerance)
    return {
        "dirac_residual": dirac_norm,
        "curvature_norm": curv_norm,
        "current": cur.as_dict(),
        "solution": bool(cur.passed and dirac_norm <= tolerance and curv_norm <= tolerance),
    }
