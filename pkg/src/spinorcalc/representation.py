"""Matrix representation of the Clifford algebra on spinors, spinor pairing
and p-form Dirac currents."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import AlgebraError, Multivector, Signature, blade_indices, tables
from .jets import JetSpace, jet_space

_SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


def _kron_all(factors) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


class GammaRep:
    """Gamma matrices for the frame 1-forms e^a.

    Euclidean generators come from the usual Pauli tensor-product
    recursion; a timelike direction (g^aa = -1) gets an extra factor of i.
    """

    def __init__(self, sig: Signature):
        n = sig.n
        k = n // 2
        self.sig = sig
        self.dim = 2**k
        gens = []
        for j in range(k):
            pre = [_SIGMA3] * j
            post = [_ID2] * (k - j - 1)
            gens.append(_kron_all(pre + [_SIGMA1] + post))
            gens.append(_kron_all(pre + [_SIGMA2] + post))
        if n % 2:
            gens.append(_kron_all([_SIGMA3] * k))
        self.gamma = np.array(
            [g if sig.g(a) == 1 else 1j * g for a, g in enumerate(gens)]
        )
        # one matrix per blade: ordered product of its generators
        size = 1 << n
        blades = np.zeros((size, self.dim, self.dim), dtype=complex)
        for i in range(size):
            m = np.eye(self.dim, dtype=complex)
            for a in blade_indices(i):
                m = m @ self.gamma[a]
            blades[i] = m
        self.blades = blades

    @property
    def n(self) -> int:
        return self.sig.n

    def anticommutator_defect(self) -> float:
        worst = 0.0
        eye = np.eye(self.dim)
        for a in range(self.n):
            for b in range(self.n):
                ac = self.gamma[a] @ self.gamma[b] + self.gamma[b] @ self.gamma[a]
                target = 2 * eye * (self.sig.g(a) if a == b else 0)
                worst = max(worst, float(np.abs(ac - target).max()))
        return worst


@lru_cache(maxsize=None)
def gamma_rep(sig: Signature) -> GammaRep:
    return GammaRep(sig)


def represent(m: Multivector, rep: GammaRep | None = None) -> np.ndarray:
    """Matrix of left Clifford multiplication by a plain multivector."""
    if m.space is not None:
        m = m.value()
    rep = rep or gamma_rep(m.sig)
    if rep.sig != m.sig:
        raise AlgebraError("representation built for a different signature")
    return np.einsum("i...,ijk->...jk", m.coeffs, rep.blades)


def act(m: Multivector, psi: np.ndarray) -> np.ndarray:
    """Clifford action m·psi for plain values."""
    return represent(m) @ np.asarray(psi, dtype=complex)


def act_jet(m: Multivector, psi: np.ndarray, space: JetSpace) -> tuple[np.ndarray, JetSpace]:
    """Clifford action on a spinor jet ``psi`` of shape ``(dim, M)``.

    The multivector may be plain or carry jets; the result lives in the
    lower of the two jet orders, which is returned alongside it.
    """
    rep = gamma_rep(m.sig)
    psi = np.asarray(psi, dtype=complex)
    mc = m.coeffs
    if m.space is None:
        mc = space.constant(mc)
    elif m.space.order != space.order:
        space = jet_space(space.n, min(m.space.order, space.order))
        mc = mc[..., : space.size]
        psi = psi[..., : space.size]
    out = np.zeros(psi.shape, dtype=complex)
    for i in m.blades_present():
        rotated = np.tensordot(rep.blades[i], psi, axes=([1], [0]))
        out += space.mul(mc[i][None], rotated)
    return out, space


@dataclass(frozen=True)
class DualPairing:
    """Sesquilinear spinor pairing (u, v) = v^† H u.

    The default ``H = 1`` is the Hermitian pairing; any invertible matrix can
    be supplied to realise another adjoint involution.
    """

    matrix: np.ndarray | None = None

    def pair(self, u: np.ndarray, v: np.ndarray) -> complex:
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        if self.matrix is None:
            return complex(np.vdot(v, u))
        return complex(np.vdot(v, self.matrix @ u))

    def dual(self, psi: np.ndarray) -> np.ndarray:
        """Row vector ψ̄ with ψ̄ u = (u, ψ)."""
        psi = np.asarray(psi, dtype=complex)
        h = np.eye(len(psi)) if self.matrix is None else self.matrix
        return psi.conj() @ h


HERMITIAN = DualPairing()


def dirac_current(psi: np.ndarray, p: int, sig: Signature,
                  pairing: DualPairing = HERMITIAN) -> Multivector:
    """(ψψ̄)_p = (e_{a1}...e_{ap}·ψ, ψ) e^{a1}∧...∧e^{ap}, summed over all
    ordered index tuples; equal indices drop out of the wedge and each set of
    distinct indices contributes p! times its sorted term."""
    if not 0 <= p <= sig.n:
        raise AlgebraError(f"current grade {p} out of range for n={sig.n}")
    rep = gamma_rep(sig)
    psi = np.asarray(psi, dtype=complex)
    coeffs = np.zeros(1 << sig.n, dtype=complex)
    grade = tables(sig).grade
    bar = pairing.dual(psi)
    for i in np.nonzero(grade == p)[0]:
        lowered = 1
        for a in blade_indices(i):
            lowered *= sig.g(a)
        coeffs[i] = math.factorial(p) * lowered * (bar @ (rep.blades[i] @ psi))
    return Multivector(sig, coeffs)


def dirac_current_bruteforce(psi: np.ndarray, p: int, sig: Signature,
                             pairing: DualPairing = HERMITIAN) -> Multivector:
    """Literal sum over every index tuple with explicit matrix products."""
    rep = gamma_rep(sig)
    out = Multivector.zero(sig)
    for idx in itertools.product(range(sig.n), repeat=p):
        mat = np.eye(rep.dim, dtype=complex)
        form = Multivector.scalar(sig)
        for a in idx:
            mat = mat @ (rep.gamma[a] * sig.g(a))
            form = form ^ Multivector.basis_vector(sig, a)
        out = out + pairing.pair(mat @ psi, psi) * form
    return out
