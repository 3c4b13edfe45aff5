"""Exterior and Clifford algebra on dense multivectors.

Blades are indexed by bitmask: bit ``a`` set means the frame 1-form
``e^(a+1)`` is present, and the blade is the wedge of its 1-forms in
ascending index order.  A multivector stores one coefficient per blade on
its leading axis.  Trailing axes are either a batch (plain coefficients,
multiplied elementwise) or the monomial axis of a :class:`JetSpace`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .jets import JetSpace, jet_space

MAX_DIM = 8


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    """Diagonal metric ``g^{aa}`` of an orthonormal frame."""

    diag: tuple[int, ...]

    def __post_init__(self):
        diag = tuple(int(d) for d in self.diag)
        object.__setattr__(self, "diag", diag)
        if not 1 <= len(diag) <= MAX_DIM:
            raise AlgebraError(f"dimension must be in 1..{MAX_DIM}, got {len(diag)}")
        if any(d not in (1, -1) for d in diag):
            raise AlgebraError("signature entries must be +1 or -1")

    @classmethod
    def euclidean(cls, n: int) -> "Signature":
        return cls((1,) * n)

    @classmethod
    def lorentzian(cls, n: int) -> "Signature":
        return cls((-1,) + (1,) * (n - 1))

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def is_euclidean(self) -> bool:
        return all(d == 1 for d in self.diag)

    def g(self, a: int) -> int:
        return self.diag[a]


def popcount(i: int) -> int:
    return bin(i).count("1")


def blade_indices(i: int) -> tuple[int, ...]:
    return tuple(a for a in range(MAX_DIM) if i >> a & 1)


def blade_mask(indices) -> int:
    mask = 0
    for a in indices:
        mask |= 1 << a
    return mask


def blade_name(i: int) -> str:
    if i == 0:
        return "1"
    return "e" + "".join(str(a + 1) for a in blade_indices(i))


def parse_blade(name: str) -> int:
    """``"1"`` is the scalar blade; ``"e13"`` is e^1 ∧ e^3 (1-based, n <= 8)."""
    if name == "1":
        return 0
    if not name.startswith("e") or not name[1:].isdigit():
        raise AlgebraError(f"malformed blade name {name!r}")
    idx = [int(ch) - 1 for ch in name[1:]]
    if sorted(set(idx)) != idx or min(idx) < 0:
        raise AlgebraError(f"blade indices must be strictly increasing: {name!r}")
    return blade_mask(idx)


def _reorder_sign(i: int, j: int) -> int:
    # sign of sorting the concatenation e^I e^J into ascending order
    swaps = 0
    for b in blade_indices(j):
        swaps += popcount(i >> (b + 1))
    return -1 if swaps % 2 else 1


class Tables:
    """Sign/permutation tables for one signature."""

    def __init__(self, sig: Signature):
        n = sig.n
        size = 1 << n
        self.size = size
        idx = np.arange(size)
        self.xor = idx[:, None] ^ idx[None, :]
        self.grade = np.array([popcount(i) for i in range(size)])
        clifford = np.zeros((size, size))
        wedge = np.zeros((size, size))
        for i in range(size):
            for j in range(size):
                s = _reorder_sign(i, j)
                common = i & j
                metric = 1
                for a in blade_indices(common):
                    metric *= sig.g(a)
                clifford[i, j] = s * metric
                if common == 0:
                    wedge[i, j] = s
        self.clifford = clifford
        self.wedge = wedge
        # i_{X_a}: blade i containing a -> (i ^ bit, sign)
        self.interior_sign = np.zeros((n, size))
        for a in range(n):
            for i in range(size):
                if i >> a & 1:
                    self.interior_sign[a, i] = -1 if popcount(i & ((1 << a) - 1)) % 2 else 1


@lru_cache(maxsize=None)
def tables(sig: Signature) -> Tables:
    return Tables(sig)


def _coef_mul(space: JetSpace | None):
    if space is None:
        return np.multiply
    return space.mul


class Multivector:
    """Dense multivector; immutable by convention.

    ``coeffs`` has shape ``(2**n,) + tail``.  When ``space`` is a
    :class:`JetSpace` the last tail axis holds Taylor coefficients and
    products of coefficients are jet products.
    """

    __slots__ = ("sig", "coeffs", "space")
    __array_priority__ = 100

    def __init__(self, sig: Signature, coeffs, space: JetSpace | None = None):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[0] != 1 << sig.n:
            raise AlgebraError(
                f"expected {1 << sig.n} blade coefficients, got {coeffs.shape[0]}"
            )
        if space is not None and coeffs.shape[-1] != space.size:
            raise AlgebraError("trailing axis does not match jet space")
        self.sig = sig
        self.coeffs = coeffs
        self.space = space

    # constructors --------------------------------------------------------

    @classmethod
    def zero(cls, sig: Signature, space: JetSpace | None = None) -> "Multivector":
        shape = (1 << sig.n,) + ((space.size,) if space else ())
        return cls(sig, np.zeros(shape, dtype=complex), space)

    @classmethod
    def scalar(cls, sig: Signature, value=1.0) -> "Multivector":
        c = np.zeros(1 << sig.n, dtype=complex)
        c[0] = value
        return cls(sig, c)

    @classmethod
    def blade(cls, sig: Signature, indices_or_name, coef=1.0) -> "Multivector":
        if isinstance(indices_or_name, str):
            mask = parse_blade(indices_or_name)
        else:
            mask = blade_mask(indices_or_name)
        if mask >= 1 << sig.n:
            raise AlgebraError("blade index out of range for this signature")
        c = np.zeros(1 << sig.n, dtype=complex)
        c[mask] = coef
        return cls(sig, c)

    @classmethod
    def basis_vector(cls, sig: Signature, a: int) -> "Multivector":
        """The frame 1-form e^a (0-based ``a``)."""
        return cls.blade(sig, (a,))

    @classmethod
    def lowered_basis_vector(cls, sig: Signature, a: int) -> "Multivector":
        """e_a = g_aa e^a."""
        return cls.blade(sig, (a,), sig.g(a))

    @classmethod
    def from_dict(cls, sig: Signature, terms: dict) -> "Multivector":
        c = np.zeros(1 << sig.n, dtype=complex)
        for name, v in terms.items():
            mask = parse_blade(name)
            if mask >= 1 << sig.n:
                raise AlgebraError(f"blade {name} out of range")
            c[mask] += v
        return cls(sig, c)

    # bookkeeping ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self.sig.n

    @property
    def tail(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    def _same(self, other: "Multivector") -> tuple[np.ndarray, np.ndarray, JetSpace | None]:
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.sig != self.sig:
            raise AlgebraError("signature mismatch")
        a, b = self.coeffs, other.coeffs
        sa, sb = self.space, other.space
        if sa is None and sb is None:
            # a single multivector against a batch: pad the trailing axes
            if a.ndim < b.ndim:
                a = a.reshape(a.shape + (1,) * (b.ndim - a.ndim))
            elif b.ndim < a.ndim:
                b = b.reshape(b.shape + (1,) * (a.ndim - b.ndim))
            return a, b, None
        if sa is None:
            return sb.constant(a), b, sb
        if sb is None:
            return a, sa.constant(b), sa
        if sa.order != sb.order:
            s = jet_space(sa.n, min(sa.order, sb.order))
            return a[..., : s.size], b[..., : s.size], s
        return a, b, sa

    def _new(self, coeffs, space="keep") -> "Multivector":
        return Multivector(self.sig, coeffs, self.space if space == "keep" else space)

    def value(self) -> "Multivector":
        """Strip jet information, keeping the value at the expansion point."""
        if self.space is None:
            return self
        return Multivector(self.sig, self.coeffs[..., 0])

    def truncate(self, order: int) -> "Multivector":
        if self.space is None:
            return self
        s = jet_space(self.space.n, order)
        return Multivector(self.sig, s.lift(self.coeffs, self.space), s)

    def blades_present(self) -> np.ndarray:
        flat = self.coeffs.reshape(self.coeffs.shape[0], -1)
        return np.nonzero(np.any(flat != 0, axis=1))[0]

    def grades_present(self) -> set[int]:
        t = tables(self.sig)
        return {int(t.grade[i]) for i in self.blades_present()}

    def homogeneous_grade(self) -> int | None:
        g = self.grades_present()
        if len(g) == 1:
            return g.pop()
        if not g:
            return None
        raise AlgebraError(f"multivector is not homogeneous (grades {sorted(g)})")

    def norm(self) -> float:
        c = self.coeffs if self.space is None else self.coeffs[..., 0]
        return float(np.sqrt(np.sum(np.abs(c) ** 2)))

    def allclose(self, other: "Multivector", atol=1e-12) -> bool:
        return (self - other).norm() <= atol

    def as_dict(self, tol=0.0) -> dict[str, complex]:
        c = self.coeffs if self.space is None else self.coeffs[..., 0]
        return {blade_name(i): complex(c[i]) for i in range(len(c)) if abs(c[i]) > tol}

    def __repr__(self) -> str:
        if self.tail and self.space is None:
            return f"Multivector(n={self.n}, batch={self.tail})"
        terms = self.as_dict()
        if not terms:
            return "0"
        return " + ".join(f"({v:.6g}){k}" for k, v in terms.items())

    # linear structure --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Multivector):
            other = Multivector.scalar(self.sig, other)
        a, b, s = self._same(other)
        return Multivector(self.sig, a + b, s)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, Multivector):
            other = Multivector.scalar(self.sig, other)
        a, b, s = self._same(other)
        return Multivector(self.sig, a - b, s)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return clifford_mul(self, other)
        return self._new(self.coeffs * other)

    def __rmul__(self, other):
        return self._new(self.coeffs * other)

    def __truediv__(self, other):
        return self._new(self.coeffs / other)

    def __xor__(self, other):
        return wedge(self, other)

    def scale(self, jet_coeffs: np.ndarray, space: JetSpace) -> "Multivector":
        """Multiply by a scalar jet (raw coefficient array in ``space``)."""
        a = self.coeffs
        if self.space is None:
            a = space.constant(a)
        elif self.space.order != space.order:
            order = min(self.space.order, space.order)
            s = jet_space(space.n, order)
            a = a[..., : s.size]
            jet_coeffs = np.asarray(jet_coeffs)[..., : s.size]
            space = s
        return Multivector(self.sig, space.mul(a, jet_coeffs), space)


# ---------------------------------------------------------------------------
# products


def _bilinear(a: Multivector, b: Multivector, sign_table: np.ndarray) -> Multivector:
    ac, bc, space = a._same(b)
    t = tables(a.sig)
    mul = _coef_mul(space)
    out = np.zeros(np.broadcast_shapes(ac.shape, bc.shape), dtype=complex)
    rows = Multivector(a.sig, ac, space).blades_present()
    cols = Multivector(a.sig, bc, space).blades_present()
    if len(rows) == 0 or len(cols) == 0:
        return Multivector(a.sig, out, space)
    bsub = bc[cols]
    extra = (1,) * (bsub.ndim - 1)
    for i in rows:
        s = sign_table[i, cols]
        keep = s != 0
        if not keep.any():
            continue
        contrib = mul(ac[i][None], bsub[keep]) * s[keep].reshape((-1,) + extra)
        out[t.xor[i, cols[keep]]] += contrib
    return Multivector(a.sig, out, space)


def clifford_mul(a: Multivector, b: Multivector) -> Multivector:
    return _bilinear(a, b, tables(a.sig).clifford)


def wedge(a: Multivector, b: Multivector) -> Multivector:
    return _bilinear(a, b, tables(a.sig).wedge)


def interior(a: int, m: Multivector) -> Multivector:
    """Contraction i_{X_a} with the frame vector dual to e^a (0-based)."""
    if not 0 <= a < m.n:
        raise AlgebraError(f"frame index {a} out of range")
    t = tables(m.sig)
    sign = t.interior_sign[a]
    out = np.zeros_like(m.coeffs)
    src = np.nonzero(sign)[0]
    extra = (1,) * (m.coeffs.ndim - 1)
    out[src ^ (1 << a)] = m.coeffs[src] * sign[src].reshape((-1,) + extra)
    return m._new(out)


def interior_up(a: int, m: Multivector) -> Multivector:
    """i_{X^a} = g^{aa} i_{X_a}."""
    return interior(a, m) * m.sig.g(a)


def interior_vector(v: Multivector, m: Multivector) -> Multivector:
    """i_{ṽ} m for a 1-form ``v`` (metric dual), coefficients may be jets."""
    out = None
    for a in range(v.n):
        comp = v.coeffs[1 << a]
        if not np.any(comp):
            continue
        term = _scale_by(interior_up(a, m), comp, v.space)
        out = term if out is None else out + term
    if out is None:
        return m * 0
    return out


def _scale_by(m: Multivector, coef, space: JetSpace | None) -> Multivector:
    if space is None:
        return m * coef if np.ndim(coef) == 0 else m._new(m.coeffs * coef)
    return m.scale(coef, space)


def eta(m: Multivector) -> Multivector:
    """Main automorphism: grade-p part scaled by (-1)^p."""
    g = tables(m.sig).grade
    s = np.where(g % 2, -1.0, 1.0).reshape((-1,) + (1,) * (m.coeffs.ndim - 1))
    return m._new(m.coeffs * s)


def reversion(m: Multivector) -> Multivector:
    g = tables(m.sig).grade
    s = np.where((g * (g - 1) // 2) % 2, -1.0, 1.0).reshape((-1,) + (1,) * (m.coeffs.ndim - 1))
    return m._new(m.coeffs * s)


def grade_project(m: Multivector, p: int) -> Multivector:
    if not 0 <= p <= m.n:
        raise AlgebraError(f"grade {p} out of range")
    g = tables(m.sig).grade
    mask = (g == p).reshape((-1,) + (1,) * (m.coeffs.ndim - 1))
    return m._new(m.coeffs * mask)


def pi_degree(m: Multivector) -> Multivector:
    """e^a ∧ i_{X_a} m, computed by the literal sum."""
    out = m * 0
    for a in range(m.n):
        out = out + wedge(Multivector.basis_vector(m.sig, a), interior(a, m))
    return out


def clifford_bracket(a: Multivector, b: Multivector) -> Multivector:
    return clifford_mul(a, b) - clifford_mul(b, a)


def bracket_two_form(alpha: Multivector, beta: Multivector) -> Multivector:
    """-2 i_{X^a} alpha ∧ i_{X_a} beta; equals the bracket for 2-form alpha."""
    out = beta * 0
    for a in range(alpha.n):
        out = out - 2 * wedge(interior_up(a, alpha), interior(a, beta))
    return out


def frame_sandwich(m: Multivector) -> Multivector:
    """Brute-force sum over a of e^a · m · e_a."""
    out = m * 0
    for a in range(m.n):
        up = Multivector.basis_vector(m.sig, a)
        down = Multivector.lowered_basis_vector(m.sig, a)
        out = out + clifford_mul(clifford_mul(up, m), down)
    return out


def frame_sandwich_closed_form(m: Multivector) -> Multivector:
    """(n - 2Π) η m."""
    g = tables(m.sig).grade
    s = ((m.n - 2 * g) * np.where(g % 2, -1.0, 1.0)).reshape((-1,) + (1,) * (m.coeffs.ndim - 1))
    return m._new(m.coeffs * s)


def vector_left(x: Multivector, m: Multivector) -> Multivector:
    """x·m via x ∧ m + i_x̃ m for a 1-form x."""
    return wedge(x, m) + interior_vector(x, m)


def vector_right(x: Multivector, m: Multivector) -> Multivector:
    """m·x via x ∧ ηm − i_x̃ ηm for a 1-form x."""
    em = eta(m)
    return wedge(x, em) - interior_vector(x, em)


def _contract_multi(m: Multivector, idx: tuple[int, ...], up: bool) -> Multivector:
    out = m
    for a in reversed(idx):
        out = interior_up(a, out) if up else interior(a, out)
    return out


def clifford_mul_by_contractions(a: Multivector, b: Multivector) -> Multivector:
    """Clifford product from wedges of iterated contractions.

    sum_k (-1)^floor(k/2)/k! (η^k i_{X_I} a) ∧ i_{X^I} b over ordered
    multi-indices I of length k.  Only distinct indices survive and the
    summand is symmetric under permutations of I, so the k! cancels against
    the sum over sorted index sets.
    """
    out = a * 0
    for k in range(a.n + 1):
        sgn = -1 if (k // 2) % 2 else 1
        for idx in combinations(range(a.n), k):
            left = _contract_multi(a, idx, up=False)
            if k % 2:
                left = eta(left)
            right = _contract_multi(b, idx, up=True)
            out = out + sgn * wedge(left, right)
    return out


def clifford_bracket_by_contractions(a: Multivector, b: Multivector) -> Multivector:
    return clifford_mul_by_contractions(a, b) - clifford_mul_by_contractions(b, a)


def random_multivector(sig: Signature, rng: np.random.Generator, *, grades=None,
                       integer: bool = False, batch: tuple[int, ...] = (),
                       complex_coeffs: bool = False) -> Multivector:
    size = 1 << sig.n
    shape = (size,) + tuple(batch)
    if integer:
        c = rng.integers(-3, 4, size=shape).astype(complex)
    else:
        c = rng.uniform(-1, 1, size=shape).astype(complex)
        if complex_coeffs:
            c = c + 1j * rng.uniform(-1, 1, size=shape)
    if grades is not None:
        g = tables(sig).grade
        keep = np.isin(g, list(grades)).reshape((-1,) + (1,) * len(batch))
        c = c * keep
    return Multivector(sig, c)

