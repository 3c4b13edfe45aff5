"""Truncated multivariate Taylor jets.

A jet of order ``K`` at a point ``p`` stores the Taylor coefficients of a
function ``f(p + y)`` for every monomial ``y**m`` with ``|m| <= K``.
Coefficients live on the trailing axis of an ndarray, so a whole batch of
jets (the blades of a multivector, the components of a spinor) is a single
array.  Monomials are ordered by total degree, which makes truncation to a
lower order a prefix slice.

Differentiating an order-``K`` jet gives an exact order ``K - 1`` jet, so
every derivative in a composed expression is exact to roundoff.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
import scipy.sparse as sp


class JetError(ValueError):
    pass


def _exponents(n: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for combo in itertools.combinations_with_replacement(range(n), degree):
        e = [0] * n
        for mu in combo:
            e[mu] += 1
        out.append(tuple(e))
    return out


class JetSpace:
    """Monomial bookkeeping for jets in ``n`` variables up to ``order``."""

    def __init__(self, n: int, order: int):
        if n < 1 or order < 0:
            raise JetError(f"invalid jet space n={n}, order={order}")
        self.n = n
        self.order = order
        exps: list[tuple[int, ...]] = []
        self.offsets = []
        for deg in range(order + 1):
            exps.extend(_exponents(n, deg))
            self.offsets.append(len(exps))
        self.exps = np.array(exps, dtype=int).reshape(len(exps), n)
        self.degrees = self.exps.sum(axis=1)
        self.index = {e: i for i, e in enumerate(exps)}
        self.size = len(exps)

        rows, targets = [], []
        left, right = [], []
        for i, ei in enumerate(exps):
            for j, ej in enumerate(exps):
                if self.degrees[i] + self.degrees[j] > order:
                    continue
                left.append(i)
                right.append(j)
                targets.append(self.index[tuple(a + b for a, b in zip(ei, ej))])
        self._left = np.array(left, dtype=np.intp)
        self._right = np.array(right, dtype=np.intp)
        npairs = len(left)
        self._scatter = sp.csr_matrix(
            (np.ones(npairs), (np.arange(npairs), np.array(targets))),
            shape=(npairs, self.size),
        )
        self._gather = self._scatter.T.tocsr()

        # d/dy_mu maps an order-K jet to an order-(K-1) jet
        self._dsrc = []
        self._dfac = []
        if order > 0:
            low = self.offsets[order - 1]
            for mu in range(n):
                src = np.empty(low, dtype=np.intp)
                fac = np.empty(low)
                for t in range(low):
                    e = list(exps[t])
                    fac[t] = e[mu] + 1
                    e[mu] += 1
                    src[t] = self.index[tuple(e)]
                self._dsrc.append(src)
                self._dfac.append(fac)

    def __repr__(self) -> str:
        return f"JetSpace(n={self.n}, order={self.order})"

    # raw-array kernels -----------------------------------------------------

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Truncated product of jet arrays (broadcast over leading axes)."""
        a = np.asarray(a)
        b = np.asarray(b)
        pairs = a[..., self._left] * b[..., self._right]
        lead = pairs.shape[:-1]
        flat = pairs.reshape(-1, pairs.shape[-1])
        out = (self._gather @ flat.T).T
        return np.asarray(out).reshape(lead + (self.size,))

    def diff(self, a: np.ndarray, mu: int) -> np.ndarray:
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        return np.asarray(a)[..., self._dsrc[mu]] * self._dfac[mu]

    def constant(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=complex)
        out = np.zeros(value.shape + (self.size,), dtype=complex)
        out[..., 0] = value
        return out

    def coordinate(self, mu: int, x0: float) -> np.ndarray:
        out = self.constant(x0)
        if self.order >= 1:
            out[1 + mu] = 1.0
        return out

    def lift(self, arr: np.ndarray, space: "JetSpace") -> np.ndarray:
        """Re-express an array from ``space`` (same n, lower order allowed only
        when it is a constant jet) in this space by truncation."""
        if space.n != self.n:
            raise JetError("jet dimension mismatch")
        if space.order < self.order:
            raise JetError(
                f"cannot raise jet order from {space.order} to {self.order}"
            )
        return np.asarray(arr)[..., : self.size]

    def apply_series(self, a: np.ndarray, derivs) -> np.ndarray:
        """Compose a scalar function with jet ``a``.

        ``derivs(c0, k)`` must return the k-th derivative of the outer
        function evaluated at the jet's value ``c0``.
        """
        a = np.asarray(a, dtype=complex)
        c0 = a[..., 0]
        nil = a.copy()
        nil[..., 0] = 0.0
        out = self.constant(derivs(c0, 0))
        power = self.constant(np.ones_like(c0))
        for k in range(1, self.order + 1):
            power = self.mul(power, nil)
            out = out + (derivs(c0, k) / math.factorial(k))[..., None] * power
        return out

    def exp(self, a: np.ndarray) -> np.ndarray:
        return self.apply_series(a, lambda c0, k: np.exp(c0))

    def reciprocal(self, a: np.ndarray) -> np.ndarray:
        c0 = np.asarray(a)[..., 0]
        if np.any(c0 == 0):
            raise ZeroDivisionError("reciprocal of a jet with zero value")
        return self.apply_series(
            a, lambda c, k: (-1) ** k * math.factorial(k) / c ** (k + 1)
        )

    def power(self, a: np.ndarray, r: float) -> np.ndarray:
        c0 = np.asarray(a)[..., 0]
        if np.any(c0 == 0):
            raise ZeroDivisionError("fractional power of a jet with zero value")

        def derivs(c, k):
            coef = 1.0
            for j in range(k):
                coef *= r - j
            return coef * c ** (r - k)

        return self.apply_series(a, derivs)

    # derivative extraction ---------------------------------------------------

    def gradient(self, a: np.ndarray) -> np.ndarray:
        if self.order < 1:
            raise JetError("order-0 jet has no gradient")
        return np.moveaxis(np.asarray(a)[..., 1 : 1 + self.n], -1, 0)

    def hessian(self, a: np.ndarray) -> np.ndarray:
        if self.order < 2:
            raise JetError("jet of order < 2 has no Hessian")
        a = np.asarray(a)
        h = np.zeros((self.n, self.n) + a.shape[:-1], dtype=a.dtype)
        for mu in range(self.n):
            for nu in range(mu, self.n):
                e = [0] * self.n
                e[mu] += 1
                e[nu] += 1
                c = a[..., self.index[tuple(e)]]
                if mu == nu:
                    h[mu, mu] = 2 * c
                else:
                    h[mu, nu] = c
                    h[nu, mu] = c
        return h


@lru_cache(maxsize=None)
def jet_space(n: int, order: int) -> JetSpace:
    return JetSpace(n, order)


class Jet:
    """A batch of jets sharing one :class:`JetSpace`.

    ``Jet`` is the user-facing wrapper; hot paths use the raw-array kernels
    on :class:`JetSpace` directly.
    """

    __slots__ = ("space", "c")

    def __init__(self, space: JetSpace, c):
        self.space = space
        self.c = np.asarray(c, dtype=complex)
        if self.c.shape[-1] != space.size:
            raise JetError("coefficient array does not match jet space")

    @classmethod
    def constant(cls, n: int, order: int, value) -> "Jet":
        s = jet_space(n, order)
        return cls(s, s.constant(value))

    @classmethod
    def variable(cls, point, mu: int, order: int = 2) -> "Jet":
        s = jet_space(len(point), order)
        return cls(s, s.coordinate(mu, point[mu]))

    @classmethod
    def variables(cls, point, order: int = 2) -> list["Jet"]:
        return [cls.variable(point, mu, order) for mu in range(len(point))]

    @property
    def order(self) -> int:
        return self.space.order

    @property
    def value(self):
        return self.c[..., 0]

    @property
    def grad(self) -> np.ndarray:
        return self.space.gradient(self.c)

    @property
    def hess(self) -> np.ndarray:
        return self.space.hessian(self.c)

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space.n != self.space.n:
                raise JetError("jet dimension mismatch")
            order = min(self.order, other.order)
            s = jet_space(self.space.n, order)
            return s, self.c[..., : s.size], other.c[..., : s.size]
        other = np.asarray(other, dtype=complex)
        return self.space, self.c, self.space.constant(other)

    def __add__(self, other):
        s, a, b = self._coerce(other)
        return Jet(s, a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.c)

    def __sub__(self, other):
        s, a, b = self._coerce(other)
        return Jet(s, a - b)

    def __rsub__(self, other):
        s, a, b = self._coerce(other)
        return Jet(s, b - a)

    def __mul__(self, other):
        if np.isscalar(other):
            return Jet(self.space, self.c * other)
        s, a, b = self._coerce(other)
        return Jet(s, s.mul(a, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            if other == 0:
                raise ZeroDivisionError("division of a jet by zero")
            return Jet(self.space, self.c / other)
        if not isinstance(other, Jet):
            other = Jet(self.space, self.space.constant(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return Jet(self.space, self.space.constant(other)) * self.reciprocal()

    def __pow__(self, k):
        if isinstance(k, int) and k >= 0:
            out = Jet(self.space, self.space.constant(np.ones(self.c.shape[:-1])))
            for _ in range(k):
                out = out * self
            return out
        return Jet(self.space, self.space.power(self.c, k))

    def reciprocal(self) -> "Jet":
        return Jet(self.space, self.space.reciprocal(self.c))

    def exp(self) -> "Jet":
        return Jet(self.space, self.space.exp(self.c))

    def diff(self, mu: int) -> "Jet":
        return Jet(jet_space(self.space.n, self.order - 1), self.space.diff(self.c, mu))

    def truncate(self, order: int) -> "Jet":
        s = jet_space(self.space.n, order)
        return Jet(s, s.lift(self.c, self.space))

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, value={self.value!r})"
