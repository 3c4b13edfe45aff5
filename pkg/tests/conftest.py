import numpy as np
import pytest

from spinorcalc.algebra import Signature
from spinorcalc.representation import gamma_rep


def random_spinor(sig: Signature, rng) -> np.ndarray:
    d = gamma_rep(sig).dim
    return rng.normal(size=d) + 1j * rng.normal(size=d)


def random_points(n: int, count: int, rng, radius: float = 0.4):
    return [tuple(rng.uniform(-radius, radius, n)) for _ in range(count)]


def worst(fn, points) -> float:
    return max(float(np.linalg.norm(np.asarray(fn(p)))) for p in points)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_form(sig: Signature, rng, degree: int = 2):
    """Polynomial field with every blade present and random coefficients."""
    from spinorcalc.algebra import blade_name
    from spinorcalc.fields import polynomial_field

    n = sig.n
    comps = {}
    for i in range(1 << n):
        comps[blade_name(i)] = [[float(rng.normal()), [int(e) for e in rng.integers(0, degree + 1, size=n)]]
                                for _ in range(2)]
    return polynomial_field(sig, comps)


def random_spinor_field(sig: Signature, rng, terms: int = 2):
    from spinorcalc.fields import spinor_polynomial_field

    dim = gamma_rep(sig).dim
    return spinor_polynomial_field(sig, [
        [[[float(rng.normal()), float(rng.normal())], [int(e) for e in rng.integers(0, 3, size=sig.n)]]
         for _ in range(terms)] for _ in range(dim)])
