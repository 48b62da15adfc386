import os
import sys

import pytest
import sympy

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from util.exactnum_utils import DegenerateInput, GaussianRational
from util.polyring_utils import (
    InhomogeneousPolynomial,
    MultiPoly,
    UniPoly,
    VariableMismatch,
    are_proportional,
    arith,
    compose,
    divides,
    homogeneous_degree,
    partial_derivative,
    restrict_to_line,
    sylvester_resultant,
    uni_gcd,
)
from util.random_utils import make_rng, random_homogeneous, random_integers

SEED = 20240611

x, y = sympy.symbols("x y")


def z(nvars, j):
    return MultiPoly.variable(nvars, j)


def to_sympy(f: MultiPoly, symbols):
    expr = 0
    for exp, c in f.terms.items():
        term = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)
        for s, e in zip(symbols, exp):
            term *= s ** e
        expr += term
    return sympy.expand(expr)


def random_poly(rng, nvars=3, top=2):
    acc = MultiPoly.zero(nvars)
    for d in range(top + 1):
        acc = acc + random_homogeneous(nvars, d, rng)
    return acc


def test_homogeneous_degree():
    assert homogeneous_degree(z(2, 0) ** 2 + z(2, 0) * z(2, 1)) == 2
    with pytest.raises(InhomogeneousPolynomial):
        homogeneous_degree(z(2, 0) ** 2 + z(2, 1))
    with pytest.raises(DegenerateInput):
        homogeneous_degree(MultiPoly.zero(2))


def test_partial_derivative():
    f = z(2, 0) ** 3 * z(2, 1) + z(2, 1) * 5
    assert partial_derivative(f, 0) == (z(2, 0) ** 2 * z(2, 1)).scale(3)
    assert partial_derivative(f, 1) == z(2, 0) ** 3 + MultiPoly.constant(2, 5)


def test_divides():
    ok, q = divides(z(2, 0), z(2, 0) * z(2, 1) + z(2, 0) ** 2)
    assert ok and q == z(2, 1) + z(2, 0)
    ok, q = divides(z(2, 0), z(2, 1))
    assert not ok and q is None


def test_compose_linear_substitution():
    f = z(2, 0) * z(2, 1)
    subs = [z(2, 0) + z(2, 1), z(2, 0) - z(2, 1)]
    assert compose(f, subs) == z(2, 0) ** 2 - z(2, 1) ** 2


def test_restrict_to_line():
    f = z(2, 0) * z(2, 1)
    assert restrict_to_line(f, [1, 0], [0, 1]) == UniPoly([0, 1])
    assert restrict_to_line(f, [1, 1], [1, -1]) == UniPoly([1, 0, -1])


def test_uni_gcd():
    a = UniPoly([2, -3, 1])
    b = UniPoly([-3, 2, 1])
    assert uni_gcd(a, b) == UniPoly([-1, 1])
    assert uni_gcd(a, UniPoly([5])).degree() == 0


def test_sylvester_resultant_against_sympy():
    X, Y = z(2, 0), z(2, 1)
    one = MultiPoly.constant(2, 1)
    a = [one, Y, one]
    b = [-Y, one]
    res = sylvester_resultant(a, b)
    assert to_sympy(res, [x, y]) == sympy.expand(sympy.resultant(x ** 2 + y * x + 1, x - y, x))
    a = [Y ** 2 - one, Y.scale(2), one.scale(3)]
    b = [Y, one.scale(-1), Y + one, one]
    res = sylvester_resultant(a, b)
    expected = sympy.resultant(3 * x ** 2 + 2 * y * x + y ** 2 - 1, x ** 3 + (y + 1) * x ** 2 - x + y, x)
    assert to_sympy(res, [x, y]) == sympy.expand(expected)


def test_resultant_of_constant():
    c = MultiPoly.constant(2, 3)
    b = [MultiPoly.constant(2, 1), MultiPoly.constant(2, 0), MultiPoly.constant(2, 1)]
    assert sylvester_resultant([c], b) == MultiPoly.constant(2, 9)


def test_are_proportional():
    f = z(3, 0) + z(3, 1).scale(2)
    assert are_proportional(f, f.scale(GaussianRational(0, 3)))
    assert not are_proportional(f, f + z(3, 2))


def test_arith():
    z0, z1, z2 = z(3, 0), z(3, 1), z(3, 2)
    assert arith(z0 + z1, z0 - z1, "mul") == z0 ** 2 - z1 ** 2
    assert arith(z0 + z1, MultiPoly.zero(3), "mul").is_zero()
    square = arith(z0 + z1 + z2, z0 + z1 + z2, "mul")
    assert len(square.terms) == 6
    assert square.terms[(1, 1, 0)] == 2
    assert arith(z0, -z0, "add").is_zero()
    with pytest.raises(VariableMismatch):
        arith(z0, z(2, 0), "add")


@pytest.mark.parametrize("case", range(20))
def test_ring_axioms(case):
    rng = make_rng(SEED, 10, case)
    f, g, h = random_poly(rng), random_poly(rng), random_poly(rng)
    assert (f * g) * h == f * (g * h)
    assert (f + g) + h == f + (g + h)
    assert f * (g + h) == f * g + f * h
    assert f * g == g * f
    assert (f - f).is_zero()


@pytest.mark.parametrize("case", range(100))
def test_divides_random_pairs(case):
    rng = make_rng(SEED, 11, case)
    f = random_poly(rng, top=int(rng.integers(1, 3)))
    while len(f.terms) < 2:
        f = random_poly(rng)
    q = random_poly(rng)
    ok, quotient = divides(f, f * q)
    assert ok and quotient == q
    # f has two or more terms, so no monomial is a multiple of it
    exponent = tuple(int(e) for e in rng.integers(0, 3, size=3))
    m = MultiPoly(3, {exponent: random_integers(rng, 1, nonzero=True)[0]})
    ok, quotient = divides(f, f * q + m)
    assert not ok and quotient is None


@pytest.mark.parametrize("case", range(20))
def test_restrict_to_line_is_multiplicative(case):
    rng = make_rng(SEED, 12, case)
    f, g = random_poly(rng), random_poly(rng)
    base = random_integers(rng, 3)
    direction = random_integers(rng, 3, nonzero=True)
    assert restrict_to_line(f * g, base, direction) == restrict_to_line(f, base, direction) * restrict_to_line(g, base, direction)
    assert restrict_to_line(f + g, base, direction) == restrict_to_line(f, base, direction) + restrict_to_line(g, base, direction)
