import os
import sys
from fractions import Fraction

import pytest
import sympy

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from util.exactnum_utils import (
    ExactMatrix,
    GaussianRational,
    OnlyTrivialSolution,
    annihilator,
    format_scalar,
    kernel_basis,
    parse_scalar,
    solve_homogeneous,
)
from util.random_utils import make_rng, random_integers


@pytest.mark.parametrize("text, re, im", [
    ("3/4", Fraction(3, 4), 0),
    ("-1+2i", -1, 2),
    ("i", 0, 1),
    ("-i", 0, -1),
    ("1/2-3/4 i", Fraction(1, 2), Fraction(-3, 4)),
    (" 5 / 3 ", Fraction(5, 3), 0),
])
def test_parse_scalar(text, re, im):
    assert parse_scalar(text) == GaussianRational(re, im)


@pytest.mark.parametrize("text", ["", "1+", "abc", "1/0", "2ii"])
def test_parse_scalar_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_scalar(text)


def test_format_is_read_back():
    for value in [GaussianRational(Fraction(1, 2), Fraction(-3, 4)), GaussianRational(0, 1),
                  GaussianRational(-7), GaussianRational(2, -1), GaussianRational(0, Fraction(5, 3))]:
        assert parse_scalar(format_scalar(value)) == value


def test_gaussian_arithmetic():
    a = GaussianRational(1, 2)
    b = GaussianRational(3, -1)
    assert a * b == GaussianRational(5, 5)
    assert GaussianRational(1, 1).inverse() == GaussianRational(Fraction(1, 2), Fraction(-1, 2))
    assert a / a == GaussianRational(1)
    assert a ** 2 == GaussianRational(-3, 4)
    assert a - a == 0
    assert complex(a) == 1 + 2j


def test_kernel_basis_matches_sympy_rank():
    rows = [[1, 2, 3, 4], [2, 4, 6, 8], [0, 1, -1, 2]]
    m = ExactMatrix(rows)
    basis = kernel_basis(m)
    assert len(basis) == 4 - sympy.Matrix(rows).rank()
    for v in basis:
        assert all(x == 0 for x in m.apply(v))
        assert next(x for x in v if x) == 1


def test_kernel_over_gaussian_rationals():
    i = GaussianRational(0, 1)
    m = ExactMatrix([[1, i], [i, -1]])
    assert m.rank() == 1
    (v,) = kernel_basis(m)
    assert m.apply(v) == [0, 0]


def test_solve_homogeneous_trivial_kernel():
    with pytest.raises(OnlyTrivialSolution):
        solve_homogeneous(ExactMatrix.identity(3))


def test_annihilator():
    vectors = [[1, 1, 0], [0, 1, 1]]
    (alpha,) = annihilator([[GaussianRational(x) for x in v] for v in vectors], 3)
    assert alpha == [1, -1, 1]
    assert len(annihilator([], 2)) == 2


@pytest.mark.parametrize("case", range(10))
def test_echelon_is_fraction_free(case):
    rng = make_rng(20240611, 30, case)
    rows = [random_integers(rng, 5) for _ in range(5)]
    det = sympy.Matrix(rows).det()
    echelon, pivots = ExactMatrix(rows).echelon()
    assert all(x.re.denominator == 1 and x.im.denominator == 1 for row in echelon for x in row)
    if det:
        assert pivots == list(range(5))
        assert echelon[4][4] in (GaussianRational(int(det)), GaussianRational(-int(det)))
    else:
        assert len(pivots) < 5


def test_rref_of_rational_matrix_matches_sympy():
    rows = [[Fraction(1, 2), 1, Fraction(-2, 3), 0], [1, 2, Fraction(1, 5), 3], [Fraction(3, 2), 3, Fraction(-7, 15), 3]]
    reduced, pivots = ExactMatrix(rows).rref()
    expected, expected_pivots = sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator)
                                               for x in row] for row in rows]).rref()
    assert pivots == list(expected_pivots)
    for i in range(3):
        for j in range(4):
            assert reduced[i][j] == GaussianRational(Fraction(int(expected[i, j].p), int(expected[i, j].q)))
