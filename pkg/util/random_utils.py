"""Seeded generators for reproducible generic data (integer coefficients in [-9, 9])."""
from itertools import combinations
from typing import Callable, List, Optional, Sequence

import numpy as np

from util.exactnum_utils import ExactMatrix, GaussianRational
from util.polyring_utils import MultiPoly, monomials_of_degree

COEFF_LOW = -9
COEFF_HIGH = 9


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator; extra integers select an independent sub-stream."""
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def random_integers(rng: np.random.Generator, size: int, nonzero: bool = False) -> List[int]:
    values = [int(x) for x in rng.integers(COEFF_LOW, COEFF_HIGH + 1, size=size)]
    if nonzero:
        values = [v if v else 1 for v in values]
    return values


def random_homogeneous(nvars: int, degree: int, rng: np.random.Generator) -> MultiPoly:
    """Dense homogeneous polynomial; resampled until nonzero."""
    monomials = monomials_of_degree(nvars, degree)
    while True:
        coeffs = random_integers(rng, len(monomials))
        poly = MultiPoly(nvars, dict(zip(monomials, coeffs)))
        if not poly.is_zero():
            return poly


def random_linear_forms(nvars: int, count: int, rng: np.random.Generator,
                        max_tries: int = 1000) -> List[MultiPoly]:
    """Linear forms in general position: every subset of at most nvars of them is independent."""
    for _ in range(max_tries):
        rows = [random_integers(rng, nvars) for _ in range(count)]
        if linear_forms_in_general_position(rows):
            return [MultiPoly.linear_form(row) for row in rows]
    raise ValueError(f"could not sample {count} linear forms in general position on {nvars} variables")


def linear_forms_in_general_position(rows: Sequence[Sequence[int]]) -> bool:
    nvars = len(rows[0])
    for k in range(1, min(len(rows), nvars) + 1):
        for subset in combinations(rows, k):
            if ExactMatrix(list(subset), cols=nvars).rank() < k:
                return False
    return True


def random_full_rank_matrix(rows: int, cols: int, rng: np.random.Generator,
                            accept: Optional[Callable[[ExactMatrix], bool]] = None) -> ExactMatrix:
    while True:
        m = ExactMatrix([random_integers(rng, cols) for _ in range(rows)], cols=cols)
        if m.rank() == min(rows, cols) and (accept is None or accept(m)):
            return m


def random_scalar(rng: np.random.Generator, nonzero: bool = True) -> GaussianRational:
    return GaussianRational(random_integers(rng, 1, nonzero=nonzero)[0])


def random_vector(rng: np.random.Generator, size: int) -> List[GaussianRational]:
    while True:
        v = [GaussianRational(x) for x in random_integers(rng, size)]
        if any(v):
            return v
