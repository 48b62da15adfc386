import os
import sys
from math import gcd, lcm

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from models.poles import LogFoliationSpec, PoleSystem
from models.tensors import Covector
from services.foliation_services import (
    degree_by_restriction,
    first_integral,
    foliation_degree,
    integrability_p2,
    invariant_pole_components,
    is_closed_form,
    is_closed_log,
    is_logarithmic,
    radial_compatibility,
    radial_volume_form,
    restriction_preserves_decomposability,
)
from services.logtensor_services import expand, radial_kernel, tensor_from_covectors
from util.forms_utils import PolyForm
from util.polyring_utils import MultiPoly
from util.random_utils import make_rng, random_homogeneous, random_linear_forms, random_vector

SEED = 20240611
DEGREE_SHAPES = [(n, p) for n in (3, 4, 5) for p in (1, 2, 3) if p <= n - 1]


def z(nvars, j):
    return MultiPoly.variable(nvars, j)


def u(r, k):
    # e_k - e_last, a radial covector for all-linear poles
    coords = [0] * r
    coords[k] = 1
    coords[-1] = -1
    return Covector(coords)


def split_tensor(r):
    return tensor_from_covectors([u(r, 0), u(r, 1)]) + tensor_from_covectors([u(r, 2), u(r, 3)])


def random_poles(rng, n, degrees):
    while True:
        polys = [random_homogeneous(n + 1, d, rng) for d in degrees]
        try:
            return PoleSystem(n=n, polys=polys)
        except ValueError:
            continue


def random_radial_tensor(rng, degrees, p):
    basis = radial_kernel(degrees, len(degrees), p)
    coords = random_vector(rng, len(basis))
    tensor = basis[0].scale(0)
    for c, b in zip(coords, basis):
        tensor = tensor + b.scale(c)
    return tensor


@pytest.fixture(scope="module")
def five_planes_p3():
    polys = [z(4, j) for j in range(4)] + [z(4, 0) + z(4, 1) + z(4, 2) + z(4, 3)]
    return LogFoliationSpec(poles=PoleSystem(n=3, polys=polys), tensor=split_tensor(5))


@pytest.fixture(scope="module")
def coordinate_p4():
    return PoleSystem(n=4, polys=[z(5, j) for j in range(5)])


@pytest.fixture(scope="module")
def fibration():
    polys = [z(4, 0), z(4, 1) ** 2 + z(4, 2) * z(4, 3), z(4, 3) ** 3 + z(4, 0) * z(4, 1) * z(4, 2)]
    poles = PoleSystem(n=3, polys=polys)
    return LogFoliationSpec(poles=poles, tensor=radial_kernel(poles.degrees, 3, 2)[0])


def test_expansion_is_logarithmic_and_closed(five_planes_p3):
    w = expand(five_planes_p3)
    assert is_logarithmic(w, five_planes_p3.poles)
    assert is_closed_log(five_planes_p3, w)
    assert invariant_pole_components(five_planes_p3, w) == [True] * 5
    assert radial_compatibility(five_planes_p3, w)


def test_logarithmic_rejects():
    poles = PoleSystem(n=1, polys=[z(2, 0)])
    assert not is_logarithmic(PolyForm.basis(2, (1,)), poles)
    assert is_logarithmic(PolyForm.basis(2, (1,), z(2, 0)), poles)


def test_closedness_rejects():
    poles = PoleSystem(n=1, polys=[z(2, 0), z(2, 1)])
    assert is_closed_form(PolyForm.basis(2, (0,), z(2, 1)), poles)
    assert not is_closed_form(PolyForm.basis(2, (1,), z(2, 0) ** 2), poles)


def test_foliation_degree_matches_restriction(five_planes_p3, fibration):
    assert foliation_degree(five_planes_p3) == 2
    assert foliation_degree(fibration) == 3
    for seed in (1, 2, 3):
        assert degree_by_restriction(five_planes_p3, seed) == 2


def test_degree_of_pencil_of_lines():
    poles = PoleSystem(n=2, polys=[z(3, 0), z(3, 1), z(3, 2)])
    spec = LogFoliationSpec(poles=poles, tensor=Covector([1, 1, -2]).to_tensor())
    assert foliation_degree(spec) == 1
    assert degree_by_restriction(spec, seed=11) == 1


def test_degree_by_restriction_needs_room():
    poles = PoleSystem(n=2, polys=[z(3, 0), z(3, 1), z(3, 2)])
    spec = LogFoliationSpec(poles=poles, tensor=radial_kernel([1, 1, 1], 3, 2)[0])
    with pytest.raises(ValueError):
        degree_by_restriction(spec, seed=1)


def test_integrability_in_p3(five_planes_p3):
    verdict = integrability_p2(five_planes_p3)
    assert not verdict.tensor_plucker
    assert verdict.symbolic_wedge_zero
    assert verdict.tensor_wedge_zero is None
    assert verdict.defects > 0


def test_integrability_in_p4(coordinate_p4):
    split = LogFoliationSpec(poles=coordinate_p4, tensor=split_tensor(5))
    verdict = integrability_p2(split)
    assert not verdict.tensor_plucker
    assert not verdict.symbolic_wedge_zero
    assert verdict.tensor_wedge_zero is False
    product = LogFoliationSpec(poles=coordinate_p4, tensor=tensor_from_covectors([u(5, 0), u(5, 1)]))
    verdict = integrability_p2(product)
    assert verdict.tensor_plucker and verdict.symbolic_wedge_zero and verdict.tensor_wedge_zero


def test_first_integral_exponents(fibration):
    integral = first_integral(fibration)
    assert integral.exponents == [6, 3, 2]
    polys = [z(3, 0) ** 2 + z(3, 1) * z(3, 2), z(3, 1) ** 2 - z(3, 0) * z(3, 2), z(3, 2) ** 4 + z(3, 0) * z(3, 1) ** 3]
    poles = PoleSystem(n=2, polys=polys)
    spec = LogFoliationSpec(poles=poles, tensor=radial_kernel([2, 2, 4], 3, 2)[0])
    assert first_integral(spec).exponents == [2, 2, 1]


def test_first_integral_needs_one_extra_pole(five_planes_p3):
    with pytest.raises(ValueError):
        first_integral(five_planes_p3)


def test_radial_volume_form():
    P = z(3, 0) ** 3 + z(3, 1) ** 3 + z(3, 2) ** 3
    w = radial_volume_form(P)
    poles = PoleSystem(n=2, polys=[P])
    assert w.degree == 2
    assert is_closed_form(w, poles)
    assert is_logarithmic(w, poles)
    with pytest.raises(ValueError):
        radial_volume_form(z(3, 0) ** 2 + z(3, 1) * z(3, 2))


def test_restriction_keeps_decomposability(coordinate_p4):
    spec = LogFoliationSpec(poles=coordinate_p4, tensor=tensor_from_covectors([u(5, 0), u(5, 1)]))
    outcome = restriction_preserves_decomposability(spec, seed=3)
    assert outcome["dimension"] == 4
    assert outcome["functorial"]
    assert outcome["tensor_decomposable"] and outcome["pointwise_decomposable"]
    assert outcome["restricted_wedge_zero"]
    assert outcome["restricted_degree"] == outcome["degree"] == 2
    assert outcome["passed"]


def test_restriction_sees_non_decomposable_form(coordinate_p4):
    spec = LogFoliationSpec(poles=coordinate_p4, tensor=split_tensor(5))
    outcome = restriction_preserves_decomposability(spec, seed=3)
    assert not outcome["tensor_decomposable"]
    assert outcome["pointwise_decomposable"] is False
    assert outcome["restricted_wedge_zero"] is False
    assert outcome["same_decomposability"]
    assert outcome["passed"]


def test_restriction_to_p3_skips_decomposability(five_planes_p3):
    outcome = restriction_preserves_decomposability(five_planes_p3, seed=2)
    assert outcome["dimension"] == 3
    assert outcome["same_decomposability"] is None
    assert outcome["restricted_degree"] == 2
    assert outcome["passed"]


@pytest.mark.slow
@pytest.mark.parametrize("case", range(20))
def test_seeded_degree_agreement(case):
    n, p = DEGREE_SHAPES[case % len(DEGREE_SHAPES)]
    rng = make_rng(SEED, 5, case)
    r = p + 2
    if case % 2:
        poles = random_poles(rng, n, [2] + [1] * (r - 1))
    else:
        poles = PoleSystem(n=n, polys=random_linear_forms(n + 1, r, rng))
    spec = LogFoliationSpec(poles=poles, tensor=random_radial_tensor(rng, poles.degrees, p))
    expected = sum(poles.degrees) - p - 1
    assert foliation_degree(spec) == expected
    assert degree_by_restriction(spec, seed=SEED + case) == expected


@pytest.mark.parametrize("case", range(10))
def test_seeded_first_integrals(case):
    rng = make_rng(SEED, 6, case)
    p = 1 + case % 2
    n = int(rng.integers(p + 1, 4))
    degrees = [int(d) for d in rng.integers(1, 4, size=p + 1)]
    poles = random_poles(rng, n, degrees)
    spec = LogFoliationSpec(poles=poles, tensor=random_radial_tensor(rng, degrees, p))
    k = [lcm(*degrees) // d for d in degrees]
    g = gcd(*k)
    integral = first_integral(spec)
    assert integral.exponents == [kj // g for kj in k]
    assert len({kj * d for kj, d in zip(integral.exponents, degrees)}) == 1
