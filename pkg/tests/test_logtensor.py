import os
import sys
from math import comb

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
import env
import services.logtensor_services as logtensor_services
from models.poles import LogFoliationSpec, PoleSystem
from models.tensors import Covector, ResidueTensor
from services.foliation_services import radial_compatibility
from services.logtensor_services import (
    NotDecomposableError,
    decompose,
    decompose_corank2,
    expand,
    expand_tensor,
    fibration_decomposition,
    is_decomposable,
    plucker_defects,
    pullback_spec,
    radial_contraction,
    radial_kernel,
    tensor_contract,
    tensor_from_covectors,
    tensor_kernel,
    tensor_wedge,
)
from util.exactnum_utils import ExactMatrix, GaussianRational
from util.forms_utils import pullback_linear, wedge
from util.polyring_utils import MultiPoly
from util.random_utils import make_rng, random_integers, random_scalar

SEED = 20240611


def z(nvars, j):
    return MultiPoly.variable(nvars, j)


def wedge_of(*rows):
    return tensor_from_covectors([Covector(row) for row in rows])


def independent_covectors(rng, r, count):
    while True:
        rows = [random_integers(rng, r) for _ in range(count)]
        if ExactMatrix(rows, cols=r).rank() == count:
            return [Covector(row) for row in rows]


@pytest.fixture(scope="module")
def mixed_poles():
    # a line, a conic and a cubic in P^3
    return PoleSystem(n=3, polys=[
        z(4, 0),
        z(4, 1) ** 2 + z(4, 2) * z(4, 3),
        z(4, 3) ** 3 + z(4, 0) * z(4, 1) * z(4, 2),
    ])


@pytest.fixture(scope="module")
def planes():
    rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1]]
    return PoleSystem(n=3, polys=[MultiPoly.linear_form(row) for row in rows])


def test_decompose_reproduces_tensor():
    a = wedge_of([1, -1, 0, 2], [0, 1, -1, 1])
    assert is_decomposable(a)
    dec = decompose(a)
    assert dec.kernel_dimension == 2
    assert tensor_from_covectors(dec.covectors, dec.scale) == a


def test_non_decomposable_bivector():
    a = ResidueTensor.basis(4, (0, 1)) + ResidueTensor.basis(4, (2, 3))
    assert not is_decomposable(a)
    assert plucker_defects(a) == [1]
    with pytest.raises(NotDecomposableError):
        decompose(a)


def test_degree_three_plucker():
    decomposable = wedge_of([1, 0, 0, 1, 2], [0, 1, 0, -1, 1], [0, 0, 1, 2, -1])
    assert plucker_defects(decomposable) == []
    assert len(decompose(decomposable).covectors) == 3
    split = ResidueTensor.basis(6, (0, 1, 2)) + ResidueTensor.basis(6, (3, 4, 5))
    assert plucker_defects(split)
    assert not is_decomposable(split)


def test_zero_tensor_rejected():
    with pytest.raises(ValueError):
        is_decomposable(ResidueTensor(3, 2))


@pytest.mark.parametrize("rows, factor", [
    ([[1, 0, 2, 1], [0, 1, -1, 3]], 7),
    ([[1, 0, 0, 1, 2], [0, 1, 0, -1, 1], [0, 0, 1, 2, -1]], None),
])
def test_corank_two_identity(rows, factor):
    a = wedge_of(*rows)
    result = decompose_corank2(a)
    assert len(result.covectors) == a.r - 2
    assert tensor_from_covectors(result.covectors) == a.scale(result.factor)
    assert result.factor == result.mu12 ** (a.r - 3)
    if factor is not None:
        assert result.mu12 == factor


def test_corank_two_asks_for_reordering():
    with pytest.raises(ValueError, match="reorder"):
        decompose_corank2(ResidueTensor.basis(4, (0, 1)))


def test_corank_two_needs_codimension_two():
    with pytest.raises(ValueError):
        decompose_corank2(wedge_of([1, 0, 0], [0, 1, 0]))


@pytest.mark.parametrize("degrees, p", [([1] * 6, 2), ([1, 2, 3], 2), ([1, 1, 2, 2], 2), ([2, 3, 1, 1, 1], 3)])
def test_radial_kernel_dimension(degrees, p):
    basis = radial_kernel(degrees, len(degrees), p)
    assert len(basis) == comb(len(degrees) - 1, p)
    for a in basis:
        assert radial_contraction(a, degrees).is_zero()


def test_radial_contraction_to_scalar():
    assert radial_contraction(Covector([1, 1]).to_tensor(), [1, 2]) == ResidueTensor.scalar(2, 3)
    assert radial_contraction(Covector([2, -1]).to_tensor(), [1, 2]).is_zero()
    with pytest.raises(ValueError):
        radial_contraction(Covector([1, 1]).to_tensor(), [1])


def test_expansion_is_homogeneous(mixed_poles):
    a = radial_kernel(mixed_poles.degrees, 3, 2)[0]
    w = expand(LogFoliationSpec(poles=mixed_poles, tensor=a))
    assert w.degree == 2
    for poly in w.coefficients.values():
        assert {sum(e) for e in poly.terms} == {6 - 2}


def test_contraction_commutes_with_expansion(planes):
    a = ResidueTensor(5, 2, {(0, 1): 1, (0, 4): 3, (2, 3): -2, (1, 4): "i"})
    spec = LogFoliationSpec(poles=planes, tensor=a, projective=False)
    assert radial_compatibility(spec)


def test_expansion_is_multiplicative(mixed_poles):
    a = Covector([1, 2, 0]).to_tensor()
    b = Covector([0, 1, -1]).to_tensor()
    lhs = wedge(expand_tensor(mixed_poles, a), expand_tensor(mixed_poles, b))
    rhs = expand_tensor(mixed_poles, tensor_wedge(a, b)).scale(mixed_poles.product())
    assert lhs == rhs


def test_fibration_decomposition(mixed_poles):
    a = radial_kernel(mixed_poles.degrees, 3, 2)[0]
    spec = LogFoliationSpec(poles=mixed_poles, tensor=a)
    lam, covectors = fibration_decomposition(spec)
    assert tensor_from_covectors(covectors).scale(lam) == a
    assert covectors[0].coords[0] == -2
    assert covectors[1].coords[0] == -3


def test_pullback_is_functorial(planes):
    a = radial_kernel(planes.degrees, 5, 2)[1]
    spec = LogFoliationSpec(poles=planes, tensor=a)
    M = ExactMatrix([[1, 0, 2], [0, 1, -1], [3, 1, 0], [1, 1, 1]])
    restricted = pullback_spec(spec, M)
    assert restricted.n == 2
    assert expand(restricted) == pullback_linear(expand(spec), M)


def test_tensor_contract():
    e12 = wedge_of([1, 0, 0, 0], [0, 1, 0, 0])
    assert tensor_contract(e12, [1, 0, 0, 0]) == ResidueTensor.basis(4, (1,))
    assert tensor_contract(e12, [0, 1, 0, 0]) == ResidueTensor.basis(4, (0,)).scale(-1)
    assert tensor_contract(e12, [0, 0, 1, 5]).is_zero()
    a = ResidueTensor(5, 3, {(0, 1, 2): 2, (1, 3, 4): "1-i", (0, 2, 4): -3})
    u = [1, "i", 2, -1, "1/2"]
    assert tensor_contract(tensor_contract(a, u), u).is_zero()
    with pytest.raises(ValueError):
        tensor_contract(ResidueTensor.scalar(3, 1), [1, 0, 0])


def test_tensor_kernel():
    kernel = tensor_kernel(wedge_of([1, 0, 0, 0], [0, 1, 0, 0]))
    assert len(kernel) == 2
    assert all(not v[0] and not v[1] for v in kernel)
    assert tensor_kernel(ResidueTensor(4, 2, {(0, 1): 1, (2, 3): 1})) == []
    a = ResidueTensor(5, 2, {(0, 1): 1, (0, 4): 3, (2, 3): -2, (1, 4): "i"})
    assert len(tensor_kernel(a)) <= a.r - a.p
    with pytest.raises(ValueError):
        tensor_kernel(ResidueTensor(4, 2))


@pytest.mark.parametrize("enabled", [False, True])
def test_debug_flag_gates_cross_checks(monkeypatch, enabled):
    calls = []
    original_cross_check = logtensor_services._cross_check_bivector
    original_kernel_test = logtensor_services.is_decomposable

    def cross_check(a):
        calls.append("bivector")
        return original_cross_check(a)

    def kernel_test(a):
        calls.append("kernel")
        return original_kernel_test(a)

    monkeypatch.setattr(env, "LOGFOL_DEBUG_CHECKS", enabled)
    monkeypatch.setattr(logtensor_services, "_cross_check_bivector", cross_check)
    monkeypatch.setattr(logtensor_services, "is_decomposable", kernel_test)
    a = wedge_of([1, 2, 0, -1], [0, 1, 3, 1])
    decompose(a)
    plucker_defects(a)
    assert ("bivector" in calls) == enabled
    assert ("kernel" in calls) == enabled


def test_debug_cross_check_catches_a_bad_decomposition(monkeypatch):
    monkeypatch.setattr(env, "LOGFOL_DEBUG_CHECKS", True)
    monkeypatch.setattr(logtensor_services, "is_decomposable", lambda a: False)
    with pytest.raises(logtensor_services.DecompositionInconsistency):
        plucker_defects(wedge_of([1, 0, 0, 0], [0, 1, 0, 0]))


@pytest.mark.parametrize("case", range(200))
def test_seeded_decomposable_round_trip(case):
    rng = make_rng(SEED, 1, case)
    r = int(rng.integers(3, 9))
    p = int(rng.integers(1, min(4, r - 1) + 1))
    a = tensor_from_covectors(independent_covectors(rng, r, p))
    assert is_decomposable(a)
    dec = decompose(a)
    assert dec.kernel_dimension == r - p
    assert tensor_from_covectors(dec.covectors, dec.scale) == a


@pytest.mark.parametrize("case", range(200))
def test_seeded_perturbed_tensor_is_rejected(case):
    rng = make_rng(SEED, 2, case)
    r = int(rng.integers(4, 9))
    p = int(rng.integers(2, min(4, r - 2) + 1))
    covs = independent_covectors(rng, r, p + 2)
    # (c_0∧c_1 + c_p∧c_{p+1}) ∧ c_2∧...∧c_{p-1} with all p+2 covectors independent
    a = tensor_from_covectors(covs[:p]) + tensor_from_covectors([covs[p], covs[p + 1]] + covs[2:p])
    assert not is_decomposable(a)
    assert plucker_defects(a)
    with pytest.raises(NotDecomposableError):
        decompose(a)


@pytest.mark.parametrize("case", range(50))
def test_seeded_corank_two_identity(case):
    rng = make_rng(SEED, 3, case)
    p = int(rng.integers(1, 5))
    r = p + 2
    a = tensor_from_covectors(independent_covectors(rng, r, p))
    while not a[tuple(range(2, r))]:
        a = tensor_from_covectors(independent_covectors(rng, r, p))
    result = decompose_corank2(a)
    assert result.factor == result.mu12 ** (r - 3)
    assert tensor_from_covectors(result.covectors) == a.scale(result.factor)


@pytest.mark.parametrize("case", range(20))
def test_decompose_is_scale_invariant(case):
    rng = make_rng(SEED, 4, case)
    r = int(rng.integers(3, 8))
    p = int(rng.integers(1, r))
    a = tensor_from_covectors(independent_covectors(rng, r, p))
    c = random_scalar(rng) + random_scalar(rng) * GaussianRational(0, 1)
    plain, scaled = decompose(a), decompose(a.scale(c))
    assert scaled.covectors == plain.covectors
    assert scaled.scale == plain.scale * c
    assert scaled.kernel_dimension == plain.kernel_dimension


def test_tensor_wedge_past_top_degree():
    a = ResidueTensor.basis(3, (0, 1))
    product = a.wedge(a)
    assert product.is_zero()
    assert product.p == 4
