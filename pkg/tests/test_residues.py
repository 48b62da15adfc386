import os
import sys
from itertools import combinations

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from models.poles import LogFoliationSpec, PoleSystem
from models.tensors import Covector
from services.logtensor_services import expand, radial_kernel
from services.residues_services import (
    CycleError,
    _quadrature,
    build_cycle,
    find_base_point,
    recover_residue,
    recover_residues,
    torus_residue,
    validate_cycle,
)
from util.exactnum_utils import GaussianRational
from util.numeric_utils import NumericPolySystem
from util.polyring_utils import MultiPoly


def z(nvars, j):
    return MultiPoly.variable(nvars, j)


@pytest.fixture(scope="module")
def three_lines():
    poles = PoleSystem(n=2, polys=[z(3, 0), z(3, 1), z(3, 0) + z(3, 1) + z(3, 2)])
    return LogFoliationSpec(poles=poles, tensor=Covector([1, 2, -3]).to_tensor())


@pytest.fixture(scope="module")
def conic_and_lines():
    conic = z(3, 0) ** 2 + z(3, 1) ** 2 + z(3, 2) ** 2
    poles = PoleSystem(n=2, polys=[z(3, 0), z(3, 1), conic])
    return LogFoliationSpec(poles=poles, tensor=Covector([1, 1, -1]).to_tensor())


@pytest.fixture(scope="module")
def four_planes():
    rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 2, 3, 4]]
    poles = PoleSystem(n=3, polys=[MultiPoly.linear_form(row) for row in rows])
    return LogFoliationSpec(poles=poles, tensor=radial_kernel([1, 1, 1, 1], 4, 2)[0])


@pytest.mark.parametrize("fixture", ["three_lines", "conic_and_lines", "four_planes"])
def test_all_residues_recovered(fixture, request):
    spec = request.getfixturevalue(fixture)
    rows = recover_residues(spec, seed=5)
    assert len(rows) == len(spec.tensor.as_vector())
    for row in rows:
        assert row.accepted
        assert row.error < 1e-8
        assert all(1 <= i <= spec.r for i in row.index)


def test_base_point_lies_on_the_poles(four_planes):
    m = find_base_point(four_planes.poles, (0, 3), seed=2)
    values = NumericPolySystem(four_planes.poles.polys).values(m)[0]
    assert np.linalg.norm(m) == pytest.approx(1.0)
    assert abs(values[0]) < 1e-10 and abs(values[3]) < 1e-10
    assert abs(values[1]) > 1e-3 and abs(values[2]) > 1e-3


def test_tampered_cycle_is_rejected(four_planes):
    m = find_base_point(four_planes.poles, (1, 2), seed=2)
    cycle = build_cycle(four_planes.poles, (1, 2), m)
    np.testing.assert_allclose(np.asarray(cycle.winding), np.eye(2), atol=1e-6)
    swapped = cycle.model_copy(update={"directions": list(reversed(cycle.directions))})
    with pytest.raises(CycleError):
        validate_cycle(four_planes.poles, (1, 2), swapped)


def test_residue_index_checks(three_lines, four_planes):
    with pytest.raises(ValueError):
        find_base_point(three_lines.poles, (0, 1, 2), seed=1)
    with pytest.raises(ValueError):
        find_base_point(three_lines.poles, (2, 1), seed=1)
    m = find_base_point(four_planes.poles, (0, 1), seed=1)
    cycle = build_cycle(four_planes.poles, (0, 1), m)
    with pytest.raises(ValueError):
        torus_residue(four_planes, (0, 2), cycle)


def test_trapezoid_converges(three_lines):
    w = expand(three_lines)
    m = find_base_point(three_lines.poles, (2,), seed=3)
    cycle = build_cycle(three_lines.poles, (2,), m)
    exact = complex(three_lines.tensor[(2,)])
    coarse = abs(_quadrature(three_lines, w, cycle, 4) - exact)
    fine = abs(_quadrature(three_lines, w, cycle, 64) - exact)
    assert fine < 1e-10
    assert fine <= coarse + 1e-14


def test_single_residue_row(conic_and_lines):
    row = recover_residue(conic_and_lines, (2,), seed=9)
    assert row.index == (3,)
    assert row.exact == "-1"
    assert row.recovered == pytest.approx(-1, abs=1e-8)


def test_trapezoid_decays_spectrally(three_lines):
    # on the complex line m + u·v the other poles sit at u_j = -f_j(m) / f_j(v);
    # a radius of 0.6·min|u_j| leaves a 32-node error well above roundoff
    w = expand(three_lines)
    m = find_base_point(three_lines.poles, (2,), seed=3)
    cycle = build_cycle(three_lines.poles, (2,), m)
    rows = np.array([[1, 0, 0], [0, 1, 0]], dtype=complex)
    base = np.asarray(cycle.base_point, dtype=complex)
    v = np.asarray(cycle.directions[0], dtype=complex)
    slopes = rows @ v
    nearest = min(abs((rows @ base)[j] / slopes[j]) for j in range(2) if abs(slopes[j]) > 1e-12)
    wide = cycle.model_copy(update={"radius": 0.6 * nearest})
    exact = complex(three_lines.tensor[(2,)])
    error32 = abs(_quadrature(three_lines, w, wide, 32) - exact)
    error64 = abs(_quadrature(three_lines, w, wide, 64) - exact)
    assert error32 > 1e-11
    assert error32 / max(error64, 1e-300) >= 1e3


@pytest.mark.parametrize("fixture", ["three_lines", "four_planes"])
def test_residues_are_linear_in_the_tensor(fixture, request):
    spec = request.getfixturevalue(fixture)
    lam, mu = radial_kernel(spec.degrees, spec.r, spec.p)[:2]
    a, b = GaussianRational(2), GaussianRational(1, -1)
    combined = lam.scale(a) + mu.scale(b)
    specs = [LogFoliationSpec(poles=spec.poles, tensor=t) for t in (lam, mu, combined)]
    forms = [expand(s) for s in specs]
    for I in combinations(range(spec.r), spec.p):
        m = find_base_point(spec.poles, I, seed=5)
        cycle = build_cycle(spec.poles, I, m)
        values = [torus_residue(s, I, cycle, form=w) for s, w in zip(specs, forms)]
        assert values[2] == pytest.approx(complex(a) * values[0] + complex(b) * values[1], abs=1e-10)
        assert values[2] == pytest.approx(complex(combined[I]), abs=1e-8)
