"""
Polynomial differential forms and vector fields on C^{nvars}.

Sign conventions (fixed once, pinned by tests):

* wedge: dz_I ∧ dz_J = (-1)^{#{(a, b) : a in I, b in J, a > b}} dz_{sort(I ∪ J)}.
* contraction: i_X(dz_{i_1}∧...∧dz_{i_p}) = Σ_k (-1)^{k-1} X_{i_k} dz_{i_1}∧...(omit k)...∧dz_{i_p}.
* volume form ν = dz_0∧...∧dz_{nvars-1}, ascending.
* rotational: dω = i_X ν, so the coefficient of dz_0∧...(omit k)...∧dz_{nvars-1}
  in dω is (-1)^k X_k (k counted from 0).
"""
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from util.exactnum_utils import ExactMatrix, GaussianRational, ScalarLike
from util.polyring_utils import (
    Exponent,
    MultiPoly,
    VariableMismatch,
    compose,
    partial_derivative,
)

Index = Tuple[int, ...]


class FormDegreeError(ValueError):
    pass


def merge_sign(left: Index, right: Index) -> Tuple[int, Optional[Index]]:
    """Sign and merged tuple of dz_left ∧ dz_right; (0, None) when they overlap."""
    if set(left) & set(right):
        return 0, None
    inversions = sum(1 for a in left for b in right if a > b)
    return (-1 if inversions % 2 else 1), tuple(sorted(left + right))


class PolyForm:
    __slots__ = ("nvars", "degree", "coefficients")

    def __init__(self, nvars: int, degree: int, coefficients: Optional[Dict[Index, MultiPoly]] = None):
        if not 0 <= degree <= nvars:
            raise FormDegreeError(f"form degree {degree} outside 0..{nvars}")
        self.nvars = nvars
        self.degree = degree
        clean: Dict[Index, MultiPoly] = {}
        for idx, poly in (coefficients or {}).items():
            idx = tuple(idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise FormDegreeError(f"index tuple {idx} is not strictly increasing of length {degree}")
            if idx and not (0 <= idx[0] and idx[-1] < nvars):
                raise FormDegreeError(f"index tuple {idx} out of range")
            if poly.nvars != nvars:
                raise VariableMismatch(f"coefficient has {poly.nvars} variables, form has {nvars}")
            if not poly.is_zero():
                clean[idx] = poly
        self.coefficients = clean

    @classmethod
    def _raw(cls, nvars: int, degree: int, coefficients: Dict[Index, MultiPoly]) -> "PolyForm":
        w = cls.__new__(cls)
        w.nvars = nvars
        w.degree = degree
        w.coefficients = {k: v for k, v in coefficients.items() if not v.is_zero()}
        return w

    @classmethod
    def zero(cls, nvars: int, degree: int) -> "PolyForm":
        return cls(nvars, degree)

    @classmethod
    def function(cls, f: MultiPoly) -> "PolyForm":
        return cls._raw(f.nvars, 0, {(): f})

    @classmethod
    def basis(cls, nvars: int, index: Sequence[int], coefficient: Optional[MultiPoly] = None) -> "PolyForm":
        index = tuple(index)
        if len(set(index)) != len(index):
            return cls(nvars, len(index))
        coeff = coefficient if coefficient is not None else MultiPoly.constant(nvars, 1)
        return cls(nvars, len(index), {tuple(sorted(index)): coeff.scale(_permutation_sign(index))})

    @classmethod
    def differential(cls, f: MultiPoly) -> "PolyForm":
        """df = Σ_j ∂_j f dz_j."""
        return cls._raw(f.nvars, 1, {(j,): partial_derivative(f, j) for j in range(f.nvars)})

    @classmethod
    def volume(cls, nvars: int) -> "PolyForm":
        return cls(nvars, nvars, {tuple(range(nvars)): MultiPoly.constant(nvars, 1)})

    def is_zero(self) -> bool:
        return not self.coefficients

    def _check(self, other: "PolyForm"):
        if self.nvars != other.nvars:
            raise VariableMismatch(f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other: "PolyForm") -> "PolyForm":
        self._check(other)
        if self.degree != other.degree:
            raise FormDegreeError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self.coefficients)
        for idx, poly in other.coefficients.items():
            out[idx] = out[idx] + poly if idx in out else poly
        return PolyForm._raw(self.nvars, self.degree, out)

    def __neg__(self):
        return PolyForm._raw(self.nvars, self.degree, {k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other: "PolyForm") -> "PolyForm":
        return self + (-other)

    def scale(self, factor) -> "PolyForm":
        """Multiply by a scalar or by a polynomial function."""
        return PolyForm._raw(self.nvars, self.degree, {k: v * factor for k, v in self.coefficients.items()})

    def __eq__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.nvars == other.nvars
        return (self.nvars, self.degree, self.coefficients) == (other.nvars, other.degree, other.coefficients)

    def __repr__(self):
        if self.is_zero():
            return f"PolyForm(0, degree={self.degree})"
        parts = [f"[{poly}] dz{list(idx)}" for idx, poly in sorted(self.coefficients.items())]
        return " + ".join(parts)

    def coefficient(self, index: Sequence[int]) -> MultiPoly:
        return self.coefficients.get(tuple(index), MultiPoly.zero(self.nvars))

    def coefficient_polys(self) -> List[MultiPoly]:
        return [self.coefficients[k] for k in sorted(self.coefficients)]

    def coefficient_scale(self) -> float:
        return max((p.coefficient_scale() for p in self.coefficients.values()), default=0.0)

    def max_coefficient_degree(self) -> int:
        return max((p.total_degree() for p in self.coefficients.values()), default=-1)

    def map_coefficients(self, fn) -> "PolyForm":
        return PolyForm._raw(self.nvars, self.degree, {k: fn(v) for k, v in self.coefficients.items()})


def _permutation_sign(index: Index) -> int:
    inversions = sum(1 for a, b in combinations(range(len(index)), 2) if index[a] > index[b])
    return -1 if inversions % 2 else 1


def wedge(a: PolyForm, b: PolyForm) -> PolyForm:
    a._check(b)
    degree = a.degree + b.degree
    if degree > a.nvars:
        return PolyForm._raw(a.nvars, degree, {})
    out: Dict[Index, MultiPoly] = {}
    for i, f in a.coefficients.items():
        for j, g in b.coefficients.items():
            sign, idx = merge_sign(i, j)
            if not sign:
                continue
            term = f * g
            if sign < 0:
                term = -term
            out[idx] = out[idx] + term if idx in out else term
    return PolyForm._raw(a.nvars, degree, out)


def wedge_all(forms: Sequence[PolyForm]) -> PolyForm:
    result = forms[0]
    for w in forms[1:]:
        result = wedge(result, w)
    return result


def exterior_derivative(a: PolyForm) -> PolyForm:
    if a.degree >= a.nvars:
        return PolyForm._raw(a.nvars, a.degree + 1, {})
    out: Dict[Index, MultiPoly] = {}
    for idx, f in a.coefficients.items():
        for j in range(a.nvars):
            if j in idx:
                continue
            g = partial_derivative(f, j)
            if g.is_zero():
                continue
            sign, merged = merge_sign((j,), idx)
            if sign < 0:
                g = -g
            out[merged] = out[merged] + g if merged in out else g
    return PolyForm._raw(a.nvars, a.degree + 1, out)


class PolyVectorField:
    __slots__ = ("nvars", "components")

    def __init__(self, components: Sequence[MultiPoly]):
        components = list(components)
        if not components:
            raise ValueError("vector field needs at least one component")
        nvars = components[0].nvars
        if len(components) != nvars or any(c.nvars != nvars for c in components):
            raise VariableMismatch(f"vector field with {len(components)} components on {nvars} variables")
        self.nvars = nvars
        self.components = components

    @classmethod
    def constant(cls, vector: Sequence[ScalarLike]) -> "PolyVectorField":
        n = len(vector)
        return cls([MultiPoly.constant(n, x) for x in vector])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and self.components == other.components

    def __repr__(self):
        return "PolyVectorField(" + ", ".join(repr(c) for c in self.components) + ")"

    def evaluate(self, point: np.ndarray) -> np.ndarray:
        return np.array([c.evaluate_numeric(point) for c in self.components], dtype=complex)

    def jacobian_fd(self, point: np.ndarray, step: float) -> np.ndarray:
        """Central finite differences; column j is ∂X/∂z_j."""
        point = np.asarray(point, dtype=complex)
        jac = np.zeros((self.nvars, self.nvars), dtype=complex)
        for j in range(self.nvars):
            shift = np.zeros(self.nvars, dtype=complex)
            shift[j] = step
            jac[:, j] = (self.evaluate(point + shift) - self.evaluate(point - shift)) / (2 * step)
        return jac


def radial_field(nvars: int) -> PolyVectorField:
    """R = Σ_j z_j ∂/∂z_j."""
    return PolyVectorField([MultiPoly.variable(nvars, j) for j in range(nvars)])


def contract(a: PolyForm, X: PolyVectorField) -> PolyForm:
    if a.degree < 1:
        raise FormDegreeError("cannot contract a function")
    if X.nvars != a.nvars:
        raise VariableMismatch(f"field on {X.nvars} variables, form on {a.nvars}")
    out: Dict[Index, MultiPoly] = {}
    for idx, f in a.coefficients.items():
        for k, i in enumerate(idx):
            comp = X.components[i]
            if comp.is_zero():
                continue
            term = comp * f
            if k % 2:
                term = -term
            rest = idx[:k] + idx[k + 1:]
            out[rest] = out[rest] + term if rest in out else term
    return PolyForm._raw(a.nvars, a.degree - 1, out)


def pullback_linear(a: PolyForm, M: ExactMatrix) -> PolyForm:
    """
    Pull back along z = M·s, M of shape nvars x (m+1) with full column rank.
    """
    if M.rows != a.nvars:
        raise VariableMismatch(f"matrix has {M.rows} rows, form lives on {a.nvars} variables")
    if M.rank() != M.cols:
        raise ValueError(f"rank-deficient pullback matrix ({M.rank()} < {M.cols})")
    target = M.cols
    substitutions = [MultiPoly.linear_form(M.entries[i]) for i in range(M.rows)]
    dz = [PolyForm._raw(target, 1, {(j,): MultiPoly.constant(target, M.entries[i][j])
                                    for j in range(target) if M.entries[i][j]})
          for i in range(M.rows)]
    if a.degree > target:
        return PolyForm._raw(target, a.degree, {})
    cache: Dict[Exponent, MultiPoly] = {}
    result = PolyForm._raw(target, a.degree, {})
    for idx, f in a.coefficients.items():
        g = compose(f, substitutions, cache)
        if g.is_zero():
            continue
        frame = wedge_all([dz[i] for i in idx]) if idx else PolyForm.function(MultiPoly.constant(target, 1))
        result = result + frame.scale(g)
    return result


def compose_coefficients(a: PolyForm, substitutions: Sequence[MultiPoly]) -> Dict[Index, MultiPoly]:
    """Substitute into every coefficient, leaving the dz's alone."""
    cache: Dict[Exponent, MultiPoly] = {}
    return {idx: compose(f, substitutions, cache) for idx, f in a.coefficients.items()}


def dehomogenize(a: PolyForm, chart: int) -> PolyForm:
    """Restrict to the affine chart z_chart = 1 (so dz_chart = 0)."""
    n = a.nvars
    if not 0 <= chart < n:
        raise IndexError(f"chart {chart} out of range")
    m = n - 1
    substitutions = []
    for j in range(n):
        if j == chart:
            substitutions.append(MultiPoly.constant(m, 1))
        else:
            substitutions.append(MultiPoly.variable(m, j if j < chart else j - 1))
    cache: Dict[Exponent, MultiPoly] = {}
    out: Dict[Index, MultiPoly] = {}
    for idx, f in a.coefficients.items():
        if chart in idx:
            continue
        new_idx = tuple(i if i < chart else i - 1 for i in idx)
        out[new_idx] = compose(f, substitutions, cache)
    return PolyForm._raw(m, a.degree, out)


def evaluate(a: PolyForm, z: Sequence[complex]) -> Dict[Index, complex]:
    point = np.asarray(z, dtype=complex)
    if point.shape != (a.nvars,):
        raise VariableMismatch(f"point of shape {point.shape} for {a.nvars} variables")
    return {idx: complex(f.evaluate_numeric(point)) for idx, f in sorted(a.coefficients.items())}


def evaluate_many(a: PolyForm, points: np.ndarray) -> Tuple[List[Index], np.ndarray]:
    """Coefficient values at many points: (index list, array of shape (S, len(index list)))."""
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    keys = sorted(a.coefficients)
    values = np.zeros((pts.shape[0], len(keys)), dtype=complex)
    for col, idx in enumerate(keys):
        values[:, col] = a.coefficients[idx].evaluate_numeric(pts)
    return keys, values


def rotational(w: PolyForm) -> PolyVectorField:
    """X = rot(w), defined by dw = i_X ν with ν ascending."""
    n = w.nvars
    if w.degree != n - 2:
        raise FormDegreeError(f"rotational needs an ({n - 2})-form, got degree {w.degree}")
    dw = exterior_derivative(w)
    components = []
    for k in range(n):
        omit = tuple(j for j in range(n) if j != k)
        coeff = dw.coefficient(omit)
        components.append(-coeff if k % 2 else coeff)
    return PolyVectorField(components)


def standard_basis_tuples(nvars: int, degree: int) -> List[Index]:
    return list(combinations(range(nvars), degree))
