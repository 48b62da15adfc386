"""
Sparse multivariate polynomials over Q(i).

Terms are kept in a dict from exponent tuple to nonzero GaussianRational.
The monomial order is graded lexicographic everywhere: a term with larger total
degree comes first, ties broken lexicographically on the exponent vector.

Single-divisor reduction: dividing g by f, every step either cancels the
leading term of the running polynomial with a multiple of f or moves that
leading term to the remainder. When g = q·f exactly, the leading term of every
running polynomial q'·f is LT(q')·LT(f), so it is always divisible and the
remainder stays 0. Hence remainder = 0 iff f divides g.
"""
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from util.exactnum_utils import (
    ONE,
    ZERO,
    DegenerateInput,
    GaussianRational,
    ScalarLike,
)

Exponent = Tuple[int, ...]


class InhomogeneousPolynomial(ValueError):
    pass


class VariableMismatch(ValueError):
    pass


def grlex_key(exponent: Exponent):
    return (sum(exponent), exponent)


class MultiPoly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[Dict[Exponent, ScalarLike]] = None):
        self.nvars = nvars
        clean: Dict[Exponent, GaussianRational] = {}
        if terms:
            for exp, coeff in terms.items():
                exp = tuple(exp)
                if len(exp) != nvars:
                    raise VariableMismatch(f"Exponent {exp} has length {len(exp)}, expected {nvars}")
                if any(e < 0 for e in exp):
                    raise ValueError(f"Negative exponent in {exp}")
                c = GaussianRational.coerce(coeff)
                if c:
                    clean[exp] = c
        self.terms = clean

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Exponent, GaussianRational]) -> "MultiPoly":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        return p

    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, value: ScalarLike) -> "MultiPoly":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, j: int) -> "MultiPoly":
        if not 0 <= j < nvars:
            raise IndexError(f"Variable index {j} out of range for {nvars} variables")
        exp = [0] * nvars
        exp[j] = 1
        return cls._raw(nvars, {tuple(exp): ONE})

    @classmethod
    def linear_form(cls, coefficients: Sequence[ScalarLike]) -> "MultiPoly":
        n = len(coefficients)
        return cls(n, {tuple(1 if k == j else 0 for k in range(n)): c for j, c in enumerate(coefficients)})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def sorted_terms(self) -> List[Tuple[Exponent, GaussianRational]]:
        """Terms in descending graded-lex order."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def leading_term(self) -> Tuple[Exponent, GaussianRational]:
        if not self.terms:
            raise DegenerateInput("zero polynomial has no leading term")
        exp = max(self.terms, key=grlex_key)
        return exp, self.terms[exp]

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def _check(self, other: "MultiPoly"):
        if self.nvars != other.nvars:
            raise VariableMismatch(f"nvars mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.nvars, other)
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp)
            if s is None:
                out[exp] = c
            else:
                s = s + c
                if s:
                    out[exp] = s
                else:
                    del out[exp]
        return MultiPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor: ScalarLike) -> "MultiPoly":
        factor = GaussianRational.coerce(factor)
        if not factor:
            return MultiPoly.zero(self.nvars)
        return MultiPoly._raw(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return MultiPoly.zero(self.nvars)
        out: Dict[Exponent, GaussianRational] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                s = out.get(exp)
                out[exp] = prod if s is None else s + prod
        return MultiPoly._raw(self.nvars, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, GaussianRational)):
            return self == MultiPoly.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(f"z{j}" if e == 1 else f"z{j}^{e}" for j, e in enumerate(exp) if e)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def partial(self, j: int) -> "MultiPoly":
        return partial_derivative(self, j)

    def evaluate(self, point: Sequence[ScalarLike]) -> GaussianRational:
        """Exact evaluation at a point of Q(i)^nvars."""
        if len(point) != self.nvars:
            raise VariableMismatch(f"point of length {len(point)} for {self.nvars} variables")
        pt = [GaussianRational.coerce(x) for x in point]
        acc = ZERO
        for exp, c in self.terms.items():
            term = c
            for x, e in zip(pt, exp):
                if e:
                    term = term * x ** e
            acc = acc + term
        return acc

    def numeric_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Exponent matrix and complex coefficient vector for float evaluation."""
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0, dtype=complex)
        exps = np.array(list(self.terms.keys()), dtype=int)
        coeffs = np.array([complex(c) for c in self.terms.values()], dtype=complex)
        return exps, coeffs

    def evaluate_numeric(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at one point (shape (nvars,)) or many (shape (S, nvars))."""
        pts = np.asarray(points, dtype=complex)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        exps, coeffs = self.numeric_arrays()
        if not len(coeffs):
            values = np.zeros(pts.shape[0], dtype=complex)
        else:
            monomials = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)
            values = monomials @ coeffs
        return values[0] if single else values

    def coefficient_scale(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(complex(c)) for c in self.terms.values())

    def as_univariate(self, var: int) -> List["MultiPoly"]:
        """
        View as a polynomial in variable ``var`` whose coefficients are
        polynomials in the remaining variables (same nvars, ``var`` exponent 0).
        Coefficients are returned lowest degree first.
        """
        buckets: Dict[int, Dict[Exponent, GaussianRational]] = {}
        for exp, c in self.terms.items():
            k = exp[var]
            rest = exp[:var] + (0,) + exp[var + 1:]
            buckets.setdefault(k, {})[rest] = c
        if not buckets:
            return [MultiPoly.zero(self.nvars)]
        top = max(buckets)
        return [MultiPoly._raw(self.nvars, buckets.get(k, {})) for k in range(top + 1)]

    def drop_variable(self, var: int) -> "MultiPoly":
        """Remove a variable that does not occur."""
        out = {}
        for exp, c in self.terms.items():
            if exp[var]:
                raise ValueError(f"variable z{var} occurs in the polynomial")
            out[exp[:var] + exp[var + 1:]] = c
        return MultiPoly._raw(self.nvars - 1, out)


def arith(f: MultiPoly, g: MultiPoly, op: str) -> MultiPoly:
    if f.nvars != g.nvars:
        raise VariableMismatch(f"nvars mismatch: {f.nvars} vs {g.nvars}")
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    raise ValueError(f"Unknown operation {op}")


def partial_derivative(f: MultiPoly, j: int) -> MultiPoly:
    if not 0 <= j < f.nvars:
        raise IndexError(f"Variable index {j} out of range for {f.nvars} variables")
    out = {}
    for exp, c in f.terms.items():
        e = exp[j]
        if e:
            new = list(exp)
            new[j] = e - 1
            out[tuple(new)] = c * e
    return MultiPoly._raw(f.nvars, out)


def homogeneous_degree(f: MultiPoly) -> int:
    """
    Degree of a homogeneous polynomial, confirmed by the Euler identity
    sum_j z_j df/dz_j = d f.

    Raises:
        DegenerateInput: zero polynomial.
        InhomogeneousPolynomial: exponent vectors of different total degree.
    """
    if f.is_zero():
        raise DegenerateInput("zero polynomial has no degree")
    degrees = {sum(e) for e in f.terms}
    if len(degrees) != 1:
        raise InhomogeneousPolynomial(f"inhomogeneous polynomial with degrees {sorted(degrees)}")
    d = degrees.pop()
    euler = MultiPoly.zero(f.nvars)
    for j in range(f.nvars):
        euler = euler + MultiPoly.variable(f.nvars, j) * partial_derivative(f, j)
    if euler != f.scale(d):
        raise InhomogeneousPolynomial("Euler identity failed")
    return d


def reduce_by(g: MultiPoly, f: MultiPoly) -> Tuple[MultiPoly, MultiPoly]:
    """Single-divisor reduction of g by f: returns (quotient, remainder)."""
    if f.is_zero():
        raise DegenerateInput("division by the zero polynomial")
    g._check(f)
    lt_exp, lt_coeff = f.leading_term()
    lt_inv = lt_coeff.inverse()
    running = dict(g.terms)
    quotient: Dict[Exponent, GaussianRational] = {}
    remainder: Dict[Exponent, GaussianRational] = {}
    while running:
        exp = max(running, key=grlex_key)
        c = running[exp]
        shift = tuple(a - b for a, b in zip(exp, lt_exp))
        if min(shift) < 0:
            remainder[exp] = c
            del running[exp]
            continue
        factor = c * lt_inv
        quotient[shift] = quotient.get(shift, ZERO) + factor
        for fe, fc in f.terms.items():
            e = tuple(a + b for a, b in zip(fe, shift))
            v = running.get(e, ZERO) - factor * fc
            if v:
                running[e] = v
            else:
                running.pop(e, None)
    return (MultiPoly._raw(g.nvars, {e: c for e, c in quotient.items() if c}),
            MultiPoly._raw(g.nvars, remainder))


def divides(f: MultiPoly, g: MultiPoly) -> Tuple[bool, Optional[MultiPoly]]:
    """
    Whether f divides g.

    Returns:
        (True, q) with g = q·f exactly, or (False, None).
    """
    q, rem = reduce_by(g, f)
    if rem.is_zero():
        return True, q
    return False, None


def exact_quotient(g: MultiPoly, f: MultiPoly) -> MultiPoly:
    ok, q = divides(f, g)
    if not ok:
        raise ValueError("polynomial division is not exact")
    return q


def compose(f: MultiPoly, substitutions: Sequence[MultiPoly],
            cache: Optional[Dict[Exponent, MultiPoly]] = None) -> MultiPoly:
    """
    Substitute z_j -> substitutions[j] in f.

    ``cache`` maps exponent vectors to the product of powers they denote; pass
    the same dict when composing several polynomials with the same substitution.
    """
    if len(substitutions) != f.nvars:
        raise VariableMismatch(f"{len(substitutions)} substitutions for {f.nvars} variables")
    if not substitutions:
        return f
    target = substitutions[0].nvars
    if cache is None:
        cache = {}
    zero_exp = (0,) * f.nvars
    cache.setdefault(zero_exp, MultiPoly.constant(target, 1))

    def power_product(exp: Exponent) -> MultiPoly:
        hit = cache.get(exp)
        if hit is not None:
            return hit
        k = next(i for i, e in enumerate(exp) if e)
        lower = exp[:k] + (exp[k] - 1,) + exp[k + 1:]
        value = power_product(lower) * substitutions[k]
        cache[exp] = value
        return value

    acc: Dict[Exponent, GaussianRational] = {}
    for exp, c in sorted(f.terms.items(), key=lambda kv: grlex_key(kv[0])):
        for e, v in power_product(exp).terms.items():
            s = acc.get(e)
            prod = c * v
            acc[e] = prod if s is None else s + prod
    return MultiPoly._raw(target, {e: c for e, c in acc.items() if c})


def monomials_of_degree(nvars: int, degree: int) -> List[Exponent]:
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        exp = [0] * nvars
        for j in combo:
            exp[j] += 1
        out.append(tuple(exp))
    return sorted(out, key=grlex_key, reverse=True)


class UniPoly:
    """Univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[ScalarLike] = ()):
        coeffs = [GaussianRational.coerce(c) for c in coefficients]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        self.coefficients = coeffs

    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not self.coefficients

    def __bool__(self):
        return bool(self.coefficients)

    def lead(self) -> GaussianRational:
        return self.coefficients[-1]

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return UniPoly([(a[k] if k < len(a) else ZERO) + (b[k] if k < len(b) else ZERO) for k in range(n)])

    def __neg__(self):
        return UniPoly([-c for c in self.coefficients])

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, UniPoly):
            c = GaussianRational.coerce(other)
            return UniPoly([x * c for x in self.coefficients])
        if not self.coefficients or not other.coefficients:
            return UniPoly()
        out = [ZERO] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if not a:
                continue
            for j, b in enumerate(other.coefficients):
                if b:
                    out[i + j] = out[i + j] + a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "UniPoly":
        result = UniPoly([1])
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coefficients == other.coefficients

    def __repr__(self):
        return "UniPoly([" + ", ".join(str(c) for c in self.coefficients) + "])"

    def divmod(self, other: "UniPoly") -> Tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coefficients)
        d = other.degree()
        inv = other.lead().inverse()
        quot = [ZERO] * max(len(rem) - d, 0)
        while len(rem) - 1 >= d and rem:
            k = len(rem) - 1 - d
            factor = rem[-1] * inv
            quot[k] = factor
            for i, c in enumerate(other.coefficients):
                if c:
                    rem[i + k] = rem[i + k] - factor * c
            rem.pop()
            while rem and not rem[-1]:
                rem.pop()
        return UniPoly(quot), UniPoly(rem)

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        inv = self.lead().inverse()
        return UniPoly([c * inv for c in self.coefficients])

    def evaluate(self, t: ScalarLike) -> GaussianRational:
        t = GaussianRational.coerce(t)
        acc = ZERO
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def root_multiplicity_at_zero(self) -> int:
        """Order of vanishing at t = 0 (0 for a nonzero constant term)."""
        if self.is_zero():
            raise DegenerateInput("zero polynomial vanishes identically")
        k = 0
        while not self.coefficients[k]:
            k += 1
        return k


def uni_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd by the Euclidean algorithm."""
    if a.is_zero() and b.is_zero():
        raise DegenerateInput("gcd of two zero polynomials")
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r.monic() if r else r
    return a.monic()


def uni_gcd_many(polys: Iterable[UniPoly]) -> UniPoly:
    nonzero = [p for p in polys if not p.is_zero()]
    if not nonzero:
        raise DegenerateInput("gcd of zero polynomials only")
    g = nonzero[0].monic()
    for p in nonzero[1:]:
        if g.degree() == 0:
            break
        g = uni_gcd(g, p)
    return g


def restrict_to_line(f: MultiPoly, base: Sequence[ScalarLike], direction: Sequence[ScalarLike]) -> UniPoly:
    """f(base + t·direction) as an exact polynomial in t."""
    if len(base) != f.nvars or len(direction) != f.nvars:
        raise VariableMismatch("line does not live in the polynomial's space")
    dirs = [GaussianRational.coerce(x) for x in direction]
    if not any(dirs):
        raise DegenerateInput("line direction is zero")
    coords = [UniPoly([GaussianRational.coerce(b), d]) for b, d in zip(base, dirs)]
    powers: Dict[Tuple[int, int], UniPoly] = {}

    def power(j: int, e: int) -> UniPoly:
        key = (j, e)
        if key not in powers:
            powers[key] = UniPoly([1]) if e == 0 else power(j, e - 1) * coords[j]
        return powers[key]

    acc = UniPoly()
    for exp, c in f.terms.items():
        term = UniPoly([c])
        for j, e in enumerate(exp):
            if e:
                term = term * power(j, e)
        acc = acc + term
    return acc


def univariate_to_multipoly(u: UniPoly) -> MultiPoly:
    return MultiPoly(1, {(k,): c for k, c in enumerate(u.coefficients)})


def multipoly_to_univariate(f: MultiPoly, var: int = 0) -> UniPoly:
    """Read a polynomial that only involves ``var`` as a UniPoly."""
    coeffs: Dict[int, GaussianRational] = {}
    for exp, c in f.terms.items():
        if any(e for j, e in enumerate(exp) if j != var):
            raise ValueError("polynomial involves more than one variable")
        coeffs[exp[var]] = c
    top = max(coeffs) if coeffs else -1
    return UniPoly([coeffs.get(k, ZERO) for k in range(top + 1)])


def _bareiss_determinant(matrix: List[List[MultiPoly]], nvars: int) -> MultiPoly:
    m = [list(row) for row in matrix]
    size = len(m)
    if size == 0:
        return MultiPoly.constant(nvars, 1)
    sign = 1
    prev = MultiPoly.constant(nvars, 1)
    for k in range(size - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, size) if not m[i][k].is_zero()), None)
            if swap is None:
                return MultiPoly.zero(nvars)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = exact_quotient(num, prev) if num else num
            m[i][k] = MultiPoly.zero(nvars)
        prev = m[k][k]
    det = m[size - 1][size - 1]
    return det if sign > 0 else -det


def sylvester_resultant(a: Sequence[MultiPoly], b: Sequence[MultiPoly]) -> MultiPoly:
    """
    Resultant in t of a(t) = sum_k a[k] t^k and b(t) = sum_k b[k] t^k, whose
    coefficients are polynomials in the remaining variables s.

    The Sylvester determinant is taken by fraction-free Bareiss elimination,
    every division exact in the polynomial ring.

    A factor of degree 0 in t gives Res(c, b) = c^deg(b).

    Raises:
        DegenerateInput: a or b is the zero polynomial.
    """
    a = _trim(a)
    b = _trim(b)
    if not a or not b:
        raise DegenerateInput("resultant of a zero polynomial")
    m, n = len(a) - 1, len(b) - 1
    if m < 1 or n < 1:
        # Res(c, b) = c^deg(b) for a constant c in t; two constants give 1
        return a[0] ** n if m == 0 else b[0] ** m
    nvars = a[0].nvars
    size = m + n
    zero = MultiPoly.zero(nvars)
    rows: List[List[MultiPoly]] = []
    a_high = list(reversed(a))
    b_high = list(reversed(b))
    for shift in range(n):
        rows.append([zero] * shift + a_high + [zero] * (size - shift - m - 1))
    for shift in range(m):
        rows.append([zero] * shift + b_high + [zero] * (size - shift - n - 1))
    return _bareiss_determinant(rows, nvars)


def _trim(coeffs: Sequence[MultiPoly]) -> List[MultiPoly]:
    out = list(coeffs)
    while out and out[-1].is_zero():
        out.pop()
    return out


def are_proportional(f: MultiPoly, g: MultiPoly) -> bool:
    """Whether g = c·f for some nonzero scalar c (both nonzero)."""
    if f.is_zero() or g.is_zero() or set(f.terms) != set(g.terms):
        return False
    exp, c = f.leading_term()
    ratio = g.terms[exp] / c
    return all(g.terms[e] == v * ratio for e, v in f.terms.items())
