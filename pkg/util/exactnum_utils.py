"""
Exact scalars over Q(i) and exact linear algebra.

BigRational is the standard library ``fractions.Fraction`` (always normalized,
positive denominator, zero stored as 0/1). GaussianRational pairs two of them.
"""
import re
from fractions import Fraction
from math import lcm
from typing import Iterable, List, Optional, Sequence, Tuple, Union

BigRational = Fraction

ScalarLike = Union["GaussianRational", Fraction, int, str]


class OnlyTrivialSolution(ValueError):
    """The homogeneous system has only the zero solution."""


class DegenerateInput(ValueError):
    pass


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re: Union[Fraction, int] = 0, im: Union[Fraction, int] = 0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, value: ScalarLike) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, str):
            return parse_scalar(value)
        if isinstance(value, complex):
            raise TypeError("complex floats cannot be coerced into an exact scalar")
        return cls(value)

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def is_real(self) -> bool:
        return not self.im

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def height(self) -> int:
        """Largest absolute numerator, used to rank pivots."""
        return max(abs(self.re.numerator), abs(self.im.numerator))

    def __add__(self, other):
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        if not self.im and not other.im:
            return GaussianRational(self.re * other.re)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussianRational":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in Q(i)")
        if not self.im:
            return GaussianRational(1 / self.re)
        n = self.norm()
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        if not isinstance(other, GaussianRational):
            other = GaussianRational.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = GaussianRational.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)


_SPLIT = re.compile(r"(?<=[0-9.])([+-])")


def parse_scalar(text: str) -> GaussianRational:
    """
    Parse a scalar literal.

    Accepted forms (whitespace-insensitive): ``"a/b"``, ``"a/b+c/d i"``,
    ``"c/d i"``, ``"i"``, ``"-i"``.

    Raises:
        ValueError: if the literal is malformed.
    """
    if not isinstance(text, str):
        raise ValueError(f"Scalar literal must be a string, got {type(text).__name__}")
    s = "".join(text.split())
    if not s:
        raise ValueError("Empty scalar literal")
    try:
        if not s.endswith("i"):
            return GaussianRational(Fraction(s))
        body = s[:-1]
        parts = _SPLIT.split(body)
        if len(parts) == 1:
            return GaussianRational(0, _imag_part(body))
        if len(parts) == 3:
            real, sign, imag = parts
            return GaussianRational(Fraction(real), _imag_part(sign + imag))
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Malformed scalar literal {text!r}: {e}") from e
    raise ValueError(f"Malformed scalar literal {text!r}")


def _imag_part(token: str) -> Fraction:
    if token in ("", "+"):
        return Fraction(1)
    if token == "-":
        return Fraction(-1)
    return Fraction(token)


def format_scalar(value: GaussianRational) -> str:
    re_part, im_part = value.re, value.im
    if not im_part:
        return str(re_part)
    im_text = "i" if im_part == 1 else "-i" if im_part == -1 else f"{im_part} i"
    if not re_part:
        return im_text
    if im_part > 0:
        return f"{re_part}+{im_text}"
    return f"{re_part}{im_text}" if im_part == -1 else f"{re_part}{im_part} i"


class ExactMatrix:
    """Dense rectangular matrix over Q(i)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[ScalarLike]], cols: Optional[int] = None):
        grid = tuple(tuple(GaussianRational.coerce(x) for x in row) for row in entries)
        if cols is None:
            cols = len(grid[0]) if grid else 0
        for row in grid:
            if len(row) != cols:
                raise ValueError(f"Ragged matrix: expected {cols} columns, got {len(row)}")
        self.rows = len(grid)
        self.cols = cols
        self.entries = grid

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls([[ZERO] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, size: int) -> "ExactMatrix":
        return cls([[ONE if i == j else ZERO for j in range(size)] for i in range(size)], cols=size)

    def __getitem__(self, index: Tuple[int, int]) -> GaussianRational:
        i, j = index
        return self.entries[i][j]

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
                           cols=self.rows)

    def apply(self, vector: Sequence[ScalarLike]) -> List[GaussianRational]:
        if len(vector) != self.cols:
            raise ValueError(f"Vector length {len(vector)} does not match {self.cols} columns")
        v = [GaussianRational.coerce(x) for x in vector]
        out = []
        for row in self.entries:
            acc = ZERO
            for a, b in zip(row, v):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return out

    def matmul(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"Shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        cols_of_other = other.transpose().entries
        return ExactMatrix([[_dot(row, col) for col in cols_of_other] for row in self.entries],
                           cols=other.cols)

    def echelon(self) -> Tuple[List[List[GaussianRational]], List[int]]:
        """
        Fraction-free row echelon form by Bareiss elimination, largest numerator first.

        Rows are scaled into Z[i] first and every division by the previous pivot
        is exact, so all entries stay in Z[i]. For a square nonsingular integer
        matrix the last pivot is ±det.
        """
        m = [_integral_row(row) for row in self.entries]
        pivots: List[int] = []
        previous = ONE
        r = 0
        for c in range(self.cols):
            if r >= self.rows:
                break
            candidates = [i for i in range(r, self.rows) if m[i][c]]
            if not candidates:
                continue
            best = max(candidates, key=lambda i: m[i][c].height())
            m[r], m[best] = m[best], m[r]
            pivot = m[r][c]
            for i in range(r + 1, self.rows):
                lead = m[i][c]
                m[i] = [(pivot * a - lead * b) / previous if a or b else a for a, b in zip(m[i], m[r])]
            previous = pivot
            pivots.append(c)
            r += 1
        return m, pivots

    def rref(self) -> Tuple[List[List[GaussianRational]], List[int]]:
        """Reduced row echelon form and the pivot columns; fractions only enter when pivots are normalized."""
        m, pivots = self.echelon()
        for k in reversed(range(len(pivots))):
            c = pivots[k]
            inv = m[k][c].inverse()
            m[k] = [x * inv if x else x for x in m[k]]
            for i in range(k):
                if m[i][c]:
                    factor = m[i][c]
                    m[i] = [a - factor * b if b else a for a, b in zip(m[i], m[k])]
        return m, pivots

    def rank(self) -> int:
        return len(self.echelon()[1])

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.entries == other.entries and self.cols == other.cols

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols})"


def _integral_row(row: Sequence[GaussianRational]) -> List[GaussianRational]:
    scale = 1
    for x in row:
        scale = lcm(scale, x.re.denominator, x.im.denominator)
    return [x * scale if x else x for x in row] if scale != 1 else list(row)


def _dot(a: Iterable[GaussianRational], b: Iterable[GaussianRational]) -> GaussianRational:
    acc = ZERO
    for x, y in zip(a, b):
        if x and y:
            acc = acc + x * y
    return acc


def normalize_vector(v: Sequence[GaussianRational]) -> List[GaussianRational]:
    """Scale so that the first nonzero entry is 1."""
    for x in v:
        if x:
            inv = x.inverse()
            return [y * inv for y in v]
    return list(v)


def kernel_basis(m: ExactMatrix) -> List[List[GaussianRational]]:
    """
    Basis of the right null space of ``m``.

    Args:
        m: the matrix.

    Returns:
        list of vectors, one per free column, each normalized so its first
        nonzero entry is 1. Empty when ``m`` has full column rank.
    """
    reduced, pivots = m.rref()
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = [ZERO] * m.cols
        v[free] = ONE
        for row, pc in enumerate(pivots):
            if reduced[row][free]:
                v[pc] = -reduced[row][free]
        basis.append(normalize_vector(v))
    return basis


def solve_homogeneous(m: ExactMatrix) -> List[GaussianRational]:
    """
    Nonzero solution of m·x = 0, normalized so its first nonzero entry is 1.

    Raises:
        OnlyTrivialSolution: when the kernel is {0}.
    """
    basis = kernel_basis(m)
    if not basis:
        raise OnlyTrivialSolution(f"only trivial solution for a {m.rows}x{m.cols} system")
    return basis[0]


def annihilator(vectors: Sequence[Sequence[GaussianRational]], dim: int) -> List[List[GaussianRational]]:
    """Basis of the covectors vanishing on every vector given."""
    if not vectors:
        return [[ONE if i == j else ZERO for j in range(dim)] for i in range(dim)]
    return kernel_basis(ExactMatrix(vectors, cols=dim))


def is_zero_vector(v: Sequence[GaussianRational]) -> bool:
    return not any(v)
