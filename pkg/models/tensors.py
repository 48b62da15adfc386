from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from util.exactnum_utils import ZERO, GaussianRational, ScalarLike
from util.forms_utils import merge_sign

Index = Tuple[int, ...]


class ResidueTensor:
    """
    Element of Λ^p(C^r*): entries λ_I keyed by strictly increasing 0-based tuples.

    Degree 0 is allowed (a single scalar at the empty tuple) so that contracting
    a degree-1 tensor stays inside the type.
    """

    __slots__ = ("r", "p", "entries")

    def __init__(self, r: int, p: int, entries: Optional[Dict[Sequence[int], ScalarLike]] = None):
        if not 0 <= p <= r:
            raise ValueError(f"tensor degree {p} outside 0..{r}")
        self.r = r
        self.p = p
        clean: Dict[Index, GaussianRational] = {}
        for idx, value in (entries or {}).items():
            idx = tuple(idx)
            if len(idx) != p:
                raise ValueError(f"tensor index {idx} has length {len(idx)}, expected {p}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"tensor index {idx} is not strictly increasing")
            if idx and not (0 <= idx[0] and idx[-1] < r):
                raise ValueError(f"tensor index {idx} out of range for r={r}")
            c = GaussianRational.coerce(value)
            if c:
                clean[idx] = c
        self.entries = clean

    @classmethod
    def _raw(cls, r: int, p: int, entries: Dict[Index, GaussianRational]) -> "ResidueTensor":
        t = cls.__new__(cls)
        t.r = r
        t.p = p
        t.entries = {k: v for k, v in entries.items() if v}
        return t

    @classmethod
    def scalar(cls, r: int, value: ScalarLike) -> "ResidueTensor":
        return cls(r, 0, {(): value})

    @classmethod
    def basis(cls, r: int, index: Sequence[int]) -> "ResidueTensor":
        return cls(r, len(index), {tuple(index): 1})

    def is_zero(self) -> bool:
        return not self.entries

    def __getitem__(self, index: Sequence[int]) -> GaussianRational:
        return self.entries.get(tuple(index), ZERO)

    def _check(self, other: "ResidueTensor"):
        if self.r != other.r:
            raise ValueError(f"pole count mismatch: {self.r} vs {other.r}")

    def __add__(self, other: "ResidueTensor") -> "ResidueTensor":
        self._check(other)
        if self.p != other.p:
            raise ValueError(f"cannot add tensors of degree {self.p} and {other.p}")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, ZERO) + v
        return ResidueTensor._raw(self.r, self.p, out)

    def __neg__(self):
        return ResidueTensor._raw(self.r, self.p, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: ScalarLike) -> "ResidueTensor":
        factor = GaussianRational.coerce(factor)
        return ResidueTensor._raw(self.r, self.p, {k: v * factor for k, v in self.entries.items()})

    def __eq__(self, other):
        if not isinstance(other, ResidueTensor):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.r == other.r
        return (self.r, self.p, self.entries) == (other.r, other.p, other.entries)

    def __hash__(self):
        return hash((self.r, self.p, frozenset(self.entries.items())))

    def __repr__(self):
        body = ", ".join(f"{tuple(i + 1 for i in k)}: {v}" for k, v in sorted(self.entries.items()))
        return f"ResidueTensor(r={self.r}, p={self.p}, {{{body}}})"

    def sorted_entries(self) -> List[Tuple[Index, GaussianRational]]:
        return sorted(self.entries.items())

    def wedge(self, other: "ResidueTensor") -> "ResidueTensor":
        self._check(other)
        degree = self.p + other.p
        if degree > self.r:
            return ResidueTensor._raw(self.r, degree, {})
        out: Dict[Index, GaussianRational] = {}
        for i, a in self.entries.items():
            for j, b in other.entries.items():
                sign, idx = merge_sign(i, j)
                if sign:
                    term = a * b
                    out[idx] = out.get(idx, ZERO) + (term if sign > 0 else -term)
        return ResidueTensor._raw(self.r, degree, out)

    def interior(self, u: Sequence[ScalarLike]) -> "ResidueTensor":
        """i_u with the same sign convention as forms contraction."""
        if self.p < 1:
            raise ValueError("cannot contract a degree-0 tensor")
        if len(u) != self.r:
            raise ValueError(f"vector of length {len(u)} for r={self.r}")
        vec = [GaussianRational.coerce(x) for x in u]
        out: Dict[Index, GaussianRational] = {}
        for idx, value in self.entries.items():
            for k, i in enumerate(idx):
                if not vec[i]:
                    continue
                term = vec[i] * value
                rest = idx[:k] + idx[k + 1:]
                out[rest] = out.get(rest, ZERO) + (-term if k % 2 else term)
        return ResidueTensor._raw(self.r, self.p - 1, out)

    def as_vector(self) -> List[GaussianRational]:
        """Coordinates against the ascending basis of p-tuples."""
        return [self[idx] for idx in combinations(range(self.r), self.p)]

    @classmethod
    def from_vector(cls, r: int, p: int, coords: Iterable[ScalarLike]) -> "ResidueTensor":
        return cls(r, p, dict(zip(combinations(range(r), p), coords)))


class Covector:
    """θ = Σ_j c_j du_j, i.e. Σ_j c_j df_j/f_j through Φ."""

    __slots__ = ("r", "coords")

    def __init__(self, coords: Sequence[ScalarLike]):
        self.coords = [GaussianRational.coerce(c) for c in coords]
        self.r = len(self.coords)

    def to_tensor(self) -> ResidueTensor:
        return ResidueTensor(self.r, 1, {(j,): c for j, c in enumerate(self.coords)})

    def __eq__(self, other):
        return isinstance(other, Covector) and self.coords == other.coords

    def __repr__(self):
        return "Covector(" + ", ".join(str(c) for c in self.coords) + ")"

    def pair(self, v: Sequence[ScalarLike]) -> GaussianRational:
        acc = ZERO
        for c, x in zip(self.coords, v):
            acc = acc + c * GaussianRational.coerce(x)
        return acc
