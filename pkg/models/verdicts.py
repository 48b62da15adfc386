from math import gcd
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.tensors import Covector
from util.exactnum_utils import GaussianRational
from util.polyring_utils import MultiPoly

KupkaKind = Literal["regular", "kupka", "gK", "ndgK", "degenerate"]


class Decomposition(BaseModel):
    """a = scale · α_1 ∧ ... ∧ α_p."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scale: GaussianRational
    covectors: List[Covector]
    kernel_dimension: int


class CorankTwoDecomposition(BaseModel):
    """θ_3 ∧ ... ∧ θ_r = factor · a, with factor = μ_12^{r-3}."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    covectors: List[Covector]
    mu12: GaussianRational
    factor: GaussianRational


class FirstIntegral(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    components: List[Tuple[MultiPoly, int]]

    @model_validator(mode="after")
    def _check_exponents(self):
        exponents = [k for _, k in self.components]
        if any(k < 1 for k in exponents):
            raise ValueError(f"exponents must be positive, got {exponents}")
        products = {k * f.total_degree() for f, k in self.components}
        if len(products) > 1:
            raise ValueError(f"k_j·d_j is not constant: {sorted(products)}")
        g = 0
        for k in exponents:
            g = gcd(g, k)
        if g != 1:
            raise ValueError(f"exponents {exponents} share the factor {g}")
        return self

    @property
    def exponents(self) -> List[int]:
        return [k for _, k in self.components]


class IntegrabilityVerdict(BaseModel):
    tensor_plucker: bool
    symbolic_wedge_zero: bool
    tensor_wedge_zero: Optional[bool] = None
    defects: int = 0


class KupkaVerdict(BaseModel):
    kind: KupkaKind
    eigenvalues: Optional[List[complex]] = None
    form_norm: float
    differential_norm: float
    field_norm: Optional[float] = None
    chart: Optional[int] = None

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind in ("gK", "ndgK") and self.eigenvalues is None:
            raise ValueError(f"{self.kind} verdict needs eigenvalues")
        return self


class SingularityReport(BaseModel):
    per_plane: List[int]
    per_line: Dict[str, int]
    triple_points: int
    raw_counts: Tuple[int, int, int]
    inclusion_exclusion_total: int
    expected_total: int = Field(default=40, description="expected number of isolated singularities for the six-plane example")
    off_divisor_found: int
    off_divisor_points: List[List[complex]] = Field(default_factory=list)
    newton_starts: int = 0
    seed: int = 0

    @model_validator(mode="after")
    def _check_total(self):
        planes, lines, triples = self.raw_counts
        if planes - lines + triples != self.inclusion_exclusion_total:
            raise ValueError("inclusion-exclusion total does not match the raw counts")
        return self


class PoincareVerdict(BaseModel):
    in_domain: bool
    witness: Optional[complex] = None
    max_gap: float


class NonresonanceVerdict(BaseModel):
    nonresonant: bool
    index: Optional[int] = None
    multipliers: Optional[List[int]] = None
