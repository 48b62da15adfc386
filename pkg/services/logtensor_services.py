from itertools import combinations
from typing import Dict, List, Sequence, Tuple, Union
import logging

import env
from models.poles import LogFoliationSpec, PoleSystem
from models.tensors import Covector, ResidueTensor
from models.verdicts import CorankTwoDecomposition, Decomposition
from util.exactnum_utils import (
    ExactMatrix,
    GaussianRational,
    ScalarLike,
    annihilator,
    kernel_basis,
)
from util.forms_utils import PolyForm, wedge
from util.polyring_utils import MultiPoly, compose

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

TensorLike = Union[ResidueTensor, Covector]


class NotDecomposableError(ValueError):
    pass


class DecompositionInconsistency(RuntimeError):
    """Internal cross-check failed; indicates a bug, never bad input."""


def _as_tensor(x: TensorLike) -> ResidueTensor:
    return x.to_tensor() if isinstance(x, Covector) else x


def _require_nonzero(a: ResidueTensor):
    if a.is_zero():
        raise ValueError("zero tensor")


def tensor_wedge(a: TensorLike, b: TensorLike) -> ResidueTensor:
    return _as_tensor(a).wedge(_as_tensor(b))


def tensor_from_covectors(covectors: Sequence[Covector], scale: ScalarLike = 1) -> ResidueTensor:
    result = covectors[0].to_tensor()
    for cov in covectors[1:]:
        result = result.wedge(cov.to_tensor())
    return result.scale(scale)


def tensor_contract(a: ResidueTensor, u: Sequence[ScalarLike]) -> ResidueTensor:
    return a.interior(u)


def contraction_matrix(a: ResidueTensor) -> ExactMatrix:
    """Matrix of v -> i_v a; rows are the (p-1)-tuples, columns the r basis vectors."""
    rows = list(combinations(range(a.r), a.p - 1))
    position = {idx: k for k, idx in enumerate(rows)}
    grid = [[GaussianRational(0)] * a.r for _ in rows]
    for idx, value in a.entries.items():
        for k, j in enumerate(idx):
            rest = idx[:k] + idx[k + 1:]
            grid[position[rest]][j] = -value if k % 2 else value
    return ExactMatrix(grid, cols=a.r)


def tensor_kernel(a: ResidueTensor) -> List[List[GaussianRational]]:
    _require_nonzero(a)
    return kernel_basis(contraction_matrix(a))


def is_decomposable(a: ResidueTensor) -> bool:
    _require_nonzero(a)
    return len(tensor_kernel(a)) == a.r - a.p


def decompose(a: ResidueTensor) -> Decomposition:
    """
    Write a = c · α_1∧...∧α_p with the α_i spanning the annihilator of ker(a).

    Raises:
        NotDecomposableError: the kernel is too small.
    """
    _require_nonzero(a)
    kernel = tensor_kernel(a)
    if len(kernel) != a.r - a.p:
        raise NotDecomposableError(f"kernel dimension {len(kernel)} != r - p = {a.r - a.p}")
    alphas = [Covector(v) for v in annihilator(kernel, a.r)]
    if len(alphas) != a.p:
        raise DecompositionInconsistency(f"annihilator has dimension {len(alphas)}, expected {a.p}")
    mu = tensor_from_covectors(alphas)
    idx = next(iter(sorted(mu.entries)), None)
    if idx is None:
        raise DecompositionInconsistency("annihilator covectors wedge to zero")
    c = a[idx] / mu[idx]
    if mu.scale(c) != a:
        raise DecompositionInconsistency("re-wedge does not reproduce the tensor")
    if a.p == 2 and env.LOGFOL_DEBUG_CHECKS:
        _cross_check_bivector(a)
    return Decomposition(scale=c, covectors=alphas, kernel_dimension=len(kernel))


def _cross_check_bivector(a: ResidueTensor):
    # θ = (1/θ(u,v)) · i_u θ ∧ i_v θ for u, v with θ(u,v) != 0
    i, j = min(a.entries)
    u = [1 if k == i else 0 for k in range(a.r)]
    v = [1 if k == j else 0 for k in range(a.r)]
    iu, iv = a.interior(u), a.interior(v)
    theta_uv = iu.interior(v)[()]
    if iu.wedge(iv).scale(theta_uv.inverse()) != a:
        raise DecompositionInconsistency("bivector contraction formula disagrees with the tensor")


def plucker_defects(a: ResidueTensor) -> List[GaussianRational]:
    """
    Nonzero obstructions to decomposability.

    p = 2: the quadrics Ψ = λ_ij λ_kl − λ_ik λ_jl + λ_il λ_jk over i<j<k<l.
    p >= 3: the entries of (i_ξ a) ∧ a over basis (p-1)-tuples ξ.
    """
    _require_nonzero(a)
    defects: List[GaussianRational] = []
    if a.p == 2:
        for i, j, k, l in combinations(range(a.r), 4):
            psi = a[(i, j)] * a[(k, l)] - a[(i, k)] * a[(j, l)] + a[(i, l)] * a[(j, k)]
            if psi:
                defects.append(psi)
    elif a.p >= 3:
        for xi in combinations(range(a.r), a.p - 1):
            beta = a
            for j in xi:
                beta = beta.interior([1 if k == j else 0 for k in range(a.r)])
            if beta.is_zero():
                continue
            product = beta.wedge(a)
            defects.extend(value for _, value in product.sorted_entries())
    if env.LOGFOL_DEBUG_CHECKS and (not defects) != is_decomposable(a):
        raise DecompositionInconsistency("Plücker defects disagree with the kernel criterion")
    return defects


def _complement_entry(a: ResidueTensor, k: int, l: int) -> GaussianRational:
    """μ_kl (1-based k != l): the entry on the complement of {k, l}, antisymmetric in (k, l)."""
    rest = tuple(j for j in range(a.r) if j not in (k - 1, l - 1))
    value = a[rest]
    return value if k < l else -value


def decompose_corank2(a: ResidueTensor) -> CorankTwoDecomposition:
    """
    Explicit decomposition for r = p + 2.

    With μ_kl as above and ρ_k^j = (-1)^{k-1} μ_kj, the covectors
    θ_j = −ρ_j^2 e_1* − ρ_j^1 e_2* + ρ_2^1 e_j* (j = 3..r) satisfy
    θ_3∧...∧θ_r = μ_12^{r-3} · a.
    """
    if a.r != a.p + 2:
        raise ValueError(f"corank-2 decomposition needs r = p + 2, got r={a.r}, p={a.p}")
    _require_nonzero(a)
    if not is_decomposable(a):
        raise NotDecomposableError("tensor is not decomposable")
    mu12 = _complement_entry(a, 1, 2)
    if not mu12:
        k, l = next((k, l) for k, l in combinations(range(1, a.r + 1), 2) if _complement_entry(a, k, l))
        raise ValueError(f"μ_12 = 0; reorder the poles so that {k} and {l} come first")

    def rho(k: int, j: int) -> GaussianRational:
        value = _complement_entry(a, k, j)
        return -value if (k - 1) % 2 else value

    covectors = []
    for j in range(3, a.r + 1):
        coords = [GaussianRational(0)] * a.r
        coords[0] = -rho(j, 2)
        coords[1] = -rho(j, 1)
        coords[j - 1] = rho(2, 1)
        covectors.append(Covector(coords))
    factor = mu12 ** (a.r - 3)
    if tensor_from_covectors(covectors) != a.scale(factor):
        raise DecompositionInconsistency("corank-2 identity failed")
    return CorankTwoDecomposition(covectors=covectors, mu12=mu12, factor=factor)


def radial_contraction(a: ResidueTensor, degrees: Sequence[int]) -> ResidueTensor:
    """Φ-coordinates of i_R η: μ_K = Σ_{j∉K} sign(j into K) d_j λ_{K∪{j}}."""
    if len(degrees) != a.r:
        raise ValueError(f"{len(degrees)} degrees for r={a.r}")
    if any(d < 1 for d in degrees):
        raise ValueError(f"degrees must be positive, got {list(degrees)}")
    return a.interior(list(degrees))


def radial_kernel(degrees: Sequence[int], r: int, p: int) -> List[ResidueTensor]:
    if len(degrees) != r:
        raise ValueError(f"{len(degrees)} degrees for r={r}")
    if not 1 <= p <= r:
        raise ValueError(f"p={p} outside 1..{r}")
    columns = list(combinations(range(r), p))
    rows = list(combinations(range(r), p - 1))
    position = {idx: k for k, idx in enumerate(rows)}
    grid = [[GaussianRational(0)] * len(columns) for _ in rows]
    for col, idx in enumerate(columns):
        image = ResidueTensor.basis(r, idx).interior(list(degrees))
        for rest, value in image.entries.items():
            grid[position[rest]][col] = value
    basis = kernel_basis(ExactMatrix(grid, cols=len(columns)))
    return [ResidueTensor.from_vector(r, p, v) for v in basis]


def expand(spec: LogFoliationSpec) -> PolyForm:
    """
    ω̃ = Σ_I λ_I (Π_{j∉I} f_j) df_{i_1}∧...∧df_{i_p}, fully expanded.
    """
    poles = spec.poles
    return expand_tensor(poles, spec.tensor)


def expand_tensor(poles: PoleSystem, tensor: ResidueTensor) -> PolyForm:
    if tensor.r != poles.r:
        raise ValueError(f"tensor has r={tensor.r} but there are {poles.r} poles")
    nvars = poles.nvars
    differentials = [PolyForm.differential(f) for f in poles.polys]
    frames: Dict[Tuple[int, ...], PolyForm] = {}

    def frame(idx: Tuple[int, ...]) -> PolyForm:
        if idx not in frames:
            frames[idx] = (PolyForm.function(MultiPoly.constant(nvars, 1)) if not idx
                           else wedge(frame(idx[:-1]), differentials[idx[-1]]))
        return frames[idx]

    result = PolyForm.zero(nvars, tensor.p)
    for idx, value in tensor.sorted_entries():
        cofactor = poles.product(skip=set(idx)).scale(value)
        result = result + frame(idx).scale(cofactor)
    expected = sum(poles.degrees) - tensor.p
    for poly in result.coefficients.values():
        if any(sum(e) != expected for e in poly.terms):
            raise DecompositionInconsistency(f"coefficient not homogeneous of degree {expected}")
    return result


def fibration_decomposition(spec: LogFoliationSpec) -> Tuple[GaussianRational, List[Covector]]:
    """
    For r = p + 1: a = λ · θ_2∧...∧θ_{p+1} with θ_j = e_j* − (d_j/d_1) e_1*.
    """
    a = spec.tensor
    if a.r != a.p + 1:
        raise ValueError(f"fibration decomposition needs r = p + 1, got r={a.r}, p={a.p}")
    d = spec.degrees
    covectors = []
    for j in range(1, a.r):
        coords = [GaussianRational(0)] * a.r
        coords[0] = -GaussianRational(d[j]) / d[0]
        coords[j] = GaussianRational(1)
        covectors.append(Covector(coords))
    mu = tensor_from_covectors(covectors)
    idx = min(mu.entries)
    lam = a[idx] / mu[idx]
    if mu.scale(lam) != a:
        raise NotDecomposableError("tensor is not in the radial kernel; no fibration decomposition")
    return lam, covectors


def pullback_spec(spec: LogFoliationSpec, M: ExactMatrix) -> LogFoliationSpec:
    """Compose every pole with z = M·s; the tensor is unchanged."""
    if M.rows != spec.poles.nvars:
        raise ValueError(f"matrix has {M.rows} rows, poles live on {spec.poles.nvars} variables")
    if M.rank() != M.cols:
        raise ValueError("rank-deficient pullback matrix")
    substitutions = [MultiPoly.linear_form(M.entries[i]) for i in range(M.rows)]
    cache: Dict = {}
    polys = [compose(f, substitutions, cache) for f in spec.poles.polys]
    poles = PoleSystem(n=M.cols - 1, polys=polys, degrees=list(spec.degrees))
    return LogFoliationSpec(poles=poles, tensor=spec.tensor, projective=spec.projective)
