from datetime import datetime
from math import gcd, lcm
from typing import Dict, List, Optional
import logging

from env import DEFAULT_TOLERANCES
from models.poles import LogFoliationSpec, PoleSystem
from models.tensors import ResidueTensor
from models.verdicts import FirstIntegral, IntegrabilityVerdict
from services.logtensor_services import (
    expand,
    expand_tensor,
    is_decomposable,
    plucker_defects,
    pullback_spec,
)
from util.forms_utils import (
    PolyForm,
    contract,
    exterior_derivative,
    pullback_linear,
    radial_field,
    wedge,
)
from util.polyring_utils import MultiPoly, divides, homogeneous_degree
from util.random_utils import make_rng, random_full_rank_matrix, random_integers

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MAX_DEGREE_RETRIES = 5
POINT_ATTEMPTS = 20


class GenericityError(ValueError):
    """The data is not generic enough for the requested computation; reseed."""


class VerificationError(RuntimeError):
    pass


def _pole_invariance(w: PolyForm, poles: PoleSystem) -> List[bool]:
    verdicts = []
    for f in poles.polys:
        product = wedge(PolyForm.differential(f), w)
        verdicts.append(all(divides(f, c)[0] for c in product.coefficients.values()))
    return verdicts


def is_logarithmic(w: PolyForm, poles: PoleSystem) -> bool:
    """f_j divides every coefficient of df_j ∧ w, for every pole."""
    return all(_pole_invariance(w, poles))


def invariant_pole_components(spec: LogFoliationSpec, form: Optional[PolyForm] = None) -> List[bool]:
    w = form if form is not None else expand(spec)
    return _pole_invariance(w, spec.poles)


def is_closed_form(w: PolyForm, poles: PoleSystem) -> bool:
    """d(w / F) = 0 with F = Π f_j, i.e. F·dw = dF ∧ w."""
    F = poles.product()
    lhs = exterior_derivative(w).scale(F)
    rhs = wedge(PolyForm.differential(F), w)
    return (lhs - rhs).is_zero()


def is_closed_log(spec: LogFoliationSpec, form: Optional[PolyForm] = None) -> bool:
    w = form if form is not None else expand(spec)
    return is_closed_form(w, spec.poles)


def foliation_degree(spec: LogFoliationSpec) -> int:
    degree = sum(spec.degrees) - spec.p - 1
    if degree < 0:
        raise ValueError(f"negative foliation degree {degree}")
    return degree


def degree_by_restriction(spec: LogFoliationSpec, seed: int, form: Optional[PolyForm] = None) -> int:
    """
    Degree of the tangency divisor with a generic (p+1)-dimensional subspace.

    The pullback Ω of ω̃ to C^{p+1} is annihilated by the radial field, so
    Ω = i_R(G·ds_0∧...∧ds_p): the coefficient of ds_{omit k} is (-1)^k s_k G.
    """
    p, n = spec.p, spec.n
    if p > n - 1:
        raise ValueError(f"degree by restriction needs p <= n - 1, got p={p}, n={n}")
    w = form if form is not None else expand(spec)
    started = datetime.now()
    for attempt in range(MAX_DEGREE_RETRIES + 1):
        rng = make_rng(seed, attempt)
        M = random_full_rank_matrix(n + 1, p + 1, rng)
        omega = pullback_linear(w, M)
        G = _radial_quotient(omega)
        if G is None or G.is_zero():
            logger.info(f"[DEGREE] degenerate restriction on attempt {attempt}, reseeding")
            continue
        degree = homogeneous_degree(G)
        logger.info(f"[DEGREE] restriction degree {degree} after {attempt + 1} attempt(s) "
                    f"in {(datetime.now() - started).total_seconds():.2f}s")
        return degree
    raise GenericityError(f"restriction degenerate after {MAX_DEGREE_RETRIES} retries; spec is not generic")


def _radial_quotient(omega: PolyForm) -> Optional[MultiPoly]:
    m = omega.nvars
    if omega.is_zero():
        return None
    candidate: Optional[MultiPoly] = None
    for k in range(m):
        omit = tuple(j for j in range(m) if j != k)
        coeff = omega.coefficient(omit)
        terms = {}
        for exp, c in coeff.terms.items():
            if not exp[k]:
                raise VerificationError(f"coefficient of ds_{omit} is not divisible by s_{k}")
            shifted = exp[:k] + (exp[k] - 1,) + exp[k + 1:]
            terms[shifted] = -c if k % 2 else c
        G = MultiPoly(m, terms)
        if candidate is None:
            candidate = G
        elif G != candidate:
            raise VerificationError("restricted form is not of the form i_R(G·vol)")
    return candidate


def integrability_p2(spec: LogFoliationSpec, form: Optional[PolyForm] = None) -> IntegrabilityVerdict:
    if spec.p != 2:
        raise ValueError(f"integrability check is for p = 2, got p={spec.p}")
    defects = plucker_defects(spec.tensor)
    w = form if form is not None else expand(spec)
    symbolic = wedge(w, w).is_zero()
    tensor_wedge_zero = spec.tensor.wedge(spec.tensor).is_zero() if spec.n >= 4 else None
    return IntegrabilityVerdict(
        tensor_plucker=not defects,
        symbolic_wedge_zero=symbolic,
        tensor_wedge_zero=tensor_wedge_zero,
        defects=len(defects),
    )


def first_integral(spec: LogFoliationSpec, form: Optional[PolyForm] = None) -> FirstIntegral:
    """
    F = (f_1^{k_1}, ..., f_{p+1}^{k_{p+1}}) with k_j d_j constant and gcd(k) = 1.

    Verified by (d_1 f_1 df_j − d_j f_j df_1) ∧ ω̃ = 0 for j = 2..p+1.
    """
    if spec.r != spec.p + 1:
        raise ValueError(f"first integral needs r = p + 1, got r={spec.r}, p={spec.p}")
    if not spec.tensor.interior(spec.degrees).is_zero():
        raise ValueError("tensor is not in the radial kernel")
    d = spec.degrees
    L = lcm(*d)
    k = [L // dj for dj in d]
    g = 0
    for kj in k:
        g = gcd(g, kj)
    k = [kj // g for kj in k]
    w = form if form is not None else expand(spec)
    f = spec.poles.polys
    df1 = PolyForm.differential(f[0])
    for j in range(1, spec.r):
        cleared = PolyForm.differential(f[j]).scale(f[0] * d[0]) - df1.scale(f[j] * d[j])
        if not wedge(cleared, w).is_zero():
            raise VerificationError(f"f_{j + 1}^{d[0]} / f_1^{d[j]} is not a first integral")
    return FirstIntegral(components=list(zip(f, k)))


def radial_volume_form(P: MultiPoly) -> PolyForm:
    """Numerator of i_R(dz_0∧...∧dz_n) / P; closed when deg P = n + 1."""
    nvars = P.nvars
    degree = homogeneous_degree(P)
    if degree != nvars:
        raise ValueError(f"need deg P = {nvars}, got {degree}")
    return contract(PolyForm.volume(nvars), radial_field(nvars))


def radial_compatibility(spec: LogFoliationSpec, form: Optional[PolyForm] = None) -> bool:
    """contract(ω̃, R) equals the expansion of the radially contracted tensor."""
    w = form if form is not None else expand(spec)
    contracted = contract(w, radial_field(spec.poles.nvars))
    mu = spec.tensor.interior(spec.degrees)
    if mu.p == 0:
        expected = PolyForm.function(spec.poles.product().scale(mu[()]))
    else:
        expected = expand_tensor(spec.poles, mu)
    return contracted == expected


def _pointwise_tensor(w: PolyForm, poles: PoleSystem, seed: int) -> ResidueTensor:
    """The value of w at a random integer point off the poles, as an exact element of Λ^p."""
    for attempt in range(POINT_ATTEMPTS):
        point = random_integers(make_rng(seed, 8, attempt), w.nvars, nonzero=True)
        if any(not f.evaluate(point) for f in poles.polys):
            continue
        values = {idx: c.evaluate(point) for idx, c in w.coefficients.items()}
        value = ResidueTensor(w.nvars, w.degree, values)
        if not value.is_zero():
            return value
    raise GenericityError(f"no random point off the poles with a nonzero value in {POINT_ATTEMPTS} attempts")


def restriction_preserves_decomposability(spec: LogFoliationSpec, seed: int) -> Dict[str, object]:
    """
    Restrict to a generic P^m, m = min(n, p + 2), and compare the restricted
    form with the original data: functoriality of the expansion, the degree
    recovered from the restricted form, and decomposability of the restricted
    form itself (pointwise, plus ω∧ω for p = 2).

    On P^{p+1} every radial p-form is pointwise decomposable, so the
    decomposability comparison is reported as None when n < p + 2.
    """
    n, p = spec.n, spec.p
    m = min(n, p + 2)
    rng = make_rng(seed, 7)
    M = random_full_rank_matrix(n + 1, m + 1, rng)
    restricted = pullback_spec(spec, M)
    w = expand(restricted)
    functorial = w == pullback_linear(expand(spec), M)
    tensor_decomposable = is_decomposable(spec.tensor)
    pointwise_decomposable = None
    wedge_zero = None
    same_decomposability = None
    if m >= p + 2:
        pointwise_decomposable = is_decomposable(_pointwise_tensor(w, restricted.poles, seed))
        same_decomposability = pointwise_decomposable == tensor_decomposable
        if p == 2:
            wedge_zero = wedge(w, w).is_zero()
            same_decomposability = same_decomposability and wedge_zero == tensor_decomposable
    degree = foliation_degree(spec)
    restricted_degree = degree_by_restriction(restricted, seed, form=w) if p <= m - 1 else None
    logger.info(f"[DEGREE] restriction to P^{m}: tensor decomposable {tensor_decomposable}, "
                f"restricted form decomposable {pointwise_decomposable}")
    return {
        "dimension": m,
        "functorial": functorial,
        "tensor_decomposable": tensor_decomposable,
        "pointwise_decomposable": pointwise_decomposable,
        "restricted_wedge_zero": wedge_zero,
        "same_decomposability": same_decomposability,
        "degree": degree,
        "restricted_degree": restricted_degree,
        "passed": (functorial and same_decomposability is not False
                   and restricted_degree in (None, degree)),
    }


def tolerance(tolerances: Optional[Dict[str, float]], key: str) -> float:
    if tolerances and key in tolerances:
        return tolerances[key]
    return DEFAULT_TOLERANCES[key]
