"""
Singular-set counts for foliations on P^3 whose poles are planes.

Counts on lines and planes of the divisor are exact (gcds and resultants over
Q(i)); the search for singular points off the divisor is numeric.
"""
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from env import LOGFOL_THREADS
from models.poles import LogFoliationSpec
from models.verdicts import SingularityReport
from services.foliation_services import GenericityError, tolerance
from services.logtensor_services import expand
from util.exactnum_utils import ExactMatrix, GaussianRational, kernel_basis, solve_homogeneous
from util.forms_utils import PolyForm
from util.numeric_utils import NumericPolySystem
from util.polyring_utils import (
    DegenerateInput,
    MultiPoly,
    UniPoly,
    compose,
    multipoly_to_univariate,
    restrict_to_line,
    sylvester_resultant,
    uni_gcd_many,
)
from util.random_utils import make_rng, random_full_rank_matrix, random_integers

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

PLANE_ATTEMPTS = 6
NEWTON_BATCH = 250
EXPECTED_TOTAL = 40


class LineInSingularSetError(ValueError):
    pass


def _require_planes(spec: LogFoliationSpec):
    if spec.n != 3:
        raise ValueError(f"divisor counts are implemented on P^3, got n={spec.n}")
    if any(d != 1 for d in spec.degrees):
        raise ValueError(f"divisor counts need linear poles, got degrees {spec.degrees}")


def _pole_rows(spec: LogFoliationSpec, indices: Sequence[int]) -> ExactMatrix:
    rows = []
    for j in indices:
        f = spec.poles.polys[j]
        row = [GaussianRational(0)] * spec.poles.nvars
        for exp, c in f.terms.items():
            row[exp.index(1)] = c
        rows.append(row)
    return ExactMatrix(rows, cols=spec.poles.nvars)


def _count_on_line(polys: Sequence[MultiPoly], P: Sequence, Q: Sequence) -> int:
    """Common zeros on the projective line spanned by P and Q, with multiplicity."""
    chart = [restrict_to_line(f, P, Q) for f in polys]
    if all(u.is_zero() for u in chart):
        raise LineInSingularSetError("every coefficient vanishes on the line")
    affine = uni_gcd_many(chart).degree()
    at_q = uni_gcd_many(restrict_to_line(f, Q, P) for f in polys)
    return affine + at_q.root_multiplicity_at_zero()


def line_singularity_count(spec: LogFoliationSpec, i: int, j: int, form: Optional[PolyForm] = None) -> int:
    """Singular points of ω̃ on the line {ℓ_i = ℓ_j = 0} (0-based pole indices)."""
    _require_planes(spec)
    basis = kernel_basis(_pole_rows(spec, [i, j]))
    if len(basis) != 2:
        raise ValueError(f"poles {i + 1} and {j + 1} are dependent")
    w = form if form is not None else expand(spec)
    return _count_on_line(w.coefficient_polys(), basis[0], basis[1])


def _plane_count_in_chart(polys: Sequence[MultiPoly], rng: np.random.Generator) -> Optional[int]:
    """
    polys live on 3 homogeneous variables. Count common zeros in the chart
    s_0 = 1 via resultants of three random combinations, then add the line
    s_0 = 0. None signals a degenerate draw.
    """
    polys = [f for f in polys if not f.is_zero()]
    degree = max(f.total_degree() for f in polys)
    affine_subs = [MultiPoly.constant(2, 1), MultiPoly.variable(2, 0), MultiPoly.variable(2, 1)]
    cache: Dict = {}
    affine = [compose(f, affine_subs, cache) for f in polys]
    combos = []
    for _ in range(3):
        weights = random_integers(rng, len(affine), nonzero=True)
        acc = MultiPoly.zero(2)
        for w, f in zip(weights, affine):
            acc = acc + f.scale(w)
        coeffs = acc.as_univariate(0)
        if len(coeffs) != degree + 1 or coeffs[-1].total_degree() != 0:
            return None
        combos.append(coeffs)
    resultants = []
    for a, b in combinations(combos, 2):
        res = sylvester_resultant(a, b)
        resultants.append(multipoly_to_univariate(res, var=1))
    if all(u.is_zero() for u in resultants):
        return None
    affine_count = uni_gcd_many(resultants).degree()
    try:
        at_infinity = _count_on_line(polys, [0, 1, 0], [0, 0, 1])
    except LineInSingularSetError:
        return None
    return affine_count + at_infinity


def plane_singularity_count(spec: LogFoliationSpec, j: int, seed: int,
                            form: Optional[PolyForm] = None) -> int:
    """
    Singular points of the foliation induced on the plane ℓ_j = 0.

    Restricting the coefficients of ω̃ to the plane gives the singular points
    of the restricted foliation; two independent random charts must agree.
    """
    _require_planes(spec)
    w = form if form is not None else expand(spec)
    basis = kernel_basis(_pole_rows(spec, [j]))
    B = ExactMatrix(basis, cols=spec.poles.nvars).transpose()
    counts: List[int] = []
    for attempt in range(PLANE_ATTEMPTS):
        rng = make_rng(seed, j, attempt)
        T = random_full_rank_matrix(3, 3, rng)
        M = B.matmul(T)
        substitutions = [MultiPoly.linear_form(M.entries[i]) for i in range(M.rows)]
        cache: Dict = {}
        restricted = [compose(f, substitutions, cache) for f in w.coefficient_polys()]
        if all(f.is_zero() for f in restricted):
            raise LineInSingularSetError(f"ω̃ vanishes identically on plane {j + 1}")
        try:
            count = _plane_count_in_chart(restricted, rng)
        except DegenerateInput:
            count = None
        if count is None:
            logger.info(f"[AUDIT] plane {j + 1}: degenerate chart on attempt {attempt}")
            continue
        counts.append(count)
        if len(counts) >= 2 and counts[-1] == counts[-2]:
            return count
    raise GenericityError(f"plane {j + 1}: charts disagree or degenerate ({counts}); reseed")


def triple_points(spec: LogFoliationSpec, form: Optional[PolyForm] = None) -> Dict[Tuple[int, int, int], bool]:
    """Whether ω̃ vanishes exactly at each point ℓ_i = ℓ_j = ℓ_k = 0."""
    _require_planes(spec)
    w = form if form is not None else expand(spec)
    verdicts = {}
    for triple in combinations(range(spec.r), 3):
        point = solve_homogeneous(_pole_rows(spec, triple))
        verdicts[triple] = all(not f.evaluate(point) for f in w.coefficient_polys())
    return verdicts


def _chart_system(w: PolyForm, U: ExactMatrix) -> NumericPolySystem:
    """Coefficients of ω̃ on the affine chart z = U·(1, x_1, x_2, x_3)."""
    subs = [MultiPoly.linear_form(U.entries[i]) for i in range(U.rows)]
    affine_subs = [MultiPoly.constant(3, 1)] + [MultiPoly.variable(3, k) for k in range(3)]
    cache: Dict = {}
    affine_cache: Dict = {}
    polys = []
    for f in w.coefficient_polys():
        g = compose(f, subs, cache)
        polys.append(compose(g, affine_subs, affine_cache))
    return NumericPolySystem(polys)


def _newton_batch(system: NumericPolySystem, task: int, starts: int, seed: int,
                  tolerances: Optional[Dict[str, float]]) -> np.ndarray:
    """Newton on a random square subsystem; returns converged affine points."""
    rng = make_rng(seed, 1000 + task)
    iterations = int(tolerance(tolerances, "newton_iterations"))
    eps = tolerance(tolerances, "newton")
    K = len(system.polys)
    C = rng.normal(size=(3, K)) + 1j * rng.normal(size=(3, K))
    x = 1.5 * (rng.normal(size=(starts, 3)) + 1j * rng.normal(size=(starts, 3)))
    alive = np.ones(starts, dtype=bool)
    for _ in range(iterations):
        F = system.values(x) @ C.T
        J = np.einsum("ak,skj->saj", C, system.jacobian(x))
        det = np.linalg.det(J)
        bad = ~np.isfinite(det) | (np.abs(det) < 1e-300)
        J[bad] = np.eye(3)
        step = np.linalg.solve(J, F[..., None])[..., 0]
        step[bad] = 0
        alive &= ~bad
        x = x - step
        alive &= np.all(np.isfinite(x), axis=1) & (np.max(np.abs(x), axis=1) < 1e6)
        x[~alive] = 0
        if np.all(np.linalg.norm(step, axis=1)[alive] < eps * (1 + np.linalg.norm(x, axis=1)[alive])):
            break
    x = x[alive]
    for _ in range(3):
        if not len(x):
            break
        # least-squares polish on all six coefficients
        F = system.values(x)
        J = system.jacobian(x)
        x = x - np.stack([np.linalg.lstsq(J[s], F[s], rcond=None)[0] for s in range(len(x))])
    return x


def _canonical(z: np.ndarray) -> np.ndarray:
    z = z / np.linalg.norm(z)
    k = int(np.argmax(np.abs(z)))
    return z * (abs(z[k]) / z[k])


def off_divisor_search(spec: LogFoliationSpec, seed: int, tolerances: Optional[Dict[str, float]] = None,
                       form: Optional[PolyForm] = None) -> List[np.ndarray]:
    """Distinct singular points of ω̃ off the pole divisor, found by multi-start Newton."""
    w = form if form is not None else expand(spec)
    starts = int(tolerance(tolerances, "audit_starts"))
    residual_tol = tolerance(tolerances, "audit_residual")
    dedup = tolerance(tolerances, "dedup")
    U = random_full_rank_matrix(4, 4, make_rng(seed, 999))
    system = _chart_system(w, U)
    Un = np.array([[complex(c) for c in row] for row in U.entries])
    # batch sizes depend on the start count only; threads just schedule them
    sizes = [min(NEWTON_BATCH, starts - k) for k in range(0, starts, NEWTON_BATCH)]
    started = datetime.now()
    with ThreadPoolExecutor(max_workers=max(1, LOGFOL_THREADS)) as executor:
        batches = list(executor.map(lambda t: _newton_batch(system, t, sizes[t], seed, tolerances),
                                    range(len(sizes))))
    candidates = np.concatenate([b for b in batches if len(b)] or [np.zeros((0, 3), dtype=complex)])
    if len(candidates):
        candidates = candidates[system.relative_residuals(candidates) < residual_tol]
    planes = np.array([[complex(c) for c in row] for row in _pole_rows(spec, range(spec.r)).entries])
    plane_norms = np.linalg.norm(planes, axis=1)
    found: List[np.ndarray] = []
    for x in candidates:
        z = _canonical(Un @ np.concatenate([[1], x]))
        if np.min(np.abs(planes @ z) / plane_norms) <= dedup:
            continue
        if any(np.linalg.norm(z - q) < dedup for q in found):
            continue
        found.append(z)
    found.sort(key=lambda z: tuple(np.round(np.concatenate([z.real, z.imag]), 8)))
    logger.info(f"[AUDIT] Newton search: {len(candidates)} converged, {len(found)} off-divisor "
                f"in {(datetime.now() - started).total_seconds():.2f}s")
    return found


def divisor_singularity_audit(spec: LogFoliationSpec, seed: int,
                              tolerances: Optional[Dict[str, float]] = None) -> SingularityReport:
    _require_planes(spec)
    started = datetime.now()
    w = expand(spec)
    per_plane = [plane_singularity_count(spec, j, seed, form=w) for j in range(spec.r)]
    per_line = {f"{i + 1},{j + 1}": line_singularity_count(spec, i, j, form=w)
                for i, j in combinations(range(spec.r), 2)}
    triples = triple_points(spec, form=w)
    missing = [k for k, ok in triples.items() if not ok]
    if missing:
        raise GenericityError(f"triple points {[tuple(i + 1 for i in k) for k in missing]} are not singular")
    raw = (sum(per_plane), sum(per_line.values()), len(triples))
    total = raw[0] - raw[1] + raw[2]
    logger.info(f"[AUDIT] exact counts {raw}, inclusion-exclusion {total} "
                f"in {(datetime.now() - started).total_seconds():.2f}s")
    points = off_divisor_search(spec, seed, tolerances, form=w)
    return SingularityReport(
        per_plane=per_plane,
        per_line=per_line,
        triple_points=len(triples),
        raw_counts=raw,
        inclusion_exclusion_total=total,
        expected_total=EXPECTED_TOTAL,
        off_divisor_found=len(points),
        off_divisor_points=[list(z) for z in points],
        newton_starts=int(tolerance(tolerances, "audit_starts")),
        seed=seed,
    )
