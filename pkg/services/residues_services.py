from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from itertools import combinations
from math import pi
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from env import LOGFOL_THREADS
from models.poles import LogFoliationSpec, PoleSystem
from models.residues import ResidueRow, TorusCycle
from services.foliation_services import tolerance
from services.logtensor_services import expand
from util.exactnum_utils import format_scalar
from util.forms_utils import PolyForm, evaluate_many
from util.numeric_utils import NumericPolySystem
from util.random_utils import make_rng

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

INITIAL_RADIUS = 0.1
COARSE_NODES = 32


class BasePointNotFound(ValueError):
    pass


class CycleError(ValueError):
    pass


class QuadratureError(ValueError):
    pass


def _check_index(poles: PoleSystem, I: Sequence[int]) -> Tuple[int, ...]:
    I = tuple(I)
    if not I or list(I) != sorted(set(I)) or I[-1] >= poles.r or I[0] < 0:
        raise ValueError(f"bad pole index tuple {tuple(i + 1 for i in I)}")
    if len(I) > poles.n:
        raise ValueError(f"{len(I)} poles cannot meet in P^{poles.n} at a smooth point")
    return I


def find_base_point(poles: PoleSystem, I: Sequence[int], seed: int,
                    tolerances: Optional[Dict[str, float]] = None) -> np.ndarray:
    """
    A point of {f_i = 0, i ∈ I} off the other poles, where the f_i are transverse.

    Newton on f_I completed by random affine equations; unit norm on return.
    """
    I = _check_index(poles, I)
    rng = make_rng(seed, *I)
    nvars = poles.nvars
    eps = tolerance(tolerances, "newton")
    iterations = int(tolerance(tolerances, "newton_iterations"))
    reject = tolerance(tolerances, "off_divisor_reject")
    system = NumericPolySystem(poles.polys)
    rows = list(I)
    others = [k for k in range(poles.r) if k not in I]
    for _ in range(int(tolerance(tolerances, "newton_starts"))):
        L = rng.normal(size=(nvars - len(I), nvars)) + 1j * rng.normal(size=(nvars - len(I), nvars))
        z = rng.normal(size=nvars) + 1j * rng.normal(size=nvars)
        for _ in range(iterations):
            F = np.concatenate([system.values(z)[0, rows], L @ z - 1])
            J = np.vstack([system.jacobian(z)[0, rows], L])
            try:
                step = np.linalg.solve(J, F)
            except np.linalg.LinAlgError:
                break
            z = z - step
            if np.linalg.norm(step) < eps * (1 + np.linalg.norm(z)):
                break
        if not np.all(np.isfinite(z)) or not np.linalg.norm(z):
            continue
        z = z / np.linalg.norm(z)
        values = np.abs(system.values(z)[0])
        if np.max(values[rows] / system.l1_norms[rows]) > 1e-10:
            continue
        if others and np.min(values[others] / system.l1_norms[others]) < reject:
            continue
        if np.linalg.matrix_rank(system.jacobian(z)[0, rows], tol=1e-8) < len(I):
            continue
        return z
    raise BasePointNotFound(f"no base point on the poles {tuple(i + 1 for i in I)} off the other poles")


def _grid(p: int, nodes: int) -> np.ndarray:
    t = 2 * pi * np.arange(nodes) / nodes
    return np.stack(np.meshgrid(*[t] * p, indexing="ij"), axis=-1).reshape(-1, p)


def _torus_points(cycle: TorusCycle, angles: np.ndarray) -> np.ndarray:
    m = np.asarray(cycle.base_point, dtype=complex)
    V = np.asarray(cycle.directions, dtype=complex).T
    return m[None, :] + cycle.radius * np.exp(1j * angles) @ V.T


def _winding_matrix(system: NumericPolySystem, I: Tuple[int, ...], cycle: TorusCycle) -> np.ndarray:
    p = len(I)
    nodes = cycle.nodes
    t = 2 * pi * np.arange(nodes) / nodes
    V = np.asarray(cycle.directions, dtype=complex)
    winding = np.zeros((p, p), dtype=complex)
    for k in range(p):
        angles = np.zeros((nodes, p))
        angles[:, k] = t
        z = _torus_points(cycle, angles)
        dz = 1j * cycle.radius * np.exp(1j * t)[:, None] * V[k][None, :]
        values = system.values(z)[:, list(I)]
        grads = system.jacobian(z)[:, list(I), :]
        integrand = np.einsum("sjv,sv->sj", grads, dz) / values
        winding[:, k] = integrand.mean(axis=0) / 1j
    return winding


def validate_cycle(poles: PoleSystem, I: Sequence[int], cycle: TorusCycle,
                   tolerances: Optional[Dict[str, float]] = None) -> np.ndarray:
    """
    Winding of f_{i_j} around circle k must be δ_jk, and the other poles must
    stay away from the torus.

    Raises:
        CycleError: with the offending winding matrix.
    """
    I = _check_index(poles, I)
    system = NumericPolySystem(poles.polys)
    winding = _winding_matrix(system, I, cycle)
    if np.max(np.abs(winding - np.eye(len(I)))) > tolerance(tolerances, "winding"):
        raise CycleError(f"winding matrix {np.round(winding, 6).tolist()} is not the identity")
    others = [k for k in range(poles.r) if k not in I]
    z = _torus_points(cycle, _grid(len(I), cycle.nodes))
    values = np.abs(system.values(z))
    if np.min(values[:, list(I)]) <= 1e-3 * cycle.radius * np.min(system.l1_norms[list(I)]):
        raise CycleError("the torus touches one of its own poles")
    if others and np.min(values[:, others] / system.l1_norms[others]) <= 0.1 * cycle.radius:
        raise CycleError("the torus comes too close to a pole outside the index")
    return winding


def build_cycle(poles: PoleSystem, I: Sequence[int], m: np.ndarray,
                tolerances: Optional[Dict[str, float]] = None) -> TorusCycle:
    """Directions from the pseudo-inverse of Df_I(m); the radius is halved until the cycle validates."""
    I = _check_index(poles, I)
    system = NumericPolySystem(poles.polys)
    J = system.jacobian(m)[0, list(I)]
    V = np.linalg.pinv(J)
    nodes = int(tolerance(tolerances, "cycle_nodes"))
    radius = INITIAL_RADIUS
    last_error = None
    for _ in range(int(tolerance(tolerances, "cycle_halvings")) + 1):
        cycle = TorusCycle(index=I, base_point=list(m), directions=[list(V[:, k]) for k in range(len(I))],
                           radius=radius, nodes=nodes)
        try:
            winding = validate_cycle(poles, I, cycle, tolerances)
        except CycleError as e:
            last_error = e
            radius /= 2
            continue
        cycle.winding = [list(row) for row in winding]
        return cycle
    raise CycleError(f"no valid cycle for {tuple(i + 1 for i in I)} after halving: {last_error}")


def _quadrature(spec: LogFoliationSpec, w: PolyForm, cycle: TorusCycle, nodes: int) -> complex:
    """
    (2πi)^{-p} ∫_T ω̃/F by the tensor-product trapezoid rule.

    With tangents i ε e^{i t_k} v_k the integrand reduces to
    ε^p e^{i Σ t_k} Σ_K w_K(z) det(V_K) / F(z).
    """
    p = len(cycle.index)
    angles = _grid(p, nodes)
    z = _torus_points(cycle, angles)
    keys, values = evaluate_many(w, z)
    V = np.asarray(cycle.directions, dtype=complex).T
    minors = np.array([np.linalg.det(V[list(K), :]) for K in keys])
    F = NumericPolySystem([spec.poles.product()]).values(z)[:, 0]
    integrand = cycle.radius ** p * np.exp(1j * angles.sum(axis=1)) * (values @ minors) / F
    return complex(integrand.mean())


def torus_residue(spec: LogFoliationSpec, I: Sequence[int], cycle: TorusCycle,
                  tolerances: Optional[Dict[str, float]] = None, form: Optional[PolyForm] = None) -> complex:
    return _torus_residue_pair(spec, I, cycle, tolerances, form)[0]


def _torus_residue_pair(spec, I, cycle, tolerances, form) -> Tuple[complex, complex]:
    I = _check_index(spec.poles, I)
    if tuple(cycle.index) != I:
        raise ValueError(f"cycle links {cycle.index}, asked for {I}")
    if len(I) != spec.p:
        raise ValueError(f"residue of a {spec.p}-form needs {spec.p} poles, got {len(I)}")
    w = form if form is not None else expand(spec)
    fine = _quadrature(spec, w, cycle, cycle.nodes)
    coarse = _quadrature(spec, w, cycle, COARSE_NODES)
    if abs(fine - coarse) > tolerance(tolerances, "quadrature_agreement"):
        raise QuadratureError(f"quadrature with {COARSE_NODES} and {cycle.nodes} nodes disagree: "
                              f"{coarse} vs {fine}")
    return fine, coarse


def recover_residue(spec: LogFoliationSpec, I: Sequence[int], seed: int,
                    tolerances: Optional[Dict[str, float]] = None, form: Optional[PolyForm] = None) -> ResidueRow:
    I = _check_index(spec.poles, I)
    m = find_base_point(spec.poles, I, seed, tolerances)
    cycle = build_cycle(spec.poles, I, m, tolerances)
    fine, coarse = _torus_residue_pair(spec, I, cycle, tolerances, form)
    exact = spec.tensor[I]
    error = abs(fine - complex(exact))
    return ResidueRow(
        index=tuple(i + 1 for i in I),
        exact=format_scalar(exact),
        recovered=fine,
        coarse=coarse,
        error=error,
        radius=cycle.radius,
        nodes=cycle.nodes,
        seed=seed,
        accepted=error < tolerance(tolerances, "residue_accept"),
    )


def recover_residues(spec: LogFoliationSpec, seed: int,
                     tolerances: Optional[Dict[str, float]] = None) -> List[ResidueRow]:
    """Recover every λ_I (p ≤ 3) from torus integrals, one job per index tuple."""
    if spec.p > 3:
        raise ValueError(f"residue recovery is limited to p <= 3, got p={spec.p}")
    started = datetime.now()
    w = expand(spec)
    jobs = list(combinations(range(spec.r), spec.p))
    with ThreadPoolExecutor(max_workers=LOGFOL_THREADS) as executor:
        rows = list(executor.map(lambda I: recover_residue(spec, I, seed, tolerances, w), jobs))
    logger.info(f"[RESIDUE] {len(rows)} residues, {sum(r.accepted for r in rows)} accepted "
                f"in {(datetime.now() - started).total_seconds():.2f}s")
    return rows
