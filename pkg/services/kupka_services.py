from cmath import exp as cexp, phase
from datetime import datetime
from itertools import product as cartesian
from math import floor, pi
from typing import Dict, List, Optional, Sequence, Union
import logging

import numpy as np

from models.poles import LogFoliationSpec
from models.tensors import Covector
from models.verdicts import KupkaVerdict, NonresonanceVerdict, PoincareVerdict
from services.foliation_services import tolerance
from services.logtensor_services import expand
from util.exactnum_utils import ExactMatrix, GaussianRational, ScalarLike, kernel_basis
from util.forms_utils import (
    FormDegreeError,
    PolyForm,
    dehomogenize,
    evaluate,
    exterior_derivative,
    rotational,
)
from util.random_utils import make_rng

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

Number = Union[GaussianRational, complex, int, float]
TauTable = Optional[Sequence[Sequence[ScalarLike]]]

SAMPLE_RADIUS = 1e-3
SAMPLE_DIRECTIONS = 64


def _tau_rows(degrees: Sequence[int], n: int, tau: TauTable) -> List[List[GaussianRational]]:
    """τ as n−2 rows (j = 2..n−1) of r−n+1 entries (i = n..r); None means τ = 0."""
    r = len(degrees)
    if n < 4:
        raise ValueError(f"the perturbation family needs n >= 4, got n={n}")
    if r < n - 1:
        raise ValueError(f"need r >= n - 1 poles, got r={r}, n={n}")
    width = r - n + 1
    if tau is None:
        return [[GaussianRational(0)] * width for _ in range(n - 2)]
    rows = [[GaussianRational.coerce(t) for t in row] for row in tau]
    if len(rows) != n - 2 or any(len(row) != width for row in rows):
        shape = [len(row) for row in rows]
        raise ValueError(f"τ must have {n - 2} rows of {width} entries, got rows of lengths {shape}")
    return rows


def _coefficients(degrees: Sequence[int], n: int, tau: TauTable):
    """A_j and B_ji for j = 2..n−1 (list position j−2), i = n..r."""
    d = [GaussianRational(x) for x in degrees]
    rows = _tau_rows(degrees, n, tau)
    A, B = [], []
    for j, row in zip(range(2, n), rows):
        total = GaussianRational(0)
        for t in row:
            total = total + t
        A.append(d[j - 1] / d[0] - total)
        B.append([(d[0] / d[i - 1]) * t for i, t in zip(range(n, len(d) + 1), row)])
    return A, B


def perturbation_family(degrees: Sequence[int], n: int, tau: TauTable = None) -> List[Covector]:
    """
    θ_τ^j = e_j* − A_j e_1* − Σ_i B_ji e_i* for j = 2..n−1, with
    A_j = d_j/d_1 − Σ_i t_ji and B_ji = (d_1/d_i) t_ji.
    """
    r = len(degrees)
    A, B = _coefficients(degrees, n, tau)
    family = []
    for j, a_j, b_j in zip(range(2, n), A, B):
        coords = [GaussianRational(0)] * r
        coords[j - 1] = GaussianRational(1)
        coords[0] = -a_j
        for i, b in zip(range(n, r + 1), b_j):
            coords[i - 1] = coords[i - 1] - b
        covector = Covector(coords)
        if covector.pair(list(degrees)):
            raise AssertionError(f"θ^{j} is not annihilated by the radial functional")
        family.append(covector)
    return family


def kupka_eigenvalue_system(degrees: Sequence[int], n: int, tau: TauTable = None) -> List[GaussianRational]:
    """
    Solve x_1 + ... + x_n = 0 and x_j − A_j x_1 − B_j x_n = 0 (j = 2..n−1).

    Degrees of length n − 1 are accepted when τ is zero (d_n never enters).
    """
    degrees = list(degrees)
    if len(degrees) == n - 1:
        if tau is not None and any(GaussianRational.coerce(t) for row in tau for t in row):
            raise ValueError("degrees of length n - 1 only make sense with τ = 0")
        degrees = degrees + [1]
        tau = None
    if len(degrees) != n:
        raise ValueError(f"the eigenvalue system needs r = n, got r={len(degrees)}, n={n}")
    A, B = _coefficients(degrees, n, tau)
    rows = [[GaussianRational(1)] * n]
    for j, a_j, b_j in zip(range(2, n), A, B):
        row = [GaussianRational(0)] * n
        row[j - 1] = GaussianRational(1)
        row[0] = -a_j
        row[n - 1] = row[n - 1] - b_j[0]
        rows.append(row)
    kernel = kernel_basis(ExactMatrix(rows, cols=n))
    if len(kernel) != 1:
        raise ValueError(f"eigenvalue system has a {len(kernel)}-dimensional kernel; τ is degenerate")
    return kernel[0]


def normal_type_eigenvalues(degrees: Sequence[int], n: int, tau: TauTable = None) -> List[GaussianRational]:
    """ρ_1 = d_1 and ρ_j = d_j − d_1 Σ_i t_ji for j = 2..n−1."""
    rows = _tau_rows(degrees, n, tau)
    d1 = GaussianRational(degrees[0])
    rhos = [d1]
    for j, row in zip(range(2, n), rows):
        total = GaussianRational(0)
        for t in row:
            total = total + t
        rhos.append(GaussianRational(degrees[j - 1]) - d1 * total)
    return rhos


def tau_is_generic(degrees: Sequence[int], n: int, tau: TauTable = None) -> bool:
    rows = _tau_rows(degrees, n, tau)
    t = {}
    for j, row in zip(range(2, n), rows):
        total = GaussianRational(0)
        for x in row:
            total = total + x
        t[j] = total
    for i in range(2, n):
        for j in range(i + 1, n):
            if not (t[j] * degrees[i - 1] - t[i] * degrees[j - 1]):
                return False
    return True


def kupka_transversality(lambdas: Sequence[Number], rhos: Sequence[Number], tol: float = 1e-9) -> bool:
    if len(lambdas) != len(rhos):
        raise ValueError(f"{len(lambdas)} λ's against {len(rhos)} ρ's")
    exact = all(isinstance(x, (GaussianRational, int)) for x in list(lambdas) + list(rhos))
    for i in range(len(rhos)):
        for j in range(i + 1, len(rhos)):
            if exact:
                value = GaussianRational.coerce(lambdas[i]) * GaussianRational.coerce(rhos[j]) \
                    - GaussianRational.coerce(lambdas[j]) * GaussianRational.coerce(rhos[i])
                if not value:
                    return False
            elif abs(complex(lambdas[i]) * complex(rhos[j]) - complex(lambdas[j]) * complex(rhos[i])) <= tol:
                return False
    return True


def poincare_domain_check(values: Sequence[Number], tolerances: Optional[Dict[str, float]] = None) -> PoincareVerdict:
    """In the Poincaré domain iff some open half-plane through 0 holds every value."""
    if not values:
        raise ValueError("empty list")
    numbers = [complex(v) for v in values]
    if any(v == 0 for v in numbers):
        raise ValueError("zero entry")
    tol = tolerance(tolerances, "poincare_gap")
    angles = sorted(phase(v) % (2 * pi) for v in numbers)
    m = len(angles)
    gaps = [angles[k + 1] - angles[k] for k in range(m - 1)] + [angles[0] + 2 * pi - angles[-1]]
    k = max(range(m), key=lambda i: gaps[i])
    gap = gaps[k]
    if gap <= pi + tol:
        return PoincareVerdict(in_domain=False, max_gap=gap)
    center = angles[(k + 1) % m] + (2 * pi - gap) / 2
    witness = cexp(-1j * center)
    return PoincareVerdict(in_domain=True, witness=witness, max_gap=gap)


def nonresonance_check(rho: Sequence[Number], tolerances: Optional[Dict[str, float]] = None) -> NonresonanceVerdict:
    """
    Search for ρ_j = Σ_{i≠j} m_i ρ_i with m_i ≥ 0 and Σ m_i ≥ 1.

    After rotating into the right half-plane every Re(aρ_i) is positive, so
    only finitely many m can balance the real parts.
    """
    verdict = poincare_domain_check(rho, tolerances)
    if not verdict.in_domain:
        raise ValueError("not in the Poincaré domain")
    tol = tolerance(tolerances, "nonresonance")
    a = verdict.witness
    sigma = [(a * complex(x)).real for x in rho]
    exact = all(isinstance(x, (GaussianRational, int)) for x in rho)
    values = [GaussianRational.coerce(x) for x in rho] if exact else [complex(x) for x in rho]
    for j in range(len(rho)):
        others = [i for i in range(len(rho)) if i != j]
        bounds = [floor((sigma[j] + tol) / sigma[i]) for i in others]
        for m in cartesian(*[range(b + 1) for b in bounds]):
            if not sum(m):
                continue
            if sum(mi * sigma[i] for mi, i in zip(m, others)) > sigma[j] + tol:
                continue
            if exact:
                total = GaussianRational(0)
                for mi, i in zip(m, others):
                    total = total + values[i] * mi
                resonant = total == values[j]
            else:
                resonant = abs(sum(mi * values[i] for mi, i in zip(m, others)) - values[j]) <= tol
            if resonant:
                multipliers = [0] * len(rho)
                for mi, i in zip(m, others):
                    multipliers[i] = mi
                return NonresonanceVerdict(nonresonant=False, index=j, multipliers=multipliers)
    return NonresonanceVerdict(nonresonant=True)


def _relative_norm(form: PolyForm, point: np.ndarray) -> float:
    scale = form.coefficient_scale()
    if not scale:
        return 0.0
    values = evaluate(form, point)
    return max((abs(v) for v in values.values()), default=0.0) / scale


def kupka_classify(spec: LogFoliationSpec, point: Sequence[complex],
                   tolerances: Optional[Dict[str, float]] = None,
                   form: Optional[PolyForm] = None) -> KupkaVerdict:
    """
    Classify a point of P^n (homogeneous coordinates) for the foliation of spec.

    regular: ω(p) != 0; kupka: ω(p) = 0, dω(p) != 0. Otherwise, for a
    two-dimensional foliation, the rotational X is analysed: ndgK when DX(p)
    is invertible, gK when p is still an isolated zero of X, degenerate else.
    """
    tol = tolerance(tolerances, "kupka_zero")
    step = tolerance(tolerances, "finite_difference_step")
    z = np.asarray(point, dtype=complex)
    if z.shape != (spec.poles.nvars,):
        raise ValueError(f"point needs {spec.poles.nvars} homogeneous coordinates")
    chart = int(np.argmax(np.abs(z)))
    x = np.delete(z / z[chart], chart)
    w = dehomogenize(form if form is not None else expand(spec), chart)
    dw = exterior_derivative(w)
    form_norm = _relative_norm(w, x)
    differential_norm = _relative_norm(dw, x)
    if form_norm > tol:
        return KupkaVerdict(kind="regular", form_norm=form_norm, differential_norm=differential_norm, chart=chart)
    if differential_norm > tol:
        return KupkaVerdict(kind="kupka", form_norm=form_norm, differential_norm=differential_norm, chart=chart)
    if w.degree != w.nvars - 2:
        raise FormDegreeError(f"gK analysis needs a form of degree {w.nvars - 2}, got {w.degree}")
    started = datetime.now()
    X = rotational(w)
    field_scale = max((c.coefficient_scale() for c in X.components), default=0.0) or 1.0
    jacobian = X.jacobian_fd(x, step)
    eigenvalues = [complex(e) for e in np.linalg.eigvals(jacobian)]
    field_norm = float(np.max(np.abs(X.evaluate(x)))) / field_scale
    if all(abs(e) / field_scale > tol for e in eigenvalues):
        kind = "ndgK"
    else:
        kind = "gK" if _isolated_zero(X, x, field_scale, tol) else "degenerate"
    logger.info(f"[KUPKA] {kind} at chart {chart} in {(datetime.now() - started).total_seconds():.2f}s")
    return KupkaVerdict(kind=kind, eigenvalues=eigenvalues, form_norm=form_norm,
                        differential_norm=differential_norm, field_norm=field_norm, chart=chart)


def _isolated_zero(X, x: np.ndarray, scale: float, tol: float) -> bool:
    rng = make_rng(0, len(x))
    directions = rng.normal(size=(SAMPLE_DIRECTIONS, len(x))) + 1j * rng.normal(size=(SAMPLE_DIRECTIONS, len(x)))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    samples = x[None, :] + SAMPLE_RADIUS * directions
    return all(np.max(np.abs(X.evaluate(q))) / scale > tol for q in samples)
