"""
Scenario loading, the named-check registry and the concurrent runner.

Each check receives a RunContext and its params and returns
(passed, counts, witnesses). Exceptions are caught per check and turned into
failed results.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from itertools import combinations
from threading import Lock
from typing import Any, Callable, Dict, List, Optional, Tuple, Union
import logging
import traceback

import numpy as np
from pydantic import ValidationError

import env
from env import (
    DEFAULT_TOLERANCES,
    LOGFOL_SEED,
    LOGFOL_THREADS,
    SCENARIO_SCHEMA,
)
from models.poles import LogFoliationSpec, PoleSystem
from models.scenarios import CheckResult, CheckSpec, Report, Scenario
from models.tensors import Covector
from services.foliation_services import (
    degree_by_restriction,
    first_integral,
    foliation_degree,
    integrability_p2,
    invariant_pole_components,
    is_closed_form,
    is_closed_log,
    is_logarithmic,
    radial_compatibility,
    radial_volume_form,
    restriction_preserves_decomposability,
)
from services.kupka_services import (
    kupka_classify,
    kupka_eigenvalue_system,
    kupka_transversality,
    nonresonance_check,
    normal_type_eigenvalues,
    perturbation_family,
    poincare_domain_check,
    tau_is_generic,
)
from services.logtensor_services import (
    DecompositionInconsistency,
    decompose,
    decompose_corank2,
    expand,
    expand_tensor,
    fibration_decomposition,
    is_decomposable,
    plucker_defects,
    radial_contraction,
    radial_kernel,
    tensor_from_covectors,
    tensor_kernel,
    tensor_wedge,
)
from services.residues_services import recover_residues
from services.singularities_services import (
    divisor_singularity_audit,
    line_singularity_count,
    plane_singularity_count,
    triple_points,
)
from util.exactnum_utils import ExactMatrix, GaussianRational, kernel_basis
from util.forms_utils import wedge
from util.models_utils import custom_encoder
from util.parsing_utils import load_json, parse_complex, parse_poly, parse_tensor
from util.polyring_utils import MultiPoly, homogeneous_degree
from util.random_utils import make_rng, random_homogeneous, random_vector

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CheckOutcome = Tuple[bool, Dict[str, Any], Dict[str, Any]]


class ScenarioError(ValueError):
    """Every violation found in a scenario document, not just the first."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class RunContext:
    """Spec plus lazily computed shared objects; safe to use from several threads."""

    def __init__(self, spec: LogFoliationSpec, seed: int, tolerances: Dict[str, float]):
        self.spec = spec
        self.seed = seed
        self.tolerances = tolerances
        self._lock = Lock()
        self._form = None

    @property
    def form(self):
        with self._lock:
            if self._form is None:
                self._form = expand(self.spec)
            return self._form


@dataclass(frozen=True)
class CheckDefinition:
    fn: Callable[[RunContext, Dict[str, Any]], CheckOutcome]
    covers: Tuple[str, ...]


# every library operation some check reaches; kept in sync by the coverage test
LIBRARY_OPERATIONS = (
    "parse_scalar", "format_scalar", "kernel_basis", "solve_homogeneous", "sylvester_resultant",
    "arith", "partial_derivative", "homogeneous_degree", "divides", "compose", "restrict_to_line", "uni_gcd",
    "wedge", "exterior_derivative", "contract", "pullback_linear", "evaluate", "rotational",
    "dehomogenize", "radial_field", "evaluate_many",
    "tensor_wedge", "tensor_contract", "tensor_kernel", "is_decomposable", "decompose", "plucker_defects",
    "decompose_corank2", "radial_contraction", "radial_kernel", "expand", "fibration_decomposition",
    "tensor_from_covectors", "pullback_spec",
    "is_logarithmic", "is_closed_log", "is_closed_form", "invariant_pole_components", "foliation_degree",
    "degree_by_restriction", "integrability_p2", "first_integral", "radial_volume_form",
    "restriction_preserves_decomposability", "line_singularity_count", "plane_singularity_count",
    "divisor_singularity_audit", "kupka_classify", "perturbation_family", "kupka_eigenvalue_system",
    "normal_type_eigenvalues", "tau_is_generic", "kupka_transversality", "poincare_domain_check",
    "nonresonance_check",
    "find_base_point", "build_cycle", "validate_cycle", "torus_residue", "recover_residues",
)


def _expected(params: Dict[str, Any], key: str, actual) -> bool:
    return key not in params or params[key] == actual


def check_homogeneity(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    degrees = [homogeneous_degree(f) for f in ctx.spec.poles.polys]
    derivatives = [homogeneous_degree(f.partial(0)) if not f.partial(0).is_zero() else None
                   for f in ctx.spec.poles.polys]
    consistent = all(dd is None or dd == d - 1 for d, dd in zip(degrees, derivatives))
    return degrees == ctx.spec.degrees and consistent, {"degrees": degrees}, {}


def check_expand_degree(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    w = ctx.form
    expected = sum(ctx.spec.degrees) - ctx.spec.p
    degrees = sorted({homogeneous_degree(f) for f in w.coefficient_polys() if not f.is_zero()})
    return degrees == [expected], {"coefficient_degree": expected, "coefficients": len(w.coefficients)}, {}


def check_is_logarithmic(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    verdict = is_logarithmic(ctx.form, ctx.spec.poles)
    return verdict, {"logarithmic": verdict}, {}


def check_is_closed_log(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    verdict = is_closed_log(ctx.spec, ctx.form)
    return verdict, {"closed": verdict}, {}


def check_invariant_poles(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    verdicts = invariant_pole_components(ctx.spec, ctx.form)
    return all(verdicts), {"invariant": sum(verdicts), "poles": len(verdicts)}, {"per_pole": verdicts}


def check_radial_compatibility(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    mu = radial_contraction(ctx.spec.tensor, ctx.spec.degrees)
    compatible = radial_compatibility(ctx.spec, ctx.form)
    passed = compatible and (mu.is_zero() or not ctx.spec.projective)
    return passed, {"compatible": compatible, "radial_contraction_zero": mu.is_zero()}, {}


def check_radial_kernel(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    spec = ctx.spec
    basis = radial_kernel(spec.degrees, spec.r, spec.p)
    annihilated = all(radial_contraction(b, spec.degrees).is_zero() for b in basis)
    contains = True
    if spec.projective and basis:
        vectors = [b.as_vector() for b in basis]
        m = ExactMatrix(vectors + [spec.tensor.as_vector()], cols=len(vectors[0]))
        contains = m.rank() == len(basis)
    return annihilated and contains, {"dimension": len(basis)}, {}


def check_phi_homomorphism(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    """expand(a) ∧ expand(b) = F · expand(a ∧ b) for a random covector b."""
    spec = ctx.spec
    rng = make_rng(ctx.seed, 11)
    b = tensor_from_covectors([_random_covector(rng, spec.r)])
    ab = tensor_wedge(spec.tensor, b)
    lhs = wedge(ctx.form, expand_tensor(spec.poles, b))
    if ab.is_zero() or ab.p > spec.poles.nvars:
        return lhs.is_zero(), {"degree": spec.p + 1}, {}
    rhs = expand_tensor(spec.poles, ab).scale(spec.poles.product())
    return lhs == rhs, {"degree": spec.p + 1}, {}


def _random_covector(rng, r: int) -> Covector:
    return Covector(random_vector(rng, r))


def check_decomposition(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    a = ctx.spec.tensor
    kernel = tensor_kernel(a)
    decomposable = is_decomposable(a)
    defects = plucker_defects(a)
    counts = {"kernel_dimension": len(kernel), "decomposable": decomposable, "plucker_defects": len(defects)}
    witnesses: Dict[str, Any] = {}
    if decomposable:
        d = decompose(a)
        witnesses["scale"] = d.scale
        witnesses["covectors"] = d.covectors
        if ctx.spec.projective:
            radial_ok = all(not c.pair(ctx.spec.degrees) for c in d.covectors)
            counts["covectors_radial"] = radial_ok
            if not radial_ok:
                return False, counts, witnesses
    return _expected(params, "decomposable", decomposable), counts, witnesses


def check_decompose_corank2(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    result = decompose_corank2(ctx.spec.tensor)
    return True, {"covectors": len(result.covectors)}, {"mu12": result.mu12, "covectors": result.covectors}


def check_fibration(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    lam, covectors = fibration_decomposition(ctx.spec)
    radial = all(not radial_contraction(c.to_tensor(), ctx.spec.degrees)[()] for c in covectors)
    return radial, {"covectors": len(covectors)}, {"lambda": lam, "covectors": covectors}


def check_foliation_degree(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    degree = foliation_degree(ctx.spec)
    return _expected(params, "expected", degree), {"degree": degree}, {}


def check_degree_by_restriction(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    formula = foliation_degree(ctx.spec)
    restricted = degree_by_restriction(ctx.spec, ctx.seed, ctx.form)
    return formula == restricted, {"formula": formula, "restriction": restricted}, {}


def check_restriction(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    result = restriction_preserves_decomposability(ctx.spec, ctx.seed)
    passed = bool(result.pop("passed"))
    return passed, result, {}


def check_integrability(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    verdict = integrability_p2(ctx.spec, ctx.form)
    passed = (not verdict.tensor_plucker) or verdict.symbolic_wedge_zero
    if ctx.spec.n >= 4:
        passed = passed and verdict.tensor_plucker == verdict.symbolic_wedge_zero
    passed = passed and _expected(params, "integrable", verdict.symbolic_wedge_zero)
    return passed, verdict.model_dump(), {}


def check_first_integral(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    result = first_integral(ctx.spec, ctx.form)
    return True, {"exponents": result.exponents}, {}


def check_radial_volume_form(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    nvars = ctx.spec.poles.nvars
    P = random_homogeneous(nvars, nvars, make_rng(ctx.seed, 13))
    w = radial_volume_form(P)
    poles = PoleSystem(n=ctx.spec.n, polys=[P])
    closed, logarithmic = is_closed_form(w, poles), is_logarithmic(w, poles)
    return closed and logarithmic, {"closed": closed, "logarithmic": logarithmic}, {}


def check_line_singularities(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    counts = {f"{i + 1},{j + 1}": line_singularity_count(ctx.spec, i, j, ctx.form)
              for i, j in combinations(range(ctx.spec.r), 2)}
    passed = "expected" not in params or all(c == params["expected"] for c in counts.values())
    return passed, {"per_line": counts}, {}


def check_plane_singularities(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    counts = [plane_singularity_count(ctx.spec, j, ctx.seed, ctx.form) for j in range(ctx.spec.r)]
    triples = triple_points(ctx.spec, ctx.form)
    passed = all(triples.values())
    passed = passed and ("expected" not in params or all(c == params["expected"] for c in counts))
    return passed, {"per_plane": counts, "triple_points": sum(triples.values())}, {}


def check_divisor_audit(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    report = divisor_singularity_audit(ctx.spec, ctx.seed, ctx.tolerances)
    passed = _expected(params, "inclusion_exclusion_total", report.inclusion_exclusion_total)
    passed = passed and _expected(params, "off_divisor", report.off_divisor_found)
    counts = {
        "raw_counts": report.raw_counts,
        "inclusion_exclusion_total": report.inclusion_exclusion_total,
        "off_divisor_found": report.off_divisor_found,
        "expected_total": report.expected_total,
    }
    return passed, counts, {"off_divisor_points": report.off_divisor_points}


def check_residues(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    rows = recover_residues(ctx.spec, ctx.seed, ctx.tolerances)
    worst = max((row.error for row in rows), default=0.0)
    return all(row.accepted for row in rows), {"residues": len(rows), "max_error": worst}, {"rows": rows}


def _kupka_point(ctx: RunContext, params: Dict[str, Any]) -> np.ndarray:
    if "point" in params:
        return np.array([parse_complex(x) for x in params["point"]])
    indices = [i - 1 for i in params.get("indices", [])]
    if not indices or any(ctx.spec.degrees[i] != 1 for i in indices):
        raise ValueError("kupka check needs a point or the indices of linear poles to intersect")
    rows = []
    for i in indices:
        row = [GaussianRational(0)] * ctx.spec.poles.nvars
        for exp, c in ctx.spec.poles.polys[i].terms.items():
            row[exp.index(1)] = c
        rows.append(row)
    basis = kernel_basis(ExactMatrix(rows, cols=ctx.spec.poles.nvars))
    rng = make_rng(ctx.seed, 17)
    weights = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
    return sum(w * np.array([complex(x) for x in v]) for w, v in zip(weights, basis))


def check_kupka(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    verdict = kupka_classify(ctx.spec, _kupka_point(ctx, params), ctx.tolerances, ctx.form)
    return _expected(params, "expected", verdict.kind), {"kind": verdict.kind}, {"verdict": verdict}


def _match_up_to_scale(numeric: List[complex], exact: List[GaussianRational], tol: float = 1e-6) -> bool:
    target = np.array([complex(x) for x in exact])
    values = np.array(numeric)
    anchor = int(np.argmax(np.abs(target)))
    candidates = [v / target[anchor] for v in values if abs(v) > 0]
    for c in candidates:
        scaled = c * target
        remaining = list(values)
        for s in scaled:
            k = int(np.argmin([abs(s - v) for v in remaining]))
            if abs(s - remaining[k]) > tol * max(1.0, abs(c)):
                break
            remaining.pop(k)
        else:
            return True
    return False


def check_perturbation_family(ctx: RunContext, params: Dict[str, Any]) -> CheckOutcome:
    """For each τ: radial family, eigenvalue system, normal-type verdicts and the ndgK point."""
    spec = ctx.spec
    n, degrees = spec.n, spec.degrees
    taus = params.get("taus", [None])
    rows = []
    passed = True
    for tau in taus:
        family = perturbation_family(degrees, n, tau)
        eta = tensor_from_covectors(family)
        row: Dict[str, Any] = {
            "tau": tau,
            "radial": radial_contraction(eta, degrees).is_zero(),
            "decomposable": is_decomposable(eta),
            "generic": tau_is_generic(degrees, n, tau),
        }
        lambdas = kupka_eigenvalue_system(degrees, n, tau) if spec.r == n else None
        rhos = normal_type_eigenvalues(degrees, n, tau)
        poincare = poincare_domain_check(rhos, ctx.tolerances)
        row["lambdas"] = lambdas
        row["rhos"] = rhos
        row["poincare"] = poincare.in_domain
        if poincare.in_domain:
            row["nonresonant"] = nonresonance_check(rhos, ctx.tolerances).nonresonant
        if lambdas is not None:
            row["transversal"] = kupka_transversality(lambdas[:len(rhos)], rhos)
        ok = row["radial"] and row["decomposable"]
        if lambdas is not None and params.get("classify", True) and all(d == 1 for d in degrees):
            tau_spec = spec.with_tensor(eta)
            point = _kupka_point(RunContext(tau_spec, ctx.seed, ctx.tolerances), {"indices": list(range(1, n + 1))})
            verdict = kupka_classify(tau_spec, point, ctx.tolerances)
            row["kind"] = verdict.kind
            row["eigenvalues_match"] = verdict.kind == "ndgK" and _match_up_to_scale(verdict.eigenvalues, lambdas)
            ok = ok and row["eigenvalues_match"]
        passed = passed and ok
        rows.append(row)
    return passed, {"taus": len(rows)}, {"rows": rows}


CHECKS: Dict[str, CheckDefinition] = {
    "homogeneity": CheckDefinition(check_homogeneity, ("homogeneous_degree", "partial_derivative", "arith")),
    "expand_degree": CheckDefinition(check_expand_degree, ("expand", "wedge")),
    "is_logarithmic": CheckDefinition(check_is_logarithmic, ("is_logarithmic", "divides")),
    "is_closed_log": CheckDefinition(check_is_closed_log, ("is_closed_log", "is_closed_form", "exterior_derivative")),
    "invariant_pole_components": CheckDefinition(check_invariant_poles, ("invariant_pole_components",)),
    "radial_compatibility": CheckDefinition(check_radial_compatibility,
                                            ("contract", "radial_field", "radial_contraction", "tensor_contract")),
    "radial_kernel": CheckDefinition(check_radial_kernel, ("radial_kernel", "kernel_basis")),
    "phi_homomorphism": CheckDefinition(check_phi_homomorphism, ("tensor_wedge", "tensor_from_covectors")),
    "decomposition": CheckDefinition(check_decomposition,
                                     ("tensor_kernel", "is_decomposable", "plucker_defects", "decompose")),
    "decompose_corank2": CheckDefinition(check_decompose_corank2, ("decompose_corank2",)),
    "fibration_decomposition": CheckDefinition(check_fibration, ("fibration_decomposition",)),
    "foliation_degree": CheckDefinition(check_foliation_degree, ("foliation_degree",)),
    "degree_by_restriction": CheckDefinition(check_degree_by_restriction, ("degree_by_restriction", "pullback_linear")),
    "restriction": CheckDefinition(check_restriction, ("restriction_preserves_decomposability", "pullback_spec", "compose")),
    "integrability_p2": CheckDefinition(check_integrability, ("integrability_p2",)),
    "first_integral": CheckDefinition(check_first_integral, ("first_integral",)),
    "radial_volume_form": CheckDefinition(check_radial_volume_form, ("radial_volume_form",)),
    "line_singularities": CheckDefinition(check_line_singularities, ("line_singularity_count", "restrict_to_line", "uni_gcd")),
    "plane_singularities": CheckDefinition(check_plane_singularities,
                                           ("plane_singularity_count", "sylvester_resultant", "solve_homogeneous")),
    "divisor_audit": CheckDefinition(check_divisor_audit, ("divisor_singularity_audit",)),
    "residues": CheckDefinition(check_residues, ("recover_residues", "find_base_point", "build_cycle",
                                                 "validate_cycle", "torus_residue", "evaluate_many",
                                                 "format_scalar")),
    "kupka": CheckDefinition(check_kupka, ("kupka_classify", "dehomogenize", "rotational", "evaluate")),
    "perturbation_family": CheckDefinition(check_perturbation_family,
                                           ("perturbation_family", "kupka_eigenvalue_system",
                                            "normal_type_eigenvalues", "tau_is_generic", "kupka_transversality",
                                            "poincare_domain_check", "nonresonance_check")),
}


def covered_operations() -> set:
    covered = {"parse_scalar"}
    for definition in CHECKS.values():
        covered.update(definition.covers)
    return covered


def parse_scenario(source: Union[str, Dict[str, Any]]) -> Scenario:
    """
    Validate a scenario document (path or already-loaded dict).

    Raises:
        ScenarioError: listing every violation found.
    """
    document = load_json(source) if isinstance(source, str) else source
    try:
        scenario = Scenario.model_validate(document)
    except ValidationError as e:
        raise ScenarioError([f"{'.'.join(str(x) for x in err['loc'])}: {err['msg']}" for err in e.errors()])
    violations: List[str] = []
    if scenario.schema_ != SCENARIO_SCHEMA:
        violations.append(f"schema must be {SCENARIO_SCHEMA!r}, got {scenario.schema_!r}")
    polys: List[MultiPoly] = []
    for j, terms in enumerate(scenario.poles):
        try:
            polys.append(parse_poly(scenario.n + 1, terms, label=f"pole {j + 1}"))
        except ValueError as e:
            violations.append(str(e))
    for check in scenario.checks:
        if check.name not in CHECKS:
            violations.append(f"unknown check {check.name!r}")
    for key in scenario.tolerances:
        if key not in DEFAULT_TOLERANCES:
            violations.append(f"unknown tolerance {key!r}")
    try:
        tensor = parse_tensor(len(scenario.poles), scenario.tensor.p, scenario.tensor.entries)
    except ValueError as e:
        violations.append(str(e))
        tensor = None
    if not violations:
        try:
            _build(scenario, polys, tensor)
        except (ValueError, ValidationError) as e:
            violations.extend(_messages(e))
    if violations:
        raise ScenarioError(violations)
    return scenario


def _messages(error: Exception) -> List[str]:
    if isinstance(error, ValidationError):
        return [err["msg"] for err in error.errors()]
    return [str(error)]


def _build(scenario: Scenario, polys, tensor) -> LogFoliationSpec:
    poles = PoleSystem(n=scenario.n, polys=polys)
    return LogFoliationSpec(poles=poles, tensor=tensor, projective=scenario.projective)


def build_spec(scenario: Scenario) -> LogFoliationSpec:
    polys = [parse_poly(scenario.n + 1, terms, label=f"pole {j + 1}") for j, terms in enumerate(scenario.poles)]
    tensor = parse_tensor(len(polys), scenario.tensor.p, scenario.tensor.entries)
    return _build(scenario, polys, tensor)


def _run_check(ctx: RunContext, check: CheckSpec) -> CheckResult:
    started = datetime.now()
    try:
        passed, counts, witnesses = CHECKS[check.name].fn(ctx, check.params)
        result = CheckResult(name=check.name, passed=bool(passed),
                             counts=custom_encoder(counts), witnesses=custom_encoder(witnesses))
    except Exception as e:
        logger.error(f"[RUN] check {check.name} raised")
        logger.error(traceback.format_exc())
        result = CheckResult(name=check.name, passed=False, error=str(e), error_type=type(e).__name__)
    result.seconds = (datetime.now() - started).total_seconds()
    logger.info(f"[RUN] {check.name}: {'passed' if result.passed else 'FAILED'} in {result.seconds:.2f}s")
    return result


def run(scenario: Scenario, seed: Optional[int] = None) -> Report:
    seed = seed if seed is not None else (scenario.seed if scenario.seed is not None else LOGFOL_SEED)
    tolerances = {**DEFAULT_TOLERANCES, **scenario.tolerances}
    spec = build_spec(scenario)
    ctx = RunContext(spec, seed, tolerances)
    if env.LOGFOL_DEBUG_CHECKS:
        if not radial_compatibility(spec, ctx.form):
            raise DecompositionInconsistency("contraction with R disagrees with the radially contracted tensor")
        logger.info(f"[RUN] debug cross-checks on; expanded form has {len(ctx.form.coefficients)} coefficients")
    with ThreadPoolExecutor(max_workers=LOGFOL_THREADS) as executor:
        results = list(executor.map(lambda c: _run_check(ctx, c), scenario.checks))
    order = sorted(range(len(results)), key=lambda k: (results[k].name, k))
    checks = [results[k] for k in order]
    return Report(scenario=scenario.name, seed=seed, tolerances=tolerances,
                  checks=checks, passed=all(c.passed for c in checks))


def report_document(report: Report) -> Dict[str, Any]:
    return custom_encoder(report)
