from typing import Any, Callable, Dict, List
import logging

from env import LOGFOL_SEED, SCENARIO_SCHEMA
from models.scenarios import Scenario
from models.tensors import ResidueTensor
from services.kupka_services import perturbation_family
from services.logtensor_services import is_decomposable, radial_kernel, tensor_from_covectors
from util.exactnum_utils import format_scalar
from util.polyring_utils import MultiPoly
from util.random_utils import make_rng, random_homogeneous, random_integers, random_linear_forms

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MAX_TENSOR_DRAWS = 100

PERTURBATION_TAUS = [
    [["0"], ["0"]],
    [["1/10"], ["1/5"]],
    [["1/3"], ["-1/7"]],
]


def _poly_terms(f: MultiPoly) -> List[List[Any]]:
    return [[list(exp), format_scalar(c)] for exp, c in f.sorted_terms()]


def _tensor_data(t: ResidueTensor) -> Dict[str, Any]:
    return {"p": t.p, "entries": [[[i + 1 for i in idx], format_scalar(v)] for idx, v in t.sorted_entries()]}


def _document(name: str, n: int, polys: List[MultiPoly], tensor: ResidueTensor,
              checks: List[Dict[str, Any]], seed: int) -> Dict[str, Any]:
    return {
        "schema": SCENARIO_SCHEMA,
        "name": name,
        "n": n,
        "projective": True,
        "poles": [_poly_terms(f) for f in polys],
        "tensor": _tensor_data(tensor),
        "checks": checks,
        "seed": seed,
        "tolerances": {},
    }


def _generic_kernel_element(degrees: List[int], r: int, p: int, seed: int) -> ResidueTensor:
    """Random integer combination of the radial kernel basis with no zero entry and no decomposition."""
    basis = radial_kernel(degrees, r, p)
    for draw in range(MAX_TENSOR_DRAWS):
        rng = make_rng(seed, 2, draw)
        weights = random_integers(rng, len(basis), nonzero=True)
        tensor = ResidueTensor(r, p)
        for w, b in zip(weights, basis):
            tensor = tensor + b.scale(w)
        if len(tensor.entries) == len(basis[0].as_vector()) and not is_decomposable(tensor):
            return tensor
    raise ValueError(f"no generic radial tensor found for degrees {degrees} after {MAX_TENSOR_DRAWS} draws")


def p3_planes(seed: int) -> Dict[str, Any]:
    """Six planes in general position in P^3 with a generic non-decomposable residue 2-tensor."""
    polys = random_linear_forms(4, 6, make_rng(seed, 1))
    tensor = _generic_kernel_element([1] * 6, 6, 2, seed)
    checks = [
        {"name": "homogeneity"},
        {"name": "expand_degree"},
        {"name": "is_logarithmic"},
        {"name": "is_closed_log"},
        {"name": "invariant_pole_components"},
        {"name": "radial_compatibility"},
        {"name": "radial_kernel"},
        {"name": "phi_homomorphism"},
        {"name": "decomposition", "params": {"decomposable": False}},
        {"name": "foliation_degree", "params": {"expected": 3}},
        {"name": "degree_by_restriction"},
        {"name": "integrability_p2", "params": {"integrable": True}},
        {"name": "line_singularities", "params": {"expected": 4}},
        {"name": "plane_singularities", "params": {"expected": 13}},
        {"name": "divisor_audit", "params": {"inclusion_exclusion_total": 38, "off_divisor": 2}},
        {"name": "residues"},
        {"name": "radial_volume_form"},
    ]
    return _document("p3-planes", 3, polys, tensor, checks, seed)


def rational_fibration(seed: int) -> Dict[str, Any]:
    """Poles of degrees 1, 2, 3 on P^3; r = p + 1 so the foliation has a rational first integral."""
    rng = make_rng(seed, 1)
    polys = [random_homogeneous(4, d, rng) for d in (1, 2, 3)]
    tensor = radial_kernel([1, 2, 3], 3, 2)[0]
    checks = [
        {"name": "homogeneity"},
        {"name": "expand_degree"},
        {"name": "is_logarithmic"},
        {"name": "is_closed_log"},
        {"name": "invariant_pole_components"},
        {"name": "radial_compatibility"},
        {"name": "radial_kernel"},
        {"name": "decomposition", "params": {"decomposable": True}},
        {"name": "fibration_decomposition"},
        {"name": "first_integral"},
        {"name": "foliation_degree", "params": {"expected": 3}},
        {"name": "degree_by_restriction"},
        {"name": "integrability_p2", "params": {"integrable": True}},
        {"name": "restriction"},
    ]
    return _document("rational-fibration", 3, polys, tensor, checks, seed)


def perturbation_family_example(seed: int) -> Dict[str, Any]:
    """Four hyperplanes in P^4 with the decomposable family θ_τ^2 ∧ θ_τ^3."""
    polys = random_linear_forms(5, 4, make_rng(seed, 1))
    degrees = [1, 1, 1, 1]
    tensor = tensor_from_covectors(perturbation_family(degrees, 4, PERTURBATION_TAUS[2]))
    checks = [
        {"name": "homogeneity"},
        {"name": "expand_degree"},
        {"name": "is_logarithmic"},
        {"name": "is_closed_log"},
        {"name": "invariant_pole_components"},
        {"name": "radial_compatibility"},
        {"name": "decomposition", "params": {"decomposable": True}},
        {"name": "decompose_corank2"},
        {"name": "foliation_degree", "params": {"expected": 1}},
        {"name": "degree_by_restriction"},
        {"name": "integrability_p2", "params": {"integrable": True}},
        {"name": "restriction"},
        {"name": "kupka", "params": {"indices": [1, 2, 3], "expected": "kupka"}},
        {"name": "perturbation_family", "params": {"taus": PERTURBATION_TAUS}},
    ]
    return _document("perturbation-family", 4, polys, tensor, checks, seed)


BUILTINS: Dict[str, Callable[[int], Dict[str, Any]]] = {
    "p3-planes": p3_planes,
    "rational-fibration": rational_fibration,
    "perturbation-family": perturbation_family_example,
}


def builtin_example(name: str, seed: int = LOGFOL_SEED) -> Scenario:
    if name not in BUILTINS:
        raise ValueError(f"unknown example {name!r}; choose one of {sorted(BUILTINS)}")
    logger.info(f"[RUN] building example {name} with seed {seed}")
    return Scenario.model_validate(BUILTINS[name](seed))
