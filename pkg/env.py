import os
from dotenv import load_dotenv

load_dotenv()

LOGFOL_THREADS = int(os.getenv("LOGFOL_THREADS", "4"))
LOGFOL_SEED = int(os.getenv("LOGFOL_SEED", "20240611"))
LOGFOL_LOG_LEVEL = os.getenv("LOGFOL_LOG_LEVEL", "INFO")
LOGFOL_DEBUG_CHECKS = os.getenv("LOGFOL_DEBUG_CHECKS", "false").lower() in ("1", "true", "yes")

SCENARIO_SCHEMA = "logfol.scenario/1"
REPORT_SCHEMA = "logfol.report/1"

# numeric knobs; scenarios may override any of them by key
DEFAULT_TOLERANCES = {
    "newton": 1e-12,
    "newton_iterations": 50,
    "newton_starts": 100,
    "off_divisor_reject": 1e-3,
    "winding": 1e-6,
    "dedup": 1e-6,
    "audit_residual": 1e-8,
    "residue_accept": 1e-8,
    "quadrature_agreement": 1e-6,
    "kupka_zero": 1e-9,
    "finite_difference_step": 1e-6,
    "poincare_gap": 1e-9,
    "nonresonance": 1e-9,
    "audit_starts": 2000,
    "cycle_halvings": 20,
    "cycle_nodes": 64,
}
