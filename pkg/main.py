from datetime import datetime
from pathlib import Path
from typing import List, Optional
import argparse
import json
import logging
import sys
import traceback

import env
from services.examples_services import BUILTINS, builtin_example
from services.foliation_services import degree_by_restriction, foliation_degree
from services.logtensor_services import decompose, plucker_defects
from services.residues_services import recover_residue
from services.scenarios_services import ScenarioError, build_spec, parse_scenario, report_document, run
from util.logs_utils import _log_run_summary
from util.models_utils import custom_encoder
from util.parsing_utils import load_json, parse_index, parse_tensor

logging.basicConfig(
    level=getattr(logging, env.LOGFOL_LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(stream=sys.stdout)
    ],
    force=True,
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


def _emit(document, out: Optional[str]):
    text = json.dumps(document, indent=2, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        print(text)


def _run_scenario(scenario, seed: Optional[int], out: Optional[str]) -> int:
    started = datetime.now()
    report = run(scenario, seed)
    _log_run_summary(report, started)
    _emit(report_document(report), out)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_check(args) -> int:
    scenario = parse_scenario(args.scenario)
    return _run_scenario(scenario, args.seed, args.out)


def cmd_example(args) -> int:
    scenario = builtin_example(args.name, args.seed if args.seed is not None else env.LOGFOL_SEED)
    if args.scenario_out:
        _emit(scenario.to_document(), args.scenario_out)
    return _run_scenario(scenario, args.seed, args.out)


def cmd_decompose(args) -> int:
    document = load_json(args.tensor)
    try:
        tensor = parse_tensor(int(document["r"]), int(document["p"]), document["entries"])
    except (KeyError, TypeError) as e:
        raise ScenarioError([f"tensor document needs r, p and entries: {e}"])
    defects = plucker_defects(tensor)
    if defects:
        _emit({"decomposable": False, "plucker_defects": custom_encoder(defects)}, args.out)
        return EXIT_FAILED
    _emit({"decomposable": True, "decomposition": custom_encoder(decompose(tensor))}, args.out)
    return EXIT_OK


def cmd_residue(args) -> int:
    scenario = parse_scenario(args.scenario)
    spec = build_spec(scenario)
    seed = args.seed if args.seed is not None else (scenario.seed if scenario.seed is not None else env.LOGFOL_SEED)
    tolerances = {**env.DEFAULT_TOLERANCES, **scenario.tolerances}
    row = recover_residue(spec, parse_index(args.index), seed, tolerances)
    _emit(custom_encoder(row), args.out)
    return EXIT_OK if row.accepted else EXIT_FAILED


def cmd_degree(args) -> int:
    scenario = parse_scenario(args.scenario)
    spec = build_spec(scenario)
    seed = args.seed if args.seed is not None else (scenario.seed if scenario.seed is not None else env.LOGFOL_SEED)
    formula = foliation_degree(spec)
    restriction = degree_by_restriction(spec, seed)
    _emit({"formula": formula, "restriction": restriction}, args.out)
    return EXIT_OK if formula == restriction else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logfol", description="Logarithmic foliations: exact checks and numeric residues")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run every check of a scenario file")
    check.add_argument("scenario")
    check.set_defaults(handler=cmd_check)

    example = sub.add_parser("example", help="build and run a builtin example")
    example.add_argument("name", choices=sorted(BUILTINS))
    example.add_argument("--scenario-out", help="also write the generated scenario here")
    example.set_defaults(handler=cmd_example)

    dec = sub.add_parser("decompose", help="decompose a residue tensor document")
    dec.add_argument("tensor")
    dec.set_defaults(handler=cmd_decompose)

    residue = sub.add_parser("residue", help="recover one residue numerically")
    residue.add_argument("scenario")
    residue.add_argument("--index", required=True, help="1-based pole indices, e.g. 1,3")
    residue.set_defaults(handler=cmd_residue)

    degree = sub.add_parser("degree", help="foliation degree by formula and by restriction")
    degree.add_argument("scenario")
    degree.set_defaults(handler=cmd_degree)

    for p in (check, example, dec, residue, degree):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="write JSON here instead of stdout")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ScenarioError as e:
        for violation in e.violations:
            logger.error(f"invalid input: {violation}")
        return EXIT_INVALID
    except ValueError as e:
        logger.error(f"invalid input: {e}")
        logger.debug(traceback.format_exc())
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
