#!/usr/bin/env python
"""
Write the scenario and report of every builtin example to a directory.

Usage: python scripts/reproduce_examples.py [out_dir] [--seed N]
"""
from datetime import datetime
from pathlib import Path
import argparse
import json
import logging
import os
import sys

# Add the project root to the path to import the services
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
import env
from services.examples_services import BUILTINS, builtin_example
from services.scenarios_services import report_document, run
from util.logs_utils import _log_run_summary

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def reproduce(out_dir: Path, seed: int) -> bool:
    out_dir.mkdir(parents=True, exist_ok=True)
    all_passed = True
    for name in sorted(BUILTINS):
        started = datetime.now()
        scenario = builtin_example(name, seed)
        (out_dir / f"{name}.scenario.json").write_text(json.dumps(scenario.to_document(), indent=2) + "\n")
        report = run(scenario, seed)
        (out_dir / f"{name}.report.json").write_text(json.dumps(report_document(report), indent=2) + "\n")
        _log_run_summary(report, started)
        all_passed = all_passed and report.passed
    return all_passed


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir", nargs="?", default="reports")
    parser.add_argument("--seed", type=int, default=env.LOGFOL_SEED)
    args = parser.parse_args()
    sys.exit(0 if reproduce(Path(args.out_dir), args.seed) else 1)
