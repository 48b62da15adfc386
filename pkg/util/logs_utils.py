from datetime import datetime
import logging

from models.scenarios import Report

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _log_run_summary(report: Report, run_start_time: datetime):
    """Human-readable digest of a report; the report itself stays JSON."""
    passed = [c for c in report.checks if c.passed]
    failed = [c for c in report.checks if not c.passed]

    logger.info("----- Run Summary -----")
    logger.info("[%s] seed %d", report.scenario, report.seed)
    logger.info("Checks passed: %d/%d", len(passed), len(report.checks))
    for check in report.checks:
        status = "ok" if check.passed else "FAILED"
        logger.info("  %-28s %-7s %.2fs", check.name, status, check.seconds)
    for check in failed:
        if check.error:
            logger.info("  %s: %s: %s", check.name, check.error_type, check.error)
    logger.info("Wall time: %.2fs", (datetime.now() - run_start_time).total_seconds())
    logger.info("-----------------------")
