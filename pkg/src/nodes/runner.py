import logging
import warnings
from typing import Callable

from ..errors import TruncationWarning
from ..state import ExperimentConfig, LabState, Report

logger = logging.getLogger(__name__)


def run_experiment(
    state: LabState,
    experiment_id: str,
    title: str,
    build: Callable[[ExperimentConfig], Report],
) -> dict:
    """
    Run one experiment inside a graph node

    This helper:
    1. Skips experiments the state did not select
    2. Runs `build` while recording TruncationWarnings
    3. Stores the largest shell mass in the report diagnostics
    4. Logs every asserted row with its verdict
    5. Returns the state update (reports, status, errors)

    Errors never propagate into the graph: they are appended to state.errors.
    """
    if not state.wants(experiment_id):
        return {"status": f"{experiment_id}_skipped"}

    logger.info("=" * 60)
    logger.info(title)
    logger.info("=" * 60)

    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            report = build(state.config)

        masses = [w.message.shell_mass for w in caught if isinstance(w.message, TruncationWarning)]
        if masses:
            report.diagnostics["truncation_shell_mass"] = max(masses)
            logger.warning("⚠️ %d truncation warning(s), largest shell mass %.3e", len(masses), max(masses))

        for row in report.rows:
            if row.asserted:
                mark = "✓" if row.passed else "❌"
                logger.info("  %s %s = %s (%s %s) %s", mark, row.name, row.value, row.comparison, row.tolerance, row.note)
        if not report.acceptance_resolution:
            logger.warning("⚠️ below acceptance resolution: assertions are advisory")

        status = "passed" if report.passed else "failed"
        logger.info("%s %s: %s", "✅" if report.passed else "❌", experiment_id, status)
        return {"reports": state.reports + [report], "status": f"{experiment_id}_{status}"}

    except Exception as e:
        logger.error("❌ %s raised: %s", experiment_id, e, exc_info=logger.isEnabledFor(logging.DEBUG))
        return {
            "status": f"{experiment_id}_error",
            "errors": state.errors + [f"{experiment_id}: {e}"],
        }
