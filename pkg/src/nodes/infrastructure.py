import logging
import math

import numpy as np

from ..state import ExperimentConfig, LabState, Report, ReportRow
from ..tools.families import make_family
from ..tools.grid_fourier import GridSpec, fourier_transform, lp_norm
from ..tools.report_io import dumps
from ..tools.sphere_quadrature import circle_rule, harmonic_table, sphere_measure, sphere_rule
from .runner import run_experiment

logger = logging.getLogger(__name__)

HARMONIC_DEGREE = 15


def _determinism_run(seed: int) -> bytes:
    """Small 2-D ratio sweep serialized to bytes"""
    from .maximal_sweep import ratio_sweep

    spec = GridSpec(d=2, L=16.0, n=32)
    family = make_family("random_bumps", {"count": 2}, seed, spec=spec)
    report = ratio_sweep("maximal", family, "4/3", "2", circle_rule(32), experiment_id="determinism_check")
    return dumps(report)


def infrastructure_report(config: ExperimentConfig) -> Report:
    """
    Infrastructure checks

    Quadrature exactness for harmonics up to degree 15, total measures,
    the Plancherel constant, transform round trip, byte-identical reports.
    """
    d = config.dimension
    report = Report(
        experiment_id="infrastructure",
        config=config.model_dump(include={"dimension", "grid_half_width", "grid_n", "rule_polar",
                                          "rule_azimuthal", "circle_nodes", "seed"}),
    )

    sphere = sphere_rule(config.rule_polar, config.rule_azimuthal)
    residuals = harmonic_table(sphere, HARMONIC_DEGREE)
    report.add(ReportRow.check("sphere_harmonics_to_degree_15", max(residuals), 1e-9))
    report.add(ReportRow.check("sphere_total_measure_error", abs(sphere.total_measure - 4.0 * math.pi), 1e-10))
    report.add(ReportRow.info("sphere_rule_exactness", float(sphere.exactness)))

    circle = circle_rule(config.circle_nodes)
    report.add(ReportRow.check("circle_harmonics_to_degree_15", max(harmonic_table(circle, HARMONIC_DEGREE)), 1e-9))
    report.add(ReportRow.check("circle_total_measure_error", abs(circle.total_measure - sphere_measure(2)), 1e-10))

    spec = GridSpec(d=d, L=16.0, n=64)
    f = make_family("random_bumps", {"count": 1}, config.seed, spec=spec).members[0]
    F = fourier_transform(f)
    plancherel = (lp_norm(F, 2) / lp_norm(f, 2)) ** 2
    report.add(ReportRow.check("plancherel_constant_rel_error",
                               abs(plancherel / (2.0 * math.pi) ** d - 1.0), 1e-8))

    back = fourier_transform(F, "inverse")
    round_trip = float(np.max(np.abs(back.values - f.values)) / np.max(np.abs(f.values)))
    report.add(ReportRow.check("inverse_forward_rel_error", round_trip, 1e-10))

    first, second = _determinism_run(config.seed), _determinism_run(config.seed)
    report.add(ReportRow.check("report_bytes_differ", float(first != second), 0.0, "=="))
    logger.info("  ✓ determinism run: %d bytes", len(first))
    return report


def infrastructure_node(state: LabState) -> dict:
    """
    Node 3: Infrastructure

    This node checks the quadrature rules, the Fourier normalization and report
    determinism.
    """
    return run_experiment(state, "infrastructure", "🧱 NODE 3: INFRASTRUCTURE", infrastructure_report)
