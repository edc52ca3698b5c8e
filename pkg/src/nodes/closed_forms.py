import logging
import math

import numpy as np
from scipy.special import j0

from ..state import ExperimentConfig, LabState, Report, ReportRow
from ..tools.families import gaussian
from ..tools.grid_fourier import GridSpec
from ..tools.restriction_ops import extend, restrict
from ..tools.sphere_quadrature import SphereFn, circle_rule, default_rule
from .runner import run_experiment

logger = logging.getLogger(__name__)

BESSEL_ZERO = 2.404826
EXTENSION_RADIUS = 10.0


def _ball_points(d: int, count: int, radius: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(count, d))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=(count, 1))
    return np.vstack([np.zeros((1, d)), directions * radii])


def closed_form_report(config: ExperimentConfig) -> Report:
    """
    Restriction and extension against closed forms

    1. R[exp(-|x|^2/2)] = (2 pi)^{d/2} e^{-1/2} on the sphere
    2. E[1](x) = 4 pi sin|x| / |x| for d = 3 on |x| <= 10
    3. E[1](x) = 2 pi J_0(|x|) for d = 2, which vanishes at |x| = 2.404826
    """
    d = config.dimension
    spec = GridSpec(d=d, L=config.grid_half_width, n=config.grid_n)
    report = Report(
        experiment_id="extension",
        config=config.model_dump(include={"dimension", "grid_half_width", "grid_n", "rule_polar",
                                          "rule_azimuthal", "circle_nodes", "seed"}),
        acceptance_resolution=config.grid_n >= config.acceptance_n,
    )

    rule = default_rule(d, config.rule_polar, config.rule_azimuthal, config.circle_nodes)
    exact = (2.0 * math.pi) ** (d / 2.0) * math.exp(-0.5)
    restricted = restrict(gaussian(spec, 1.0), rule)
    rel = float(np.max(np.abs(restricted.values - exact)) / exact)
    report.add(ReportRow.check("restrict_gaussian_rel_error", rel, 1e-4))
    logger.info("  ✓ restriction of the Gaussian: rel. error %.3e", rel)

    sphere = default_rule(3, config.rule_polar, config.rule_azimuthal)
    points = _ball_points(3, 200, EXTENSION_RADIUS, config.seed)
    r = np.linalg.norm(points, axis=1)
    extended = extend(SphereFn(rule=sphere, values=np.ones(sphere.size)), points)
    err = float(np.max(np.abs(extended - 4.0 * math.pi * np.sinc(r / math.pi))))
    report.add(ReportRow.check("extend_one_3d_abs_error", err, 1e-6))

    circle = circle_rule(config.circle_nodes)
    one = SphereFn(rule=circle, values=np.ones(circle.size))
    points_2d = _ball_points(2, 200, EXTENSION_RADIUS, config.seed)
    err_2d = float(np.max(np.abs(extend(one, points_2d) - 2.0 * math.pi * j0(np.linalg.norm(points_2d, axis=1)))))
    report.add(ReportRow.check("extend_one_2d_abs_error", err_2d, 1e-6))

    zero = extend(one, np.array([[BESSEL_ZERO, 0.0], [0.0, BESSEL_ZERO]]))
    report.add(ReportRow.check("extend_one_2d_at_first_zero", float(np.max(np.abs(zero))), 1e-5))

    report.diagnostics["rule_size"] = rule.size
    report.diagnostics["rule_exactness"] = rule.exactness
    return report


def closed_forms_node(state: LabState) -> dict:
    """
    Node 2: Closed forms

    This node checks restrict/extend against the Gaussian and constant-function
    closed forms at the configured resolution.
    """
    return run_experiment(state, "extension", "📐 NODE 2: CLOSED FORMS", closed_form_report)
