import logging
from typing import Optional

import numpy as np

from ..state import ExperimentConfig, LabState, Report, ReportRow
from ..tools.families import gaussian
from ..tools.grid_fourier import GridFn, GridSpec, ScaleLadder, ball_sums, fourier_transform
from ..tools.restriction_ops import positive_maximal, restrict
from ..tools.sphere_quadrature import SphereRule, default_rule
from .runner import run_experiment

logger = logging.getLogger(__name__)

FIT_SCALES = 4
APPROXIMANT_WIDTH = 1.1


def lebesgue_experiment(
    f: GridFn,
    rule: SphereRule,
    ladder: ScaleLadder,
    sample_nodes: int = 32,
    seed: int = 0,
    slope_min: float = 0.9,
    limit_tolerance: float = 0.01,
    approximant: Optional[GridFn] = None,
    prefix: str = "",
) -> Report:
    """
    Check that sampled sphere points are Lebesgue points of f^

    For each sampled node omega and ladder scale eps:
        osc(omega, eps) = eps^-d sum_{|xi_j - omega| <= eps} |f^(xi_j) - R f(omega)| dxi^d
    The decay slope of max_omega osc must be >= slope_min, and the eps -> 0
    intercept of the ball means (fit a + b eps^2 on the finest scales) must
    match R f(omega) to limit_tolerance. With an approximant phi the report
    also checks osc_f <= M+(f - phi) + osc_phi + |R(f - phi)| on every ladder scale,
    with M+ the positive maximal operator over the whole ladder.
    """
    F = fourier_transform(f)
    ladder.check_bounds(F.spec)
    d = f.spec.d
    report = Report(
        experiment_id="lebesgue",
        config={"ladder": list(ladder.scales), "sample_nodes": sample_nodes, "seed": seed},
    )

    rng = np.random.default_rng(seed)
    count = min(sample_nodes, rule.size)
    sample = np.sort(rng.choice(rule.size, size=count, replace=False))
    centers = rule.nodes[sample]
    radii = np.asarray(ladder.scales)
    restricted = restrict(f, rule).values[sample]

    sums, counts = ball_sums(F, centers, radii, offsets=restricted)
    osc = sums / radii[:, None] ** d
    worst = osc.max(axis=1)
    for eps, value in zip(radii, worst):
        report.add(ReportRow.info(f"{prefix}osc_max[eps={eps:.6g}]", float(value)))

    if np.all(worst == 0.0):
        report.add(ReportRow.check(f"{prefix}osc_decay_slope", None, slope_min, ">=",
                                   note="oscillation vanishes identically"))
    else:
        slope = float(np.polyfit(np.log(radii), np.log(worst), 1)[0])
        report.add(ReportRow.check(f"{prefix}osc_decay_slope", slope, slope_min, ">="))

    # eps -> 0 intercept of the ball means
    means, _ = ball_sums(F, centers, radii, absolute=False)
    cell = F.spec.cell_volume
    means = means / np.maximum(counts, 1) / cell
    fine = np.argsort(radii)[:max(2, min(FIT_SCALES, len(radii)))]
    design = np.stack([np.ones(len(fine)), radii[fine] ** 2], axis=1)
    intercept = np.linalg.lstsq(design, means[fine], rcond=None)[0][0]
    scale = np.abs(restricted)
    top = float(scale.max())
    if top == 0.0:
        limit_error = float(np.max(np.abs(intercept)))
        report.add(ReportRow.check(f"{prefix}limit_rel_error", limit_error, limit_tolerance,
                                   note="zero input: absolute error"))
    else:
        resolved = scale > 1e-6 * top
        limit_error = float(np.max(np.abs(intercept[resolved] - restricted[resolved]) / scale[resolved]))
        report.add(ReportRow.check(f"{prefix}limit_rel_error", limit_error, limit_tolerance))

    if approximant is not None:
        g = f - approximant
        phi_restricted = restrict(approximant, rule).values[sample]
        g_maximal = positive_maximal(g, rule, ladder).values[sample]
        phi_osc, _ = ball_sums(fourier_transform(approximant), centers, radii, offsets=phi_restricted)
        constant_term = counts * cell * np.abs(restricted - phi_restricted)[None, :]
        rhs = g_maximal[None, :] + (phi_osc + constant_term) / radii[:, None] ** d
        excess = float(np.max(osc - rhs) / max(float(np.max(rhs)), 1e-300))
        report.add(ReportRow.check(f"{prefix}approximation_bound_excess", excess, 1e-9))
        report.add(ReportRow.info(f"{prefix}approximation_maximal", float(np.max(g_maximal))))

    report.diagnostics[f"{prefix}sampled_nodes"] = sample.tolist()
    return report


def lebesgue_report(config: ExperimentConfig) -> Report:
    """Gaussian and modulated Gaussian runs merged into one report"""
    d = config.dimension
    spec = GridSpec(d=d, L=config.lebesgue_half_width, n=config.lebesgue_n)
    rule = default_rule(d, config.rule_polar, config.rule_azimuthal, config.circle_nodes)
    ladder = ScaleLadder(scales=tuple(sorted(config.lebesgue_scales, reverse=True)))
    report = Report(
        experiment_id="lebesgue",
        config=config.model_dump(include={"dimension", "lebesgue_half_width", "lebesgue_n", "lebesgue_nodes",
                                          "lebesgue_scales", "lebesgue_modulation", "lebesgue_slope_min",
                                          "lebesgue_limit_tolerance", "rule_polar", "rule_azimuthal",
                                          "circle_nodes", "seed"}),
    )
    inputs = {
        "gaussian": (gaussian(spec, 1.0), gaussian(spec, APPROXIMANT_WIDTH)),
        "modulated": (
            gaussian(spec, 1.0, frequency=config.lebesgue_modulation),
            gaussian(spec, APPROXIMANT_WIDTH, frequency=config.lebesgue_modulation),
        ),
    }
    for name, (f, phi) in inputs.items():
        part = lebesgue_experiment(
            f, rule, ladder,
            sample_nodes=config.lebesgue_nodes,
            seed=config.seed,
            slope_min=config.lebesgue_slope_min,
            limit_tolerance=config.lebesgue_limit_tolerance,
            approximant=phi,
            prefix=f"{name}.",
        )
        report.rows.extend(part.rows)
        report.diagnostics.update(part.diagnostics)
        logger.info("  ✓ %s input done", name)
    return report.mark_resolution(config.lebesgue_n >= config.acceptance_n)


def lebesgue_node(state: LabState) -> dict:
    """
    Node 6: Lebesgue points

    This node:
    1. Computes ball oscillations of f^ around 32 seeded sphere nodes
    2. Fits their decay slope and the eps -> 0 limit of the ball means
    3. Checks the approximation bound against M+(f - phi)
    """
    return run_experiment(state, "lebesgue", "🎯 NODE 6: LEBESGUE POINTS", lebesgue_report)
