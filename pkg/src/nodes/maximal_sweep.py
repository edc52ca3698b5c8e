import logging
from typing import Optional

import numpy as np

from ..errors import ExponentRangeError, LabError
from ..state import ExperimentConfig, LabState, Report, ReportRow
from ..tools.exponent_algebra import Rational, in_paper_range, in_stein_tomas_range, young_chain
from ..tools.families import Family, make_family
from ..tools.grid_fourier import GridFn, GridSpec, ScaleLadder, lp_norm
from ..tools.restriction_ops import (
    ladder_jump,
    maximal_restrict,
    positive_maximal,
    restrict,
    smoothed_slices,
)
from ..tools.sphere_quadrature import SphereFn, SphereRule, default_rule, lq_norm_sigma
from .runner import run_experiment

logger = logging.getLogger(__name__)

OPERATORS = ("maximal", "positive_maximal", "restrict")
SUBLADDER_SIZE = 3


def default_ladder(operator: str, spec: GridSpec) -> ScaleLadder:
    """Half-dyadic ladder on the x grid, or on the frequency grid for positive_maximal (capped at 2)"""
    if operator == "positive_maximal":
        dual = spec.dual()
        return ScaleLadder.half_dyadic(dual.spacing, min(dual.half_width / 2.0, 2.0))
    return ScaleLadder.for_grid(spec)


def operator_in_range(operator: str, d: int, p, q) -> bool:
    """Whether (p, q) lies in the proven range of the operator"""
    if operator == "restrict":
        return in_stein_tomas_range(d, p, q).in_range
    verdict = in_paper_range(d, p, q).in_range
    if operator == "positive_maximal" and verdict:
        try:
            young_chain(p)
        except ExponentRangeError:
            return False
    return verdict


def ratio_sweep(
    operator: str,
    family: Family,
    p,
    q,
    rule: SphereRule,
    ladder: Optional[ScaleLadder] = None,
    divergence_factor: float = 1.2,
    experiment_id: str = "sweep",
) -> Report:
    """
    Lower-bound sweep of ||op f||_{L^q(sigma)} / ||f||_{L^p} over a family

    Rows hold one ratio per family member; when (p, q) is in range the ratio at
    the finest member must not exceed divergence_factor times the ratio at the
    second finest member.
    """
    if operator not in OPERATORS:
        raise LabError(f"unknown operator '{operator}', expected one of {', '.join(OPERATORS)}")
    p, q = Rational.coerce(p), Rational.coerce(q)
    in_range = operator_in_range(operator, rule.d, p, q)
    report = Report(
        experiment_id=experiment_id,
        config={"operator": operator, "family": family.name, "p": str(p), "q": str(q),
                "parameters": list(family.parameters)},
        exploratory=not in_range,
    )

    ratios = []
    jumps = []
    for parameter, f in family:
        if not isinstance(f, GridFn):
            raise LabError("ratio sweeps need grid functions")
        denominator = lp_norm(f, p)
        if denominator == 0.0:
            report.diagnostics.setdefault("skipped_zero_inputs", []).append(parameter)
            continue
        member_ladder = ladder or default_ladder(operator, f.spec)
        if operator == "maximal":
            slices = smoothed_slices(f, rule, member_ladder)
            image = SphereFn(rule=rule, values=np.max(np.abs(slices), axis=0))
            jumps.append(ladder_jump(slices))
        elif operator == "positive_maximal":
            image = positive_maximal(f, rule, member_ladder)
        else:
            image = restrict(f, rule)
        ratio = lq_norm_sigma(image, q) / denominator
        ratios.append(ratio)
        report.add(ReportRow.info(f"ratio[{parameter:g}]", ratio))
        logger.info("  ✓ %s member %g: ratio %.6g", family.name, parameter, ratio)

    if ratios:
        report.add(ReportRow.info("ratio_max", max(ratios)))
        report.add(ReportRow.info("ratio_median", float(np.median(ratios))))
        report.add(ReportRow.check("ratios_finite", float(np.all(np.isfinite(ratios))), 1.0, "==",
                                   asserted=in_range))
    if jumps:
        report.diagnostics["ladder_jump"] = max(jumps)

    if not in_range:
        report.diagnostics["note"] = "exponents outside the proven range: exploratory, no assertions"
    elif len(ratios) >= 2:
        growth = ratios[-1] / ratios[-2] if ratios[-2] > 0 else float("inf")
        report.add(ReportRow.check("finest_ratio_growth", growth, divergence_factor))
    return report


def sweep_report(config: ExperimentConfig) -> Report:
    """Ratio sweep with the operator, family and exponents named in the config"""
    spec = GridSpec(d=config.dimension, L=config.grid_half_width, n=config.grid_n)
    rule = default_rule(config.dimension, config.rule_polar, config.rule_azimuthal, config.circle_nodes)
    family = make_family(
        config.family,
        {"scales": config.family_scales, "count": config.family_count},
        config.seed,
        spec=spec,
    )
    report = ratio_sweep(config.operator, family, config.p, config.q, rule,
                         divergence_factor=config.sweep_divergence_factor, experiment_id="sweep")
    return report.mark_resolution(config.grid_n >= config.acceptance_n)


def maximal_report(config: ExperimentConfig) -> Report:
    """
    Maximal operator acceptance run

    1. Gaussian dilation sweep at (p, q) from the config (default (4/3, 2))
    2. Ladder-subset monotonicity: M over the 3 largest scales never exceeds M over the full ladder
    """
    spec = GridSpec(d=config.dimension, L=config.grid_half_width, n=config.grid_n)
    rule = default_rule(config.dimension, config.rule_polar, config.rule_azimuthal, config.circle_nodes)
    family = make_family("gaussian", {"scales": config.family_scales}, config.seed, spec=spec)
    report = ratio_sweep("maximal", family, config.p, config.q, rule,
                         divergence_factor=config.sweep_divergence_factor, experiment_id="maximal")

    ladder = ScaleLadder.for_grid(spec)
    f = family.members[0]
    full = maximal_restrict(f, rule, ladder).values.real
    sub = maximal_restrict(f, rule, ladder.top(SUBLADDER_SIZE)).values.real
    violations = int(np.count_nonzero(sub > full))
    report.add(ReportRow.check("subladder_exceeds_full_count", float(violations), 0.0, "=="))
    report.diagnostics["ladder"] = list(ladder.scales)
    return report.mark_resolution(config.grid_n >= config.acceptance_n)


def maximal_sweep_node(state: LabState) -> dict:
    """
    Node 4: Maximal operator sweep

    This node:
    1. Sweeps the Gaussian dilation family through the maximal operator
    2. Asserts the no-divergence plateau when (p, q) is in range
    3. Checks ladder-subset monotonicity
    """
    return run_experiment(state, "maximal", "📈 NODE 4: MAXIMAL OPERATOR SWEEP", maximal_report)


def sweep_node(state: LabState) -> dict:
    """Configurable ratio sweep (operator, family, p, q from the config)"""
    return run_experiment(state, "sweep", "📊 RATIO SWEEP", sweep_report)
