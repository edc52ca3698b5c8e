import logging
import math
from functools import cached_property
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..errors import DegenerateInputError
from ..state import ExperimentConfig, LabState, Report, ReportRow
from ..tools.exponent_algebra import young_chain
from ..tools.families import gaussian, make_family, smooth_sphere_function
from ..tools.grid_fourier import (
    GridFn,
    GridSpec,
    ScaleLadder,
    convolve,
    fourier_transform,
    hl_maximal,
    lp_norm,
    mollifier,
    reflect_conjugate,
)
from ..tools.restriction_ops import (
    ScaleAssignment,
    adjoint_apply,
    autocorrelation,
    bilinear_form,
    domination_ratios,
    extend,
    fourier_of_adjoint,
    grouped_pair_sum,
    holder_constant,
    linearized_apply,
    maximal_restrict,
    positive_maximal,
)
from ..tools.sphere_quadrature import SphereFn, SphereRule, default_rule
from .runner import run_experiment

logger = logging.getLogger(__name__)

PLANCHEREL_HALF_WIDTH = 8.0
PLANCHEREL_N = 64
DEGENERATE = "degenerate: zero input"

Outcome = Tuple[Optional[float], str]


def _relative(lhs: complex, rhs: complex) -> Outcome:
    scale = max(abs(lhs), abs(rhs))
    if scale < 1e-300:
        return 0.0, DEGENERATE
    return float(abs(lhs - rhs) / scale), ""


def _spread(values: List[float]) -> float:
    """Largest relative deviation from the median"""
    median = float(np.median(values))
    return float(np.max(np.abs(np.asarray(values) / median - 1.0)))


class IdentityInputs:
    """Seeded inputs of the identity suite, built lazily and shared between checks"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.d = config.dimension
        self.zero = config.zero_inputs
        self.spec = GridSpec(d=self.d, L=config.identity_half_width, n=config.identity_n)
        self.rule = default_rule(self.d, config.rule_polar, config.rule_azimuthal, config.circle_nodes)
        self.assign = ScaleAssignment.random(self.rule, config.identity_scales, config.seed)

    @cached_property
    def f(self) -> GridFn:
        if self.zero:
            return GridFn.zeros(self.spec)
        return make_family("random_bumps", {"count": 1}, self.config.seed, spec=self.spec).members[0]

    @cached_property
    def g(self) -> SphereFn:
        g = smooth_sphere_function(self.rule, self.config.seed)
        return g.with_values(np.zeros(self.rule.size)) if self.zero else g

    def h(self, spec: GridSpec) -> GridFn:
        """Gaussian test function on a frequency grid, centre and modulation seeded"""
        if self.zero:
            return GridFn.zeros(spec)
        rng = np.random.default_rng(self.config.seed + 1)
        center = rng.uniform(-0.5, 0.5, size=self.d) / math.sqrt(self.d)
        frequency = rng.uniform(-0.5, 0.5, size=self.d) / math.sqrt(self.d)
        return gaussian(spec, 1.0, center=center, frequency=frequency)

    @cached_property
    def adjoint(self) -> GridFn:
        return adjoint_apply(self.g, self.assign, self.spec)

    @cached_property
    def adjoint_hat(self) -> GridFn:
        return fourier_transform(self.adjoint)

    @cached_property
    def fubini_kernel_spec(self) -> GridSpec:
        return GridSpec.for_frequency_box(self.d, self.config.fubini_kernel_half_width, self.config.fubini_kernel_n)

    @cached_property
    def fubini_lhs(self) -> complex:
        G = self.adjoint_hat
        GG = convolve(G, G)
        h = self.h(G.spec)
        return complex(np.sum(GG.values * np.conj(h.values)) * G.spec.cell_volume)


# ==================== Checks ====================

def check_adjoint(inputs: IdentityInputs) -> Outcome:
    """<A f, g>_sigma against <f, A* g>_grid"""
    Af = linearized_apply(inputs.f, inputs.assign)
    lhs = np.sum(inputs.rule.weights * Af.values * np.conj(inputs.g.values))
    rhs = np.sum(inputs.f.values * np.conj(inputs.adjoint.values)) * inputs.spec.cell_volume
    return _relative(lhs, rhs)


def check_fourier_adjoint(inputs: IdentityInputs) -> Outcome:
    """FT(A* g) against (2 pi)^d times the closed form"""
    closed = fourier_of_adjoint(inputs.g, inputs.assign, inputs.spec).values * (2.0 * math.pi) ** inputs.d
    scale = float(np.max(np.abs(closed)))
    if scale == 0.0:
        return float(np.max(np.abs(inputs.adjoint_hat.values))), DEGENERATE
    return float(np.max(np.abs(inputs.adjoint_hat.values - closed)) / scale), ""


def check_fubini(inputs: IdentityInputs) -> Outcome:
    """<G * G, h> on the grid against the double sphere sum of h~ * chi_eps * chi_eps'"""
    spec = inputs.fubini_kernel_spec
    h_tilde = reflect_conjugate(inputs.h(spec))

    def kernel_for(eps_a: float, eps_b: float) -> GridFn:
        blurred = convolve(h_tilde, mollifier(spec, eps_a), check=False)
        return convolve(blurred, mollifier(spec, eps_b), check=False)

    rhs = (2.0 * math.pi) ** (2 * inputs.d) * grouped_pair_sum(inputs.g, inputs.assign, kernel_for)
    return _relative(inputs.fubini_lhs, rhs)


def check_plancherel(inputs: IdentityInputs) -> Outcome:
    """int |E g|^2 conj(h^) against (2 pi)^d times the bilinear form with kernel conj(h)"""
    d, config = inputs.d, inputs.config
    px = GridSpec(d=d, L=PLANCHEREL_HALF_WIDTH, n=PLANCHEREL_N)
    E = extend(inputs.g, px)
    h_hat = fourier_transform(inputs.h(px.dual()))
    lhs = np.sum(np.abs(E.values) ** 2 * np.conj(h_hat.values)) * px.cell_volume

    kernel_spec = GridSpec.for_frequency_box(d, config.kernel_half_width, config.kernel_n)
    kernel = inputs.h(kernel_spec)
    kernel = kernel.with_values(np.conj(kernel.values))
    g = inputs.g
    rhs = (2.0 * math.pi) ** d * bilinear_form(g.with_values(np.conj(g.values)), g, kernel)
    return _relative(lhs, rhs)


def check_autocorrelation(inputs: IdentityInputs) -> Outcome:
    """FT(f * f~) against |FT f|^2"""
    F = fourier_transform(inputs.f)
    H = fourier_transform(autocorrelation(inputs.f))
    power = np.abs(F.values) ** 2
    scale = float(np.max(power))
    if scale == 0.0:
        return float(np.max(np.abs(H.values))), DEGENERATE
    return float(np.max(np.abs(H.values - power)) / scale), ""


def check_young(inputs: IdentityInputs) -> Outcome:
    """||f * f~||_s / ||f||_p^2 with 1 + 1/s = 2/p"""
    chain = young_chain(inputs.config.young_p)
    lhs = lp_norm(autocorrelation(inputs.f), chain.s)
    rhs = lp_norm(inputs.f, chain.p) ** 2
    if rhs == 0.0:
        return 0.0, DEGENERATE
    return lhs / rhs, ""


def domination_outcomes(config: ExperimentConfig) -> Tuple[float, float]:
    """(largest ratio, spread across scale pairs) of the domination check"""
    spec = GridSpec(d=config.dimension, L=config.domination_half_width, n=config.domination_n)
    h = GridFn.zeros(spec) if config.zero_inputs else gaussian(spec, config.domination_width)
    scales = sorted(config.domination_scales, reverse=True)
    pairs = [(a, b) for i, a in enumerate(scales) for b in scales[i:]]
    ratios = domination_ratios(h, pairs, ScaleLadder.for_grid(spec))
    return max(ratios), _spread(ratios)


def check_domination_pairing(inputs: IdentityInputs) -> Outcome:
    """|<G * G, h>| against the same double sum with |g| and M(M h~) in place of the kernels"""
    spec = inputs.fubini_kernel_spec
    h_tilde = reflect_conjugate(inputs.h(spec))
    if float(np.max(np.abs(h_tilde.values))) == 0.0:
        raise DegenerateInputError("domination pairing of the zero function")
    radii = ScaleLadder.half_dyadic(2.0 * spec.spacing, min(2.0, spec.half_width / 2.0))
    m2 = hl_maximal(hl_maximal(h_tilde, radii), radii)
    g_abs = inputs.g.with_values(np.abs(inputs.g.values))
    bound = (2.0 * math.pi) ** (2 * inputs.d) * abs(bilinear_form(g_abs, g_abs, m2, at="sum"))
    if bound == 0.0:
        return 0.0, DEGENERATE
    return abs(inputs.fubini_lhs) / bound, ""


def holder_outcomes(config: ExperimentConfig, rule: SphereRule) -> Tuple[Optional[float], int, Optional[float]]:
    """
    Empirical Hölder constants over seeded functions

    Returns:
        (median constant, pointwise violations of the theoretical bound, spread)
    """
    spec = GridSpec(d=config.dimension, L=config.holder_half_width, n=config.holder_n)
    ladder = ScaleLadder(scales=tuple(sorted(config.holder_scales, reverse=True)))
    theory = holder_constant(config.dimension)
    family = make_family("holder", {"count": config.holder_functions}, config.seed, spec=spec)
    constants, violations = [], 0
    for _, f in family:
        if config.zero_inputs:
            f = GridFn.zeros(spec)
        pm = positive_maximal(f, rule, ladder).values.real
        mh = maximal_restrict(autocorrelation(f), rule, ladder).values.real
        root = np.sqrt(np.maximum(mh, 0.0))
        violations += int(np.count_nonzero(pm > theory * root * (1 + 1e-12) + 1e-300))
        mask = mh > 1e-12 * max(float(mh.max()), 1e-300)
        if np.any(mask):
            constants.append(float(np.max(pm[mask] / root[mask])))
    if not constants:
        return None, violations, None
    return float(np.median(constants)), violations, _spread(constants)


# ==================== Suite ====================

def _guarded(report: Report, name: str, tolerance: float, check: Callable[[], Outcome]) -> None:
    try:
        value, note = check()
        report.add(ReportRow.check(name, value, tolerance, note=note))
    except DegenerateInputError as e:
        report.add(ReportRow.failure(name, f"rejected: {e}", tolerance))
    except Exception as e:
        report.add(ReportRow.failure(name, f"{type(e).__name__}: {e}", tolerance))
    logger.debug("%s: %s", name, report.rows[-1].passed)


def identity_suite(config: ExperimentConfig) -> Report:
    """
    Identity checks of the restriction operators on seeded inputs

    Each check is evaluated two ways and compared; operation-level errors
    become failed rows.
    """
    inputs = IdentityInputs(config)
    report = Report(
        experiment_id="identities",
        config=config.model_dump(include={
            "dimension", "identity_half_width", "identity_n", "identity_scales", "kernel_n",
            "kernel_half_width", "fubini_kernel_n", "fubini_kernel_half_width", "rule_polar",
            "rule_azimuthal", "circle_nodes", "seed", "zero_inputs", "tol_adjoint",
            "tol_fourier_adjoint", "tol_fubini", "tol_plancherel", "tol_autocorrelation",
            "young_p", "holder_half_width", "holder_n", "holder_functions", "holder_scales",
            "holder_stability", "domination_half_width", "domination_n", "domination_width",
            "domination_scales", "domination_stability", "domination_bound",
        }),
        acceptance_resolution=config.identity_n >= config.acceptance_n,
    )

    _guarded(report, "adjoint_pairing", config.tol_adjoint, lambda: check_adjoint(inputs))
    _guarded(report, "fourier_of_adjoint", config.tol_fourier_adjoint, lambda: check_fourier_adjoint(inputs))
    _guarded(report, "fubini_chain", config.tol_fubini, lambda: check_fubini(inputs))
    _guarded(report, "plancherel_multilinear", config.tol_plancherel, lambda: check_plancherel(inputs))
    _guarded(report, "autocorrelation", config.tol_autocorrelation, lambda: check_autocorrelation(inputs))
    _guarded(report, "young", 1.0, lambda: check_young(inputs))

    try:
        ratio, spread = domination_outcomes(config)
        report.add(ReportRow.check("domination_ratio", ratio, config.domination_bound))
        report.add(ReportRow.check("domination_spread", spread, config.domination_stability))
    except Exception as e:
        report.add(ReportRow.failure("domination_ratio", f"rejected: {e}", config.domination_bound))
    _guarded(report, "domination_pairing", config.domination_bound, lambda: check_domination_pairing(inputs))

    theory = holder_constant(config.dimension)
    report.add(ReportRow.info("holder_constant_theory", theory))
    try:
        constant, violations, spread = holder_outcomes(config, inputs.rule)
        report.add(ReportRow.check("holder_pointwise_violations", float(violations), 0.0, "=="))
        note = DEGENERATE if constant is None else ""
        report.add(ReportRow.info("holder_constant_empirical", constant, note=note))
        report.add(ReportRow.check("holder_spread", spread, config.holder_stability, note=note))
    except Exception as e:
        report.add(ReportRow.failure("holder_pointwise_violations", f"{type(e).__name__}: {e}", 0.0))
    return report


def identities_node(state: LabState) -> dict:
    """
    Node 7: Identity suite

    This node:
    1. Builds seeded f, g, h and a random scale assignment
    2. Checks the adjoint pairing, the Fourier transform of the adjoint and the Fubini chain
    3. Checks the Plancherel multilinearization, autocorrelation and Young step
    4. Checks domination by the iterated maximal function and the Hölder bound
    """
    return run_experiment(state, "identities", "🧮 NODE 7: IDENTITY SUITE", identity_suite)
