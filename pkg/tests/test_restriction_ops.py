import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError
from scipy.special import j0

from src.errors import DegenerateInputError, GridMismatchError, LabError
from src.tools.families import gaussian, make_family, smooth_sphere_function
from src.tools.grid_fourier import (
    GridFn,
    GridSpec,
    ScaleLadder,
    convolve,
    fourier_transform,
    interpolate,
    mollifier,
)
from src.tools.restriction_ops import (
    ScaleAssignment,
    adjoint_apply,
    autocorrelation,
    bilinear_form,
    domination_ratio,
    domination_ratios,
    extend,
    fourier_of_adjoint,
    grouped_pair_sum,
    holder_constant,
    linearized_apply,
    maximal_restrict,
    positive_maximal,
    restrict,
    smoothed_slices,
    windowed_restrict,
)
from src.tools.sphere_quadrature import circle_rule


@pytest.fixture
def bumps(plane_grid):
    return make_family("random_bumps", {"count": 2}, 5, spec=plane_grid).members


def test_restrict_gaussian_is_constant_on_the_circle(plane_grid, circle):
    Rf = restrict(gaussian(plane_grid, 1.0), circle)
    assert_allclose(Rf.values, 2.0 * math.pi * math.exp(-0.5), rtol=1e-8)


def test_restrict_gaussian_on_the_sphere(space_grid, sphere):
    Rf = restrict(gaussian(space_grid, 1.0), sphere)
    assert_allclose(Rf.values, (2.0 * math.pi) ** 1.5 * math.exp(-0.5), rtol=1e-6)


def test_extension_of_one_is_a_bessel_function(circle):
    g = smooth_sphere_function(circle, 0).with_values(np.ones(circle.size))
    rng = np.random.default_rng(0)
    points = rng.uniform(-7.0, 7.0, size=(50, 2))
    expected = 2.0 * math.pi * j0(np.linalg.norm(points, axis=1))
    assert_allclose(extend(g, points), expected, atol=1e-10)


def test_extension_on_a_grid_matches_points(circle):
    spec = GridSpec(d=2, L=4.0, n=16)
    g = smooth_sphere_function(circle, 3)
    on_grid = extend(g, spec)
    x, y = np.meshgrid(spec.axis(), spec.axis(), indexing="ij")
    points = np.stack([x.ravel(), y.ravel()], axis=1)
    assert_allclose(on_grid.flat, extend(g, points), atol=1e-12)


def test_restriction_needs_a_physical_grid(plane_grid, circle):
    with pytest.raises(GridMismatchError):
        restrict(GridFn.zeros(plane_grid.dual()), circle)
    with pytest.raises(LabError):
        restrict(GridFn.zeros(GridSpec(d=2, L=32.0, n=16)), circle)


def test_constant_assignment_matches_the_maximal_slice(plane_grid, circle, bumps):
    f = bumps[0]
    ladder = ScaleLadder.for_grid(plane_grid)
    slices = smoothed_slices(f, circle, ladder)
    for i, eps in enumerate(ladder):
        A = linearized_apply(f, ScaleAssignment.constant(circle, eps))
        assert_array_equal(A.values, slices[i])
    assert_array_equal(maximal_restrict(f, circle, ladder).values.real, np.max(np.abs(slices), axis=0))


def test_unwindowed_limit_is_the_restriction(plane_grid, circle, bumps):
    f = bumps[0]
    assert_allclose(windowed_restrict(f, circle, 0.0), restrict(f, circle).values, rtol=1e-12)


def test_maximal_operator_is_monotone_in_the_ladder(plane_grid, circle, bumps):
    ladder = ScaleLadder.for_grid(plane_grid)
    full = maximal_restrict(bumps[0], circle, ladder).values.real
    sub = maximal_restrict(bumps[0], circle, ladder.top(3)).values.real
    assert np.all(sub <= full)


def test_maximal_operator_is_sublinear(plane_grid, circle, bumps):
    ladder = ScaleLadder.for_grid(plane_grid)
    f, g = bumps
    lhs = maximal_restrict(f + g, circle, ladder).values.real
    rhs = maximal_restrict(f, circle, ladder).values.real + maximal_restrict(g, circle, ladder).values.real
    assert np.all(lhs <= rhs + 1e-12 * rhs.max())


def test_positive_maximal_is_homogeneous(plane_grid, circle, bumps):
    ladder = ScaleLadder(scales=(1.0, 0.5, 0.25))
    once = positive_maximal(bumps[0], circle, ladder).values.real
    twice = positive_maximal(bumps[0].scaled(-2.0j), circle, ladder).values.real
    assert np.all(once >= 0)
    assert_allclose(twice, 2.0 * once, rtol=1e-10, atol=1e-12 * once.max())


def test_adjoint_pairing(plane_grid, circle, bumps):
    assign = ScaleAssignment.random(circle, [2.0, 1.0, 0.5], seed=1)
    g = smooth_sphere_function(circle, 2)
    f = bumps[0]
    lhs = np.sum(circle.weights * linearized_apply(f, assign).values * np.conj(g.values))
    rhs = np.sum(f.values * np.conj(adjoint_apply(g, assign, plane_grid).values)) * plane_grid.cell_volume
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_fourier_of_adjoint_closed_form(plane_grid, circle):
    assign = ScaleAssignment.random(circle, [2.0, 1.4142135623730951], seed=4)
    g = smooth_sphere_function(circle, 6)
    transformed = fourier_transform(adjoint_apply(g, assign, plane_grid)).values
    closed = (2.0 * math.pi) ** 2 * fourier_of_adjoint(g, assign, plane_grid).values
    assert np.max(np.abs(transformed - closed)) <= 1e-6 * np.max(np.abs(closed))


def test_fourier_of_adjoint_needs_positive_scales(plane_grid, circle):
    g = smooth_sphere_function(circle, 6)
    with pytest.raises(LabError):
        fourier_of_adjoint(g, ScaleAssignment.constant(circle, 0.0), plane_grid)


def test_assignment_length_checked(circle):
    with pytest.raises(ValidationError):
        ScaleAssignment(rule=circle, eps=np.ones(3))
    with pytest.raises(ValidationError):
        ScaleAssignment(rule=circle, eps=-np.ones(circle.size))


def test_autocorrelation_transform_is_the_power_spectrum(bumps):
    F = fourier_transform(bumps[0])
    H = fourier_transform(autocorrelation(bumps[0]))
    power = np.abs(F.values) ** 2
    assert np.max(np.abs(H.values - power)) <= 1e-10 * power.max()


def _kernel_grid():
    return GridSpec.for_frequency_box(2, 2.5, 64)


def test_single_group_pair_sum_is_the_bilinear_form():
    rule = circle_rule(16)
    g = smooth_sphere_function(rule, 8)
    kernel = gaussian(_kernel_grid(), 0.7, frequency=[0.2, -0.1])
    grouped = grouped_pair_sum(g, ScaleAssignment.constant(rule, 1.0), lambda a, b: kernel)
    assert grouped == pytest.approx(bilinear_form(g, g, kernel, at="sum"), rel=1e-12)


def test_grouped_pair_sum_counts_every_ordered_pair():
    rule = circle_rule(16)
    g = smooth_sphere_function(rule, 9)
    assign = ScaleAssignment.random(rule, [1.0, 0.5], seed=2)
    spec = _kernel_grid()

    def kernel_for(a, b):
        return gaussian(spec, 0.5 + a * b)

    c = rule.weights * g.values
    brute = 0j
    for k in range(rule.size):
        for l in range(rule.size):
            K = kernel_for(assign.eps[k], assign.eps[l])
            point = -(rule.nodes[k] + rule.nodes[l])
            brute += c[k] * c[l] * interpolate(K, point[None, :])[0]
    assert grouped_pair_sum(g, assign, kernel_for) == pytest.approx(brute, rel=1e-10)


def test_kernel_grid_must_reach_the_pair_differences():
    rule = circle_rule(16)
    g = smooth_sphere_function(rule, 1)
    small = GridSpec.for_frequency_box(2, 1.5, 32)
    with pytest.raises(LabError):
        bilinear_form(g, g, gaussian(small))


def test_domination_rejects_zero_input(plane_grid):
    with pytest.raises(DegenerateInputError):
        domination_ratio(GridFn.zeros(plane_grid), [(1.0, 1.0)], [1.0, 2.0])


def test_holder_constant():
    assert holder_constant(3) == pytest.approx(math.sqrt(4.0 / 3.0 * math.pi * math.exp(math.pi)))
    assert holder_constant(2) == pytest.approx(math.sqrt(math.pi * math.exp(math.pi)))


@pytest.mark.parametrize("eps", [1.0, 2.0])
def test_window_equals_frequency_convolution(circle, eps):
    spec = GridSpec(d=2, L=32.0, n=128)
    f = gaussian(spec, 1.0, center=[0.5, -0.25], frequency=[0.2, 0.0])
    A = linearized_apply(f, ScaleAssignment.constant(circle, eps)).values
    F = fourier_transform(f)
    smoothed = interpolate(convolve(F, mollifier(F.spec, eps)), circle.nodes)
    assert np.max(np.abs(A - smoothed)) <= 1e-2 * np.max(np.abs(A))


def test_domination_ratio_is_translation_invariant():
    spec = GridSpec(d=2, L=8.0, n=128)
    pairs = [(0.5303300858899106, 0.5303300858899106), (0.5303300858899106, 0.375), (0.375, 0.375)]
    ladder = ScaleLadder.for_grid(spec)
    centred = domination_ratios(gaussian(spec, 0.8), pairs, ladder)
    shifted = domination_ratios(gaussian(spec, 0.8, center=[0.5, -0.25]), pairs, ladder)
    assert shifted == pytest.approx(centred, rel=1e-6)
    assert max(centred) <= 3.0
