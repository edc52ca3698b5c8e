import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.errors import LabError
from src.tools.families import gaussian, gaussian_l1_norm, make_family, smooth_sphere_function
from src.tools.grid_fourier import lp_norm
from src.tools.sphere_quadrature import lq_norm_sigma


def test_knapp_cap_mass():
    family = make_family("knapp_cap", {"deltas": [0.5, 0.25], "d": 3})
    assert family.parameters == [0.5, 0.25]
    for delta, cap in family:
        assert lq_norm_sigma(cap, 1) == pytest.approx(2.0 * math.pi * (1.0 - math.cos(delta)), rel=1e-10)


def test_knapp_cap_on_the_circle():
    (delta, cap), = make_family("knapp_cap", {"deltas": [0.25], "d": 2, "circle_nodes": 64})
    assert cap.rule.d == 2
    assert lq_norm_sigma(cap, 1) == pytest.approx(2.0 * delta, rel=1e-10)


def test_gaussian_l1_norm(plane_grid):
    for width in (0.7, 1.0, 1.5):
        assert lp_norm(gaussian(plane_grid, width), 1) == pytest.approx(gaussian_l1_norm(2, width), rel=1e-8)


def test_modulated_family_has_unit_modulus_factor(plane_grid):
    plain = make_family("gaussian", {"scales": [1.0, 0.5]}, spec=plane_grid)
    modulated = make_family("modulated", {"scales": [1.0, 0.5]}, spec=plane_grid)
    for (_, f), (_, g) in zip(plain, modulated):
        assert np.allclose(np.abs(g.values), f.values.real)


@pytest.mark.parametrize("name", ["random_bumps", "holder"])
def test_seeded_families_are_deterministic(plane_grid, name):
    first = make_family(name, {"count": 3}, 9, spec=plane_grid)
    second = make_family(name, {"count": 3}, 9, spec=plane_grid)
    other = make_family(name, {"count": 3}, 10, spec=plane_grid)
    assert len(first) == 3
    for a, b, c in zip(first.members, second.members, other.members):
        assert_array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)


def test_unknown_family_rejected(plane_grid):
    with pytest.raises(LabError, match="unknown family"):
        make_family("sawtooth", spec=plane_grid)


def test_grid_family_needs_a_grid():
    with pytest.raises(LabError, match="needs a grid"):
        make_family("gaussian")


def test_smooth_sphere_function_is_seeded(circle):
    assert_array_equal(smooth_sphere_function(circle, 1).values, smooth_sphere_function(circle, 1).values)
    assert not np.array_equal(smooth_sphere_function(circle, 1).values, smooth_sphere_function(circle, 2).values)
