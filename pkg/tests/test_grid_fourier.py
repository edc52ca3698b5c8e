import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from src.errors import GridMismatchError, LabError, LadderError, TruncationWarning
from src.tools.families import gaussian, make_family
from src.tools.grid_fourier import (
    GridFn,
    GridSpec,
    ScaleLadder,
    ball_sums,
    check_decay,
    convolve,
    fourier_transform,
    hl_maximal,
    interpolate,
    lp_norm,
    mollifier,
    reflect_conjugate,
    window,
)


def test_dual_of_dual_is_exact(space_grid):
    dual = space_grid.dual()
    assert dual.space == "xi"
    assert dual.dual() == space_grid
    assert dual.spacing == pytest.approx(math.pi / space_grid.L)


@pytest.mark.parametrize("n", [15, 17, 8])
def test_grid_size_must_be_even_and_large(n):
    with pytest.raises(ValidationError):
        GridSpec(d=2, L=4.0, n=n)


def test_frequency_box_has_requested_half_width():
    spec = GridSpec.for_frequency_box(3, 2.5, 160)
    assert spec.space == "xi"
    assert spec.half_width == pytest.approx(2.5)


@pytest.mark.parametrize("d, n", [(2, 64), (3, 48)])
def test_gaussian_transform_matches_closed_form(d, n):
    spec = GridSpec(d=d, L=8.0, n=n)
    F = fourier_transform(gaussian(spec, 1.0))
    expected = (2.0 * math.pi) ** (d / 2.0) * np.exp(-F.spec.radius_squared() / 2.0)
    assert np.max(np.abs(F.values - expected)) <= 1e-10 * np.max(expected)


def test_inverse_undoes_forward(plane_grid):
    f = make_family("random_bumps", {"count": 1}, 7, spec=plane_grid).members[0]
    back = fourier_transform(fourier_transform(f), "inverse")
    assert back.spec == plane_grid
    assert_allclose(back.values, f.values, atol=1e-12)


def test_plancherel_constant(plane_grid):
    f = make_family("random_bumps", {"count": 1}, 3, spec=plane_grid).members[0]
    F = fourier_transform(f)
    lhs = lp_norm(f, 2) ** 2 * (2.0 * math.pi) ** 2
    assert lp_norm(F, 2) ** 2 == pytest.approx(lhs, rel=1e-10)


def test_lp_norm_exponents(plane_grid):
    f = gaussian(plane_grid, 1.0)
    assert lp_norm(f, "inf") == pytest.approx(1.0)
    assert lp_norm(f, 1) == pytest.approx(2.0 * math.pi, rel=1e-8)
    with pytest.raises(LabError):
        lp_norm(f, "1/2")


def test_mollifier_has_unit_mass():
    spec = GridSpec(d=2, L=8.0, n=64)
    chi = mollifier(spec, 1.0)
    assert np.sum(chi.values).real * spec.cell_volume == pytest.approx(1.0, rel=1e-10)
    assert np.all(window(spec, 0.0) == 1.0)


def test_operands_on_different_grids_rejected(plane_grid):
    other = GridSpec(d=2, L=8.0, n=64)
    with pytest.raises(GridMismatchError):
        convolve(gaussian(plane_grid), gaussian(other))
    with pytest.raises(GridMismatchError):
        gaussian(plane_grid) + gaussian(other)


def test_convolution_of_gaussians(plane_grid):
    g = gaussian(plane_grid, 1.0)
    out = convolve(g, g)
    # e^{-x^2/2} * e^{-x^2/2} = pi e^{-x^2/4} in two dimensions
    expected = math.pi * np.exp(-plane_grid.radius_squared() / 4.0)
    assert_allclose(out.values, expected, atol=1e-10)


def test_truncation_warning_carries_shell_mass(plane_grid):
    ones = GridFn(spec=plane_grid, values=np.ones(plane_grid.shape))
    with pytest.warns(TruncationWarning) as record:
        mass = check_decay(ones)
    assert mass == 1.0
    assert record[0].message.shell_mass == 1.0


def test_reflect_conjugate_mirrors_centre(plane_grid):
    f = gaussian(plane_grid, 1.0, center=[1.0, -0.5], frequency=[0.3, 0.2])
    mirrored = gaussian(plane_grid, 1.0, center=[-1.0, 0.5], frequency=[0.3, 0.2])
    assert_allclose(reflect_conjugate(f).values, mirrored.values, atol=1e-12)
    assert_allclose(reflect_conjugate(reflect_conjugate(f)).values, f.values)


def test_half_dyadic_ladder():
    ladder = ScaleLadder.half_dyadic(0.25, 2.0)
    assert ladder.largest == pytest.approx(2.0)
    assert ladder.smallest == pytest.approx(0.25)
    assert len(ladder) == 7
    ratios = np.array(ladder.scales[:-1]) / np.array(ladder.scales[1:])
    assert_allclose(ratios, math.sqrt(2.0))
    assert ladder.top(3).scales == ladder.scales[:3]


@pytest.mark.parametrize("scales", [(), (1.0, 2.0), (1.0, 1.0), (1.0, -0.5)])
def test_invalid_ladders_rejected(scales):
    with pytest.raises(ValidationError):
        ScaleLadder(scales=scales)


def test_ladder_bounds(plane_grid):
    ScaleLadder.for_grid(plane_grid).check_bounds(plane_grid)
    with pytest.raises(LadderError):
        ScaleLadder(scales=(1.0, 0.1)).check_bounds(plane_grid)
    with pytest.raises(LadderError):
        ScaleLadder(scales=(12.0, 1.0)).check_bounds(plane_grid)


def test_hl_maximal_fixes_constants_in_the_interior(plane_grid):
    ones = GridFn(spec=plane_grid, values=np.ones(plane_grid.shape))
    M = hl_maximal(ones, [0.5, 1.0, 2.0])
    centre = plane_grid.n // 2
    assert M.values[centre, centre].real == pytest.approx(1.0, abs=1e-12)


def test_hl_maximal_grows_with_the_ladder(plane_grid):
    f = make_family("random_bumps", {"count": 1}, 11, spec=plane_grid).members[0]
    small = hl_maximal(f, [1.0]).values.real
    large = hl_maximal(f, [1.0, 2.0, 4.0]).values.real
    assert np.all(large >= small)
    with pytest.raises(LadderError):
        hl_maximal(f, [])


def test_ball_sums_count_lattice_points(plane_grid):
    dual = plane_grid.dual()
    F = GridFn(spec=dual, values=np.ones(dual.shape))
    sums, counts = ball_sums(F, np.zeros((1, 2)), [dual.spacing, 0.5 * dual.spacing])
    assert counts[:, 0].tolist() == [5, 1]
    assert_allclose(sums[:, 0], counts[:, 0] * dual.cell_volume)


def test_interpolation_reproduces_affine_functions(plane_grid):
    x, y = plane_grid.coordinates()
    f = GridFn(spec=plane_grid, values=np.broadcast_to(x + 2.0 * y + 1.0, plane_grid.shape))
    points = np.array([[0.3, -0.7], [5.1, 2.25]])
    assert_allclose(interpolate(f, points), [0.3 - 1.4 + 1.0, 5.1 + 4.5 + 1.0], atol=1e-12)
    with pytest.raises(LabError):
        interpolate(f, np.array([[20.0, 0.0]]))


def test_saved_samples_round_trip(tmp_path, plane_grid):
    f = gaussian(plane_grid, 1.0, frequency=[0.2, 0.0])
    stem = str(tmp_path / "f")
    f.save(stem)
    with open(f"{stem}.json", "rb") as fh:
        header = json.loads(fh.read())
    assert header == {"L": 16.0, "d": 2, "layout": "row-major", "n": 64, "space": "x"}
    assert np.array_equal(np.load(f"{stem}.npy"), f.values)


@pytest.mark.parametrize("radii", [[0.25, 1.0], [1.0, 9.0]])
def test_hl_maximal_rejects_radii_off_the_grid(plane_grid, radii):
    f = GridFn(spec=plane_grid, values=np.ones(plane_grid.shape))
    with pytest.raises(LadderError):
        hl_maximal(f, radii)


def test_hl_maximal_accepts_the_default_ladder(plane_grid):
    f = GridFn(spec=plane_grid, values=np.ones(plane_grid.shape))
    ladder = ScaleLadder.for_grid(plane_grid)
    assert np.array_equal(hl_maximal(f, ladder).values, hl_maximal(f, list(ladder)).values)


def test_hl_maximal_is_sublinear_and_homogeneous(plane_grid):
    f, g = make_family("random_bumps", {"count": 2}, 7, spec=plane_grid).members
    radii = [0.5, 1.0, 2.0, 4.0]
    Mf, Mg = hl_maximal(f, radii).values.real, hl_maximal(g, radii).values.real
    Mfg = hl_maximal(f + g, radii).values.real
    assert np.all(Mfg <= Mf + Mg + 1e-12 * (Mf + Mg).max())
    assert_allclose(hl_maximal(f.scaled(-3.0j), radii).values.real, 3.0 * Mf, rtol=1e-10, atol=1e-12 * Mf.max())


def test_iterated_hl_maximal(plane_grid):
    f = make_family("random_bumps", {"count": 1}, 3, spec=plane_grid).members[0]
    radii = [0.5, 1.0, 2.0]
    once = hl_maximal(f, radii).values.real
    twice = hl_maximal(hl_maximal(f, radii), radii).values.real
    top = float(np.max(np.abs(f.values)))
    assert np.all(once >= 0) and np.all(twice >= 0)
    assert twice.max() <= once.max() * (1 + 1e-12) <= top * (1 + 1e-12) ** 2
    ones = GridFn(spec=plane_grid, values=np.ones(plane_grid.shape))
    centre = plane_grid.n // 2
    assert hl_maximal(hl_maximal(ones, radii), radii).values[centre, centre].real == pytest.approx(1.0, abs=1e-12)
