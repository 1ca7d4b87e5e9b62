import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerfio.grid import (
    Grid1D,
    GridMismatchError,
    InvalidGridError,
    PhaseSpaceGrid,
    SampledFunction,
    bandlimited_shift,
    fourier,
    inverse_fourier,
    make_grid,
    sample,
    tensor,
    weight_convolution_ratio,
    weight_eval,
)
from wignerfio.testfuncs import gaussian
from wignerfio.wigner import tf_shift


def test_make_grid_spacing_and_endpoints():
    g = make_grid(16, 8)
    assert g.spacing == 2.0
    assert g.x[0] == -8.0 and g.x[7] == 6.0


def test_frequency_samples_unit_extent():
    assert Grid1D(1, 4).xi.tolist() == [-2.0, -1.0, 0.0, 1.0]


@pytest.mark.parametrize("M", [7, 2, 0, 3])
def test_bad_point_count_rejected(M):
    with pytest.raises(InvalidGridError):
        make_grid(16, M)


def test_nonpositive_extent_rejected():
    with pytest.raises(InvalidGridError):
        Grid1D(0.0, 8)


def test_phase_space_axes():
    g = Grid1D(4.0, 32)
    P = PhaseSpaceGrid(g)
    assert P.dx == 0.125 and P.dxi == 0.125
    assert np.allclose(np.diff(P.xi), 1 / 8)
    assert np.allclose(np.diff(PhaseSpaceGrid(g, wigner=False).xi), 1 / 4)
    assert P.shape == (32, 32)
    X, XI = P.mesh()
    assert X.shape == XI.shape == (32, 32)


def test_index_of_on_and_off_lattice():
    g = Grid1D(16.0, 8)
    assert g.index_of(-4.0) == 2
    with pytest.raises(InvalidGridError):
        g.index_of(-3.0)


def test_sampled_function_shape_checked(grid128):
    with pytest.raises(GridMismatchError):
        SampledFunction(grid128, np.zeros(5))


def test_arithmetic_requires_same_grid(grid128, grid256):
    with pytest.raises(GridMismatchError):
        gaussian(grid128) + gaussian(grid256)


def test_tensor_product_layout(grid128):
    f = gaussian(grid128)
    g = gaussian(grid128, x0=1.0)
    F = tensor(f, g)
    assert F.ndim == 2
    assert np.allclose(F.values, np.outer(f.values, np.conj(g.values)))


@pytest.mark.parametrize("z,s,expected", [((0.7, -1.3), 0, 1.0), ((3, 4), 2, 26.0), ((0, 0), -7, 1.0)])
def test_weight_eval_values(z, s, expected):
    assert weight_eval(np.array(z, float), s) == pytest.approx(expected, rel=1e-15)


def test_fourier_of_gaussian(grid256):
    fh = fourier(gaussian(grid256))
    err = np.max(np.abs(fh.values - np.exp(-np.pi * fh.grid.x**2)))
    assert err <= 1e-10


def test_fourier_shift_theorem(grid256):
    g = gaussian(grid256)
    x0 = 8 * grid256.spacing
    lhs = fourier(tf_shift(g, (x0, 0.0))).values
    fh = fourier(g)
    rhs = np.exp(-2j * np.pi * x0 * fh.grid.x) * fh.values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_parseval(grid256):
    f = gaussian(grid256, 0.7, x0=1.0, xi0=0.5)
    assert abs(fourier(f).norm() - f.norm()) <= 1e-10


def test_inverse_fourier_round_trip(grid256):
    f = gaussian(grid256, 1.3, x0=-0.5, xi0=1.0)
    back = inverse_fourier(fourier(f), grid256)
    assert back.grid == grid256
    assert np.max(np.abs(back.values - f.values)) <= 1e-13


@pytest.mark.parametrize("width,x0", [(1.0, 0.0), (0.6, 1.25), (1.5, -2.0)])
def test_double_fourier_is_parity(grid256, width, x0):
    f = gaussian(grid256, width, x0=x0)
    ff = fourier(fourier(f))
    expected = sample(lambda t: np.exp(-np.pi * (-t - x0) ** 2 / width**2), grid256).values
    assert np.max(np.abs(ff.values - expected)) <= 1e-10


def test_bandlimited_shift_integer_is_roll(grid128):
    f = gaussian(grid128)
    out = bandlimited_shift(f.values, 3 * grid128.spacing, grid128.spacing)
    assert np.max(np.abs(out - np.roll(f.values, 3))) <= 1e-13


def test_bandlimited_shift_fractional(grid256):
    f = gaussian(grid256)
    s = 0.3 * grid256.spacing
    out = bandlimited_shift(f.values, s, grid256.spacing)
    ref = gaussian(grid256, x0=s).values
    assert np.max(np.abs(out - ref)) <= 1e-12


def test_convolution_ratio_settles_for_integrable_weight():
    r1 = weight_convolution_ratio(-3, 32, 256)
    r2 = weight_convolution_ratio(-3, 64, 512)
    assert np.isfinite(r1) and abs(r2 - r1) / r1 <= 0.05


def test_convolution_ratio_grows_for_flat_weight():
    r1 = weight_convolution_ratio(0, 8, 32)
    r2 = weight_convolution_ratio(0, 16, 64)
    # v_0 * v_0 is the window area, so the ratio scales like L^2
    assert r2 / r1 == pytest.approx(4.0, rel=1e-12)


def test_convolution_ratio_two_dimensional():
    r = weight_convolution_ratio(-6, 8, 16, d=2)
    assert np.isfinite(r) and r > 0


def test_convolution_ratio_monotone_in_s():
    vals = [weight_convolution_ratio(s, 32, 256) for s in (-2.5, -3, -4, -6)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


coords = st.floats(-6, 6, allow_nan=False)


@given(st.lists(coords, min_size=4, max_size=4), st.sampled_from([-4, -2, 2]))
def test_weight_peetre_inequality(p, s):
    z, w = np.array(p[:2]), np.array(p[2:])
    assert weight_eval(z + w, s) <= 2 ** (abs(s) / 2) * weight_eval(z, s) * weight_eval(w, abs(s)) * (1 + 1e-12)


@given(st.lists(coords, min_size=2, max_size=2), st.floats(-10, 10))
def test_weight_positive_and_trivial_at_zero_order(p, s):
    z = np.array(p)
    assert weight_eval(z, s) > 0
    assert weight_eval(z, 0) == 1.0


@given(st.integers(2, 32).map(lambda k: 2 * k), st.floats(0.5, 100))
def test_grid_invariants(M, L):
    g = Grid1D(L, M)
    assert g.spacing * M == pytest.approx(L)
    assert g.x[0] == pytest.approx(-L / 2)
    assert np.allclose(np.diff(g.xi), 1 / L)
    assert np.allclose(np.diff(g.wigner_xi), 1 / (2 * L))
    assert abs(g.x[0] + g.x[-1]) <= g.spacing * (1 + 1e-12)


@given(st.floats(-3, 3), st.floats(-2, 2))
def test_fourier_linear_and_unitary(x0, xi0):
    g = Grid1D(16.0, 128)
    f = gaussian(g, x0=x0, xi0=xi0)
    h = gaussian(g, 0.8)
    lhs = fourier(f * 2.0 + h * 1j).values
    rhs = 2.0 * fourier(f).values + 1j * fourier(h).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    assert abs(fourier(f).norm() - f.norm()) <= 1e-10
