import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerfio.grid import Grid1D, GridMismatchError, SampledFunction, fourier, inverse_fourier, sample, tensor
from wignerfio.tensorio import read_tensor
from wignerfio.testfuncs import gaussian, hermite1
from wignerfio.wigner import (
    KERNEL_AXES,
    WIGNER2_AXES,
    OffGridShiftWarning,
    apply_A_half,
    apply_A_half_inverse,
    cross_wigner,
    permute_Tp,
    tau_wigner,
    tf_shift,
)


def _sup_rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


# ---- time-frequency shifts -------------------------------------------------

def test_tf_shift_zero_is_identity(grid128):
    f = gaussian(grid128, x0=0.5, xi0=1.0)
    assert np.array_equal(tf_shift(f, (0.0, 0.0)).values, f.values)


def test_tf_shift_one_cell_on_delta():
    g = Grid1D(8.0, 16)
    v = np.zeros(16)
    v[5] = 1.0
    out = tf_shift(SampledFunction(g, v), (g.spacing, 0.0))
    assert np.argmax(np.abs(out.values)) == 6
    assert np.count_nonzero(out.values) == 1


@given(st.integers(-40, 40), st.floats(-3, 3))
def test_tf_shift_preserves_norm(n, xi0):
    g = Grid1D(16.0, 128)
    f = gaussian(g, 0.9, x0=0.25)
    out = tf_shift(f, (n * g.spacing, xi0))
    assert abs(out.norm() - f.norm()) <= 1e-12


def test_tf_shift_off_grid_warns(grid256):
    f = gaussian(grid256)
    with pytest.warns(OffGridShiftWarning):
        out = tf_shift(f, (0.3 * grid256.spacing, 0.0))
    assert out.meta["interpolated"]
    assert np.max(np.abs(out.values - gaussian(grid256, x0=0.3 * grid256.spacing).values)) <= 1e-12


# ---- cross-Wigner ----------------------------------------------------------

def test_gaussian_wigner_closed_form(grid256):
    W = cross_wigner(gaussian(grid256))
    X, XI = W.grid.mesh()
    ref = np.sqrt(2) * np.exp(-2 * np.pi * (X**2 + XI**2))
    assert np.max(np.abs(W.values - ref)) <= 1e-8


def test_wigner_matches_direct_riemann_sum():
    # brute-force lag sum of the defining integral at one frozen point
    g = Grid1D(16.0, 128)
    f = gaussian(g, 0.8, x0=0.5, xi0=0.75)
    h = gaussian(g, 1.1, x0=-0.25)
    W = cross_wigner(f, h)
    j, k = 70, 64 + 6
    x, xi = W.grid.x[j], W.grid.xi[k]
    t = np.linspace(-12, 12, 24001)
    fx = lambda u: np.exp(-np.pi * (u - 0.5) ** 2 / 0.64) * np.exp(2j * np.pi * 0.75 * u)
    hx = lambda u: np.exp(-np.pi * (u + 0.25) ** 2 / 1.21)
    integrand = fx(x + t / 2) * np.conj(hx(x - t / 2)) * np.exp(-2j * np.pi * t * xi)
    ref = np.trapezoid(integrand, t)
    assert abs(W.values[j, k] - ref) <= 1e-9


def test_wigner_of_shifted_gaussian(grid256):
    x0, xi0 = 1.0, 0.5
    W = cross_wigner(tf_shift(gaussian(grid256), (x0, xi0)))
    X, XI = W.grid.mesh()
    ref = np.sqrt(2) * np.exp(-2 * np.pi * ((X - x0) ** 2 + (XI - xi0) ** 2))
    assert np.max(np.abs(W.values - ref)) <= 1e-8


def test_wigner_covariance_under_lattice_shift():
    g = Grid1D(16.0, 256)
    f = gaussian(g, 0.8, xi0=0.25)
    n, k = 12, 6
    x0, xi0 = n * g.spacing, k / (2 * g.extent)
    W0 = cross_wigner(f).values
    W1 = cross_wigner(tf_shift(f, (x0, xi0))).values
    assert np.max(np.abs(W1 - np.roll(W0, (n, k), axis=(0, 1)))) <= 1e-10


@pytest.mark.parametrize("M", [128, 256])
@pytest.mark.parametrize("make", [gaussian, hermite1])
def test_moyal_identity(M, make):
    f = make(Grid1D(16.0, M))
    W = cross_wigner(f)
    assert abs(W.norm() - f.norm() ** 2) / f.norm() ** 2 <= 1e-8


@pytest.mark.parametrize("make", [gaussian, hermite1])
def test_auto_wigner_real_with_unit_mass(grid256, make):
    f = make(grid256)
    W = cross_wigner(f)
    assert np.max(np.abs(W.values.imag)) <= 1e-10 * np.max(np.abs(W.values))
    assert abs(W.integral() - f.norm() ** 2) <= 1e-10


def test_cross_wigner_grid_mismatch(grid128, grid256):
    with pytest.raises(GridMismatchError):
        cross_wigner(gaussian(grid128), gaussian(grid256))


def test_wigner_export_round_trip(tmp_path, grid128):
    W = cross_wigner(gaussian(grid128))
    header = W.export(tmp_path / "w.wft")
    vals, hdr = read_tensor(tmp_path / "w.wft")
    assert hdr["axes"] == ["x", "xi"] == header["axes"]
    assert np.array_equal(vals, W.values)


# ---- tau-Wigner ------------------------------------------------------------

def test_tau_half_matches_cross_wigner(grid128):
    f = gaussian(grid128, 0.8, x0=0.5, xi0=0.5)
    h = hermite1(grid128)
    assert np.max(np.abs(tau_wigner(f, h, 0.5).values - cross_wigner(f, h).values)) <= 1e-9


def _tau0_reference(f, g, grid):
    # W_0(f, g)(x, xi) = f(x) conj(g^(xi)) e^{-2πi x xi}
    W = cross_wigner(f, g)
    X, XI = W.grid.mesh()
    gh = np.exp(-np.pi * XI**2)
    return f.values[:, None] * np.conj(gh) * np.exp(-2j * np.pi * X * XI)


def test_tau_zero_closed_form(grid256):
    f = gaussian(grid256)
    W0 = tau_wigner(f, f, 0.0)
    assert np.max(np.abs(W0.values - _tau0_reference(f, f, grid256))) <= 1e-6


def test_tau_one_is_swapped_conjugate(grid256):
    f = gaussian(grid256, 0.9, x0=0.25)
    g = gaussian(grid256, 1.2)
    assert np.max(np.abs(tau_wigner(f, g, 1.0).values - np.conj(tau_wigner(g, f, 0.0).values))) <= 1e-6


# ---- Fourier covariance (modulus only) --------------------------------------

@given(st.integers(-16, 16), st.integers(-16, 16))
def test_fourier_covariance_modulus(n, m):
    g = Grid1D(16.0, 256)
    dz = g.spacing
    z = (n * dz, m * dz)
    f, h = gaussian(g, 0.9, x0=0.5), gaussian(g, 1.2, xi0=0.25)
    conj_op = fourier(tf_shift(inverse_fourier(f, g), z))
    lhs = abs(SampledFunction(g, conj_op.values).inner(h))
    rhs = abs(tf_shift(f, (z[1], -z[0])).inner(h))
    assert abs(lhs - rhs) <= 1e-8


# ---- the half-Wigner operator -----------------------------------------------

def _correlated(grid):
    x = grid.x
    A, B = np.meshgrid(x, x, indexing="ij")
    v = np.exp(-np.pi * (A**2 + B**2 + A * B) + 2j * np.pi * 0.3 * A)
    return SampledFunction(grid, v, "corr")


def test_A_half_on_tensor_is_cross_wigner(grid128):
    f = gaussian(grid128, 0.8, x0=0.5)
    h = hermite1(grid128)
    assert np.max(np.abs(apply_A_half(tensor(f, h)).values - cross_wigner(f, h).values)) <= 1e-10


def test_A_half_round_trip(grid256):
    F = _correlated(grid256)
    back = apply_A_half_inverse(apply_A_half(F))
    assert np.max(np.abs(back.values - F.values)) <= 1e-8


def test_A_half_round_trip_even_pairs_exact(grid128):
    # entries with a + b even need no half-cell interpolation
    F = _correlated(grid128)
    back = apply_A_half_inverse(apply_A_half(F)).values
    a, b = np.indices(F.values.shape)
    even = (a + b) % 2 == 0
    assert np.max(np.abs(back[even] - F.values[even])) <= 1e-14


def test_A_half_is_isometric(grid128):
    F = _correlated(grid128)
    G = apply_A_half(F)
    nF = np.sqrt(np.sum(np.abs(F.values) ** 2)) * grid128.spacing
    assert abs(G.norm() - nF) <= 1e-8


def test_A_half_rejects_one_dimensional(grid128):
    with pytest.raises(GridMismatchError):
        apply_A_half(gaussian(grid128))


def test_A_half_inverse_recovers_gaussian_tensor(grid128):
    f = gaussian(grid128)
    F = apply_A_half_inverse(cross_wigner(f))
    assert np.max(np.abs(F.values - np.outer(f.values, np.conj(f.values)))) <= 1e-8


def test_A_half_inverse_zero_and_linear(grid128):
    Wa = cross_wigner(gaussian(grid128))
    Wb = cross_wigner(hermite1(grid128), gaussian(grid128, x0=1.0))
    assert np.all(apply_A_half_inverse(Wa.with_values(np.zeros(Wa.grid.shape))).values == 0)
    lhs = apply_A_half_inverse(Wa.with_values(2 * Wa.values - 3j * Wb.values)).values
    rhs = 2 * apply_A_half_inverse(Wa).values - 3j * apply_A_half_inverse(Wb).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


# ---- the kernel permutation --------------------------------------------------

def _tensor(rng, M=6):
    return rng.normal(size=(M,) * 4) + 1j * rng.normal(size=(M,) * 4)


@pytest.mark.parametrize("periodic", [False, True])
def test_Tp_is_involution(rng, periodic):
    K = _tensor(rng)
    once, ax, _ = permute_Tp(K, WIGNER2_AXES, periodic_eta=periodic)
    twice, ax2, _ = permute_Tp(once, ax, periodic_eta=periodic)
    assert ax == KERNEL_AXES and ax2 == WIGNER2_AXES
    assert np.array_equal(twice, K)


def test_Tp_moves_point_mass():
    M = 6
    c = np.arange(M) - (M - 1) / 2  # symmetric axis
    K = np.zeros((M,) * 4)
    a, b, cc, e = 1, 4, 2, 0
    K[a, b, cc, e] = 1.0
    out, _, coords = permute_Tp(K, WIGNER2_AXES, [c] * 4)
    idx = np.unravel_index(np.argmax(out), out.shape)
    assert idx[:3] == (a, cc, b)
    assert coords[3][idx[3]] == -c[e]


def test_Tp_periodic_reflection_index():
    M = 8
    K = np.zeros((M,) * 4)
    K[0, 1, 2, 3] = 1.0
    out, _, _ = permute_Tp(K, WIGNER2_AXES, periodic_eta=True)
    assert out[0, 2, 1, (M - 3) % M] == 1.0


def test_Tp_preserves_norm_exactly(rng):
    K = _tensor(rng)
    out, _, _ = permute_Tp(K, KERNEL_AXES)
    assert out.shape == K.shape
    assert np.array_equal(np.sort(out.ravel()), np.sort(K.ravel()))


def test_Tp_rejects_untagged_axes(rng):
    with pytest.raises(ValueError):
        permute_Tp(_tensor(rng), ("a", "b", "c", "d"))
