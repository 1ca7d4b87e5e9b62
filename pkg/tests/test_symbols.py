import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerfio.catalog import family_phase, symbol_bracket, symbol_gaussian, symbol_one, symbol_sin_radial
from wignerfio.grid import weight_eval
from wignerfio.symbols import (
    Box,
    CertificationError,
    Symbol,
    TamePhase,
    finite_difference,
    hormander_certify,
    multi_indices,
    shubin_certify,
    tame_certify,
)

BOX = Box(4.0, 2, 17)


def _bracket_grad(m, z):
    # ∂_i <z>^m = m z_i <z>^{m-2}
    return m * z * weight_eval(z, m - 2)[..., None]


def test_multi_indices_count():
    assert sorted(multi_indices(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert len(list(multi_indices(2, 4))) == 5


def test_finite_difference_polynomial_exact():
    f = lambda z: z[..., 0] ** 3 * z[..., 1]
    z = np.array([[0.5, -1.5]])
    # ∂x∂y (x^3 y) = 3x^2
    assert abs(finite_difference(f, (1, 1), z)[0] - 0.75) <= 1e-6


# ---- Shubin classes ----------------------------------------------------------

def test_bracket_zeroth_constant_is_one():
    rep = shubin_certify(symbol_bracket(-6), -6)
    assert rep["constants"]["0,0"] == 1.0
    assert rep["member"]
    assert all(np.isfinite(v) for v in rep["constants"].values())


def test_bracket_first_derivatives_match_closed_form():
    a = symbol_bracket(-6)
    z = BOX.lattice()
    g = _bracket_grad(-6, z)
    for i, alpha in enumerate([(1, 0), (0, 1)]):
        fd = a.derivative(alpha, z).real
        assert np.max(np.abs(fd - g[:, i])) <= 1e-4 * np.max(np.abs(g[:, i]))


def test_one_has_trivial_constants():
    rep = shubin_certify(symbol_one(), 0, box=BOX)
    assert rep["constants"]["0,0"] == 1.0
    assert all(v == 0.0 for k, v in rep["constants"].items() if k != "0,0")
    assert rep["member"] and rep["derivatives"] == "closed-form"


@pytest.mark.parametrize("m", [-10, -6, -2, 0])
def test_gaussian_in_every_order(m):
    rep = shubin_certify(symbol_gaussian(), m, box=BOX)
    assert rep["member"]
    assert all(np.isfinite(v) for v in rep["constants"].values())


def test_k_max_limit():
    with pytest.raises(CertificationError):
        shubin_certify(symbol_one(), 0, k_max=5)
    with pytest.raises(CertificationError):
        hormander_certify(symbol_one(), k_max=5)


def test_overflow_is_reported():
    a = Symbol(lambda z: np.exp(1e3 * np.sum(z**2, axis=-1)), 0.0, "blowup")
    with pytest.raises(CertificationError):
        shubin_certify(a, 0, k_max=1)


@pytest.mark.parametrize("make,m", [(lambda: symbol_bracket(-6), -6), (lambda: symbol_bracket(-8), -8),
                                    (symbol_gaussian, -10)])
def test_certification_monotone_in_order(make, m):
    a = make()
    low = shubin_certify(a, m, k_max=2, box=BOX)
    assert low["member"]
    for mp in (m + 1, m + 3):
        high = shubin_certify(a, mp, k_max=2, box=BOX)
        assert high["member"]
        # v_{m-m'} <= 1, so the constants can only shrink
        for key, c in high["constants"].items():
            assert c <= low["constants"][key] * (1 + 1e-12)


# ---- Hormander class -----------------------------------------------------------

def test_one_in_hormander_class():
    rep = hormander_certify(symbol_one(), box=BOX)
    assert rep["member"]
    assert set(rep["constants"].values()) <= {0.0, 1.0}


def test_sin_radial_outside_hormander_class():
    rep = hormander_certify(symbol_sin_radial(), k_max=1, box=BOX)
    assert not rep["member"]
    assert rep["constants_enlarged"]["1,0"] > 1.5 * rep["constants"]["1,0"]


def test_bracket_minus_two_in_hormander_class():
    assert hormander_certify(symbol_bracket(-2), box=BOX)["member"]


# ---- closed-form derivative contract -------------------------------------------

probe = st.tuples(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5)).map(np.array)


@given(probe, st.sampled_from([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]), st.sampled_from([0.5, 1.0]))
def test_gaussian_closed_form_matches_fd(z, alpha, eps):
    a = symbol_gaussian(eps)
    cf = a.derivative(alpha, z)
    fd = a.derivative(alpha, z, h=1e-4)
    assert abs(fd - cf) <= 1e-4 * max(abs(cf), 1e-3)


@given(probe, st.sampled_from([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (1, 2)]),
       st.floats(0, 0.3), st.floats(-1, 1))
def test_phase_closed_form_matches_fd(z, alpha, eps, beta):
    ph = family_phase(0.3, beta, eps)
    cf = ph.derivative(alpha, z)
    fd = ph.derivative(alpha, z, h=1e-3)
    assert abs(fd - cf) <= 1e-4 * max(abs(cf), 1.0)


# ---- tame phases -------------------------------------------------------------

def test_bilinear_phase_tame_table():
    rep = tame_certify(family_phase(), box=BOX)
    assert rep["tame"] and rep["delta"] == 1.0
    assert all(v == 0.0 for k, v in rep["bounds"].items() if sum(map(int, k.split(","))) >= 3)
    assert rep["bounds"]["1,1"] == 1.0


def test_free_particle_tame_table():
    rep = tame_certify(family_phase(beta=1.0), box=BOX)
    assert rep["delta"] == 1.0
    assert rep["bounds"]["0,2"] == 1.0


def test_sin_perturbed_delta():
    rep = tame_certify(family_phase(eps=0.1), box=BOX)
    z = BOX.lattice()
    expected = np.min(np.abs(1 + 0.1 * np.cos(z[:, 0]) * np.cos(z[:, 1])))
    assert rep["delta"] >= 0.9
    assert rep["delta"] == pytest.approx(expected, abs=1e-14)


def test_degenerate_phase_not_tame():
    # Phi = x^2/2 + eta^2/2 has vanishing mixed Hessian
    ph2 = TamePhase(lambda z: 0.5 * z[..., 0] ** 2 + 0.5 * z[..., 1] ** 2, 1, "no-mixing")
    assert not tame_certify(ph2, k_max=2, box=Box(2.0, 2, 5))["tame"]
