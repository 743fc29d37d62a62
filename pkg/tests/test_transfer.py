import math

import numpy as np
import pytest

from loopalg.link_rep import rho, rho_generator
from loopalg.linkspace import Connectivity, LinkState, eta_decode, eta_encode, get_basis, mu_encode, parse_link_notation
from loopalg.tl_algebra import SpectralParams, generator
from loopalg.transfer import (
    W_STAR,
    CapacityError,
    build_DN_brute,
    build_FN_direct,
    build_rho_DN_sweep,
    fn_column_recursive,
    fn_element_2x2,
    fn_element_8x8,
    fourier_coefficients,
    fourier_evaluate,
    rho_FN,
    transfer_blocks,
)


def test_two_site_coefficients():
    p = SpectralParams.real(0.7, 0.3)
    d = build_DN_brute(2, p)
    s, c, b = math.sin(0.3), math.sin(0.4), p.beta
    assert d.coeff(generator(1, 2)) == pytest.approx(2 * b * (s**3 * c + s * c**3) + (4 + b * b) * s * s * c * c)
    assert d.coeff(Connectivity.identity(2)) == pytest.approx(b * (s**4 + s * s * c * c + c**4) + 2 * (s**3 * c + s * c**3))


@pytest.mark.parametrize("n", range(1, 6))
def test_sweep_matches_brute(n, generic):
    a = rho(build_DN_brute(n, generic), n, generic).data
    assert np.abs(a - build_rho_DN_sweep(n, generic).data).max() < 1e-12


@pytest.mark.parametrize("n", range(1, 6))
def test_braid_routes_agree(n, generic):
    direct = rho(build_FN_direct(n, generic), n, generic).data
    assert np.abs(direct - rho_FN(n, generic).data).max() < 1e-12
    assert np.abs(direct - fn_column_recursive(n, generic).data).max() < 1e-12


@pytest.mark.parametrize("n", range(2, 7))
def test_diagonal_blocks(n, generic):
    f = rho_FN(n, generic)
    lam = generic.lam
    for d in f.sectors:
        blk = f.block(d, d)
        assert np.abs(blk - 2 * (-1) ** d * math.cos(lam * (d + 1)) * np.eye(len(blk))).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_fourier_has_only_even_cosines(n, generic):
    coeffs = fourier_coefficients(n, generic)
    for v in (0.11, 0.57, 1.3):
        fresh = build_rho_DN_sweep(n, generic.with_u(v + generic.lam / 2)).data
        assert np.abs(fourier_evaluate(coeffs, v) - fresh).max() < 1e-12
    assert np.abs(coeffs[2 * n].data - 2.0 ** (1 - 2 * n) * rho_FN(n, generic).data).max() < 1e-12


@pytest.mark.parametrize("n", [3, 4, 5])
def test_transfer_matrices_commute(n, generic):
    d1 = build_rho_DN_sweep(n, generic.with_u(0.2)).data
    d2 = build_rho_DN_sweep(n, generic.with_u(0.9)).data
    assert np.abs(d1 @ d2 - d2 @ d1).max() < 1e-11
    f = rho_FN(n, generic).data
    for i in range(1, n):
        e = rho_generator(i, n, generic).data
        assert np.abs(f @ e - e @ f).max() < 1e-11


def test_block_matrices():
    p = SpectralParams.real(0.77)
    blk = transfer_blocks(p)
    for a, b in (("N1", "N-1"), ("N-1", "N1"), ("N0", "N0")):
        assert np.abs(blk[a] @ blk["G"] - blk["G"] @ blk[b].conj().T).max() < 1e-13
    assert np.allclose(W_STAR @ W_STAR, W_STAR)


@pytest.mark.parametrize("lam", [0.3, 0.77, 1.4, 2.2, 2.9])
def test_closed_form_element(lam):
    p = SpectralParams.real(lam)
    expected = -(2**5) * math.cos(lam) * math.sin(lam) ** 2 * math.sin(lam / 2) ** 2
    assert fn_element_8x8((0, 1, -1, 0), 4, p) == pytest.approx(expected, rel=1e-12, abs=1e-14)
    target = parse_link_notation("2", 4)
    f = rho_FN(4, p)
    b = get_basis(4)
    assert f.data[b.index[target], b.index[LinkState.all_defects(4)]] == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("d", range(1, 8))
def test_zero_word_is_diagonal_value(d, generic):
    value = 2 * (-1) ** d * math.cos(generic.lam * (d + 1))
    assert fn_element_8x8((0,) * d, d, generic) == pytest.approx(value, abs=1e-12)
    assert fn_element_2x2((d,), d, generic) == pytest.approx(value, abs=1e-12)


@pytest.mark.parametrize("r", range(2, 8))
def test_column_routes_on_whole_basis(r, generic):
    f = rho_FN(r, generic)
    b = get_basis(r)
    col = b.index[LinkState.all_defects(r)]
    for w in b.states:
        x = f.data[b.index[w], col]
        assert fn_element_8x8(eta_encode(w), r, generic) == pytest.approx(x, abs=1e-11)
        mu = mu_encode(w)
        if mu is not None:
            assert fn_element_2x2(mu, r, generic) == pytest.approx(x, abs=1e-11)


def test_three_bubble_word_vanishes(generic):
    w = eta_decode((1, 1, 1, -1, -1, -1, 0))
    assert abs(fn_element_8x8(eta_encode(w), 7, generic)) < 1e-12


def test_brute_capacity():
    with pytest.raises(CapacityError):
        build_DN_brute(9, SpectralParams.real(0.7))
