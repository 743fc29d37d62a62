import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loopalg.link_rep import SectorMatrix
from loopalg.linkspace import link_dim
from loopalg.spectral import (
    AmbiguousClusterWarning,
    commuting_family_refine,
    detected_links,
    diagonal_blocks_diagonalizable,
    invariance_residual,
    is_diagonalizable,
    jordan_analyze,
    sector_spectrum,
)
from loopalg.tl_algebra import SpectralParams
from loopalg.transfer import build_rho_DN_sweep, fourier_coefficients, rho_FN

HALF = SpectralParams.rational(1, 2)


def _blocks_by_rank(a, mu, tol=1e-9):
    """Jordan block counts from numpy's matrix_rank of (A - mu)^k."""
    n = len(a)
    shifted = a - mu * np.eye(n)
    top = np.linalg.norm(shifted, 2)
    ranks = [n] + [np.linalg.matrix_rank(np.linalg.matrix_power(shifted, k), tol=tol * top**k)
                   for k in range(1, n + 1)]
    return {k: (ranks[k - 1] - ranks[k]) - (ranks[k] - ranks[k + 1])
            for k in range(1, n) if (ranks[k - 1] - ranks[k]) - (ranks[k] - ranks[k + 1])}


def test_braid_sector_values(generic):
    spec = sector_spectrum(rho_FN(6, generic))
    for d, ev in spec.items():
        assert len(ev) == link_dim(6, d)
        assert np.allclose(ev, 2 * (-1) ** d * math.cos(generic.lam * (d + 1)))


def test_identity_and_diagonal():
    eye = SectorMatrix(4, np.eye(6))
    assert all(np.allclose(v, 1) for v in sector_spectrum(eye).values())
    reps = jordan_analyze(eye)
    assert len(reps) == 1 and reps[0].block_size_histogram == {1: 6}
    diag = SectorMatrix(4, np.diag([1.0, 2, 2, 3, 3, 4]))
    assert is_diagonalizable(jordan_analyze(diag))


def test_sector_spectra_match_dense():
    p = SpectralParams.rational(1, 4, 0.3)
    m = build_rho_DN_sweep(4, p)
    ours = np.sort_complex(np.concatenate(list(sector_spectrum(m).values())))
    dense = np.sort_complex(np.linalg.eigvals(m.data))
    assert np.abs(ours - dense).max() < 1e-8


def test_rejects_non_triangular():
    a = np.zeros((6, 6))
    a[5, 0] = 1
    with pytest.raises(ValueError):
        sector_spectrum(SectorMatrix(4, a))


@pytest.mark.parametrize("n", [4, 6])
def test_critical_polymer_braid(n):
    f = rho_FN(n, HALF)
    reports = jordan_analyze(f)
    for r in reports:
        assert r.block_size_histogram == _blocks_by_rank(f.data, r.eigenvalue)
        assert sum(k * c for k, c in r.block_size_histogram.items()) == r.algebraic_multiplicity
    assert detected_links(reports) == ({(2, 0)} if n == 4 else {(2, 0), (6, 4)})


def test_four_site_block_count():
    # every sector value vanishes at this lambda; two d=2 states pair with d=0
    f = rho_FN(4, HALF)
    reports = jordan_analyze(f)
    assert len(reports) == 1
    assert reports[0].block_size_histogram == {1: 2, 2: 2} == _blocks_by_rank(f.data, 0)
    assert reports[0].sectors == [0, 2, 4]


@pytest.mark.parametrize("n", [4, 5, 6])
def test_percolation_is_diagonalizable(n):
    rng = np.random.default_rng(7)
    for u in rng.uniform(0.1 * math.pi / 3, 0.9 * math.pi / 3, size=3):
        m = build_rho_DN_sweep(n, SpectralParams.rational(1, 3, u))
        assert is_diagonalizable(jordan_analyze(m))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_irrational_has_no_blocks(n):
    m = build_rho_DN_sweep(n, SpectralParams.real(1.0, 0.37))
    assert is_diagonalizable(jordan_analyze(m))
    assert all(diagonal_blocks_diagonalizable(m).values())


@pytest.mark.parametrize("frac", [(1, 2), (1, 4), (1, 3), (2, 5)])
def test_links_only_between_equal_braid_values(frac):
    p = SpectralParams.rational(*frac)
    for n in (4, 6):
        for d, dp in detected_links(jordan_analyze(build_rho_DN_sweep(n, p.with_u(0.31 * p.lam)))):
            assert abs(math.cos(p.lam * (d + 1)) - math.cos(p.lam * (dp + 1))) < 1e-9


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        jordan_analyze(rho_FN(2, HALF), tol=0)


def test_close_clusters_warn():
    a = np.diag([1.0, 1.0 + 5e-9, 2, 2, 2, 3])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reps = jordan_analyze(SectorMatrix(4, a), tol=1e-9)
    assert any(issubclass(w.category, AmbiguousClusterWarning) for w in caught)
    assert any(r.warnings for r in reps)


def test_report_json():
    r = jordan_analyze(rho_FN(4, HALF))[0]
    assert '"block_size_histogram"' in r.to_json()


@given(st.lists(st.integers(1, 3), min_size=1, max_size=4), st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_histograms_of_random_jordan_forms(sizes, seed):
    # conjugated Jordan form on one eigenvalue
    n = sum(sizes)
    j = np.eye(n) * 0.7
    k = 0
    for s in sizes:
        for i in range(s - 1):
            j[k + i, k + i + 1] = 1
        k += s
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    m = q @ j @ q.T
    hist = {}
    for s in sizes:
        hist[s] = hist.get(s, 0) + 1
    # a single sector with n entries keeps the block-triangular check trivial
    from loopalg.spectral import _histogram, _rank_sequence

    assert _histogram(_rank_sequence(m - 0.7 * np.eye(n), 1e-9, np.linalg.norm(m, 2))) == hist


# --- commuting families ---------------------------------------------------

def test_family_isolates_jordan_pair():
    f = rho_FN(4, HALF)
    d = build_rho_DN_sweep(4, HALF.with_u(0.4))
    spaces = commuting_family_refine([f, d])
    assert sum(s.dim for s in spaces) == 6
    for s in spaces:
        assert invariance_residual(s, f.data) < 1e-8
        assert invariance_residual(s, d.data) < 1e-8
    # the D eigenvalue carrying the F Jordan block shows up as a 2-dim joint space
    defective = [r for r in jordan_analyze(d) if r.max_block > 1]
    assert defective
    for r in defective:
        joint = [s for s in spaces if abs(s.eigenvalues[1] - r.eigenvalue) < 1e-6]
        assert sum(s.dim for s in joint) == r.algebraic_multiplicity


def test_identity_family():
    spaces = commuting_family_refine([np.eye(5)])
    assert len(spaces) == 1 and spaces[0].dim == 5


def test_fourier_family():
    p = SpectralParams.real(0.9)
    coeffs = [c.data for c in fourier_coefficients(3, p).values()]
    spaces = commuting_family_refine(coeffs)
    assert sum(s.dim for s in spaces) == 3
    fresh = build_rho_DN_sweep(3, p.with_u(0.123)).data
    assert max(invariance_residual(s, fresh) for s in spaces) < 1e-8


def test_family_must_commute():
    a = np.diag([1.0, 2.0])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        commuting_family_refine([a, b])
