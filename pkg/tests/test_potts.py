import itertools
import math

import numpy as np
import pytest

from loopalg.potts import (
    FKGraph,
    PottsParams,
    Strip,
    boundary_prefactor,
    boundary_spin_sum,
    boundary_Z,
    eigenvalue_weights,
    euler_check_all,
    fk_bruteforce_Z,
    loop_trace,
    params_for_Q,
    spin_transfer,
    spin_Z,
    three_way,
)
from loopalg.tl_algebra import SpectralParams
from loopalg.transfer import CapacityError


def _naive_spin_Z(strip, pp, Q):
    """Direct enumeration of every spin configuration, one bond weight per box."""
    idx = strip.spin_index
    total = 0.0
    for sigma in itertools.product(range(Q), repeat=strip.n_spins):
        w = 1.0
        for x, y in strip.boxes:
            a, b = strip.bond(x, y)
            v = pp.v_J if x % 2 else pp.v_K
            w *= 1 + v * (sigma[a] == sigma[b])
        total += w
    return total


def test_critical_couplings():
    for Q in (1, 2, 3):
        p = params_for_Q(Q, 0.2)
        pp = PottsParams.critical(p, 4)
        assert pp.v_J * pp.v_K == pytest.approx(Q)
        assert pp.v_J / math.sqrt(Q) == pytest.approx(math.sin(p.lam - 0.2) / math.sin(0.2))
        assert float(p.beta) ** 2 == pytest.approx(Q)


def test_small_strip_sixteen_graphs():
    p = params_for_Q(2, 0.3)
    strip = Strip(2, 1)
    assert len(strip.boxes) == 4
    assert strip.n_spins == 3
    pp = PottsParams.critical(p, 2)
    assert fk_bruteforce_Z(2, 1, p) == pytest.approx(_naive_spin_Z(strip, pp, 2), rel=1e-13)


@pytest.mark.parametrize("N,M", [(2, 1), (2, 2), (4, 1), (4, 2), (6, 1)])
def test_extreme_graphs(N, M):
    strip = Strip(N, M)
    full = FKGraph(strip, (1 << len(strip.boxes)) - 1)
    assert full.N_c == 1
    assert full.N_b == 2 * N * M
    assert full.loop_count == 2 + (N - 1) * M
    empty = FKGraph(strip, 0)
    assert empty.N_c == strip.n_spins == (N + 1) * M
    assert empty.euler_holds()


@pytest.mark.parametrize("N,M", [(2, 1), (4, 1), (2, 2)])
def test_euler_every_graph(N, M):
    assert euler_check_all(N, M)


@pytest.mark.parametrize("Q,N,M", [(2, 2, 1), (2, 4, 1), (2, 4, 2), (3, 2, 1), (3, 4, 1), (2, 2, 3)])
def test_three_way_agreement(Q, N, M):
    p = params_for_Q(Q, 0.37 * params_for_Q(Q).lam)
    row = three_way(N, M, Q, p)
    assert row["max_rel_dev"] < 1e-8
    strip = Strip(N, M)
    if len(strip.boxes) <= 8:
        assert row["Z_spin"] == pytest.approx(_naive_spin_Z(strip, PottsParams.critical(p, N), Q), rel=1e-12)


def test_percolation_loop_side():
    # Q = 1: every graph has weight v_J^a v_K^b, so Z = prod (1 + v)
    p = params_for_Q(1, 0.4)
    pp = PottsParams.critical(p, 4)
    expected = ((1 + pp.v_J) * (1 + pp.v_K)) ** (4 * 1)
    assert pp.kappa * loop_trace(4, 1, p).real == pytest.approx(expected, rel=1e-10)
    assert fk_bruteforce_Z(4, 1, p) == pytest.approx(expected, rel=1e-12)


def test_transfer_matrix_properties():
    p = params_for_Q(2)
    lam = spin_transfer(4, 2, p)
    assert (lam > 0).all()
    flip = [int("".join(map(str, reversed(s))), 2) for s in itertools.product(range(2), repeat=2)]
    assert np.allclose(lam[np.ix_(flip, flip)], lam)
    for M in (1, 2, 3):
        tr = np.trace(np.linalg.matrix_power(lam, M))
        assert tr == pytest.approx(loop_trace(4, M, p).real, rel=1e-8)


def test_transfer_argument_checks():
    p = params_for_Q(2)
    with pytest.raises(ValueError):
        spin_transfer(3, 2, p)
    with pytest.raises(ValueError):
        spin_transfer(4, 1, p)
    with pytest.raises(CapacityError):
        spin_transfer(30, 3, p)
    with pytest.raises(CapacityError):
        fk_bruteforce_Z(6, 3, p)


@pytest.mark.parametrize("Q", [2, 3])
def test_eigenvalue_weights(Q):
    p = params_for_Q(Q, 0.3 * params_for_Q(Q).lam)
    rows = eigenvalue_weights(4, Q, p)
    for r in rows:
        if r["spin_multiplicity"]:
            assert r["in_loop_spectrum"]
        assert r["loop_weight"] == pytest.approx(r["spin_multiplicity"], abs=1e-6)


@pytest.mark.parametrize("kind", "abcd")
@pytest.mark.parametrize("N", [2, 4])
def test_boundary_against_spin_sums(kind, N):
    Q = 2
    p = params_for_Q(Q, 0.3)
    z = boundary_Z(kind, N, 1, p)
    assert abs(z.imag) < 1e-12 * abs(z)
    assert z.real == pytest.approx(boundary_spin_sum(kind, N, 1, Q, p), rel=1e-10)


def test_boundary_three_states():
    p = params_for_Q(3, 0.2)
    for kind in "abcd":
        z = boundary_Z(kind, 2, 1, p)
        assert z.real == pytest.approx(boundary_spin_sum(kind, 2, 1, 3, p), rel=1e-10)


def test_boundary_prefactors():
    p = params_for_Q(2, 0.3)
    beta = float(p.beta)
    c = boundary_prefactor("c", 4, 1, p)
    assert boundary_prefactor("a", 4, 1, p) == pytest.approx(c * beta ** (-6))
    assert boundary_prefactor("b", 4, 1, p) == pytest.approx(c * beta ** (-6))
    assert boundary_prefactor("d", 4, 1, p) == pytest.approx(c * beta ** (-3))


@pytest.mark.parametrize("frac", [(1, 3), (1, 4), (1, 6)])
def test_crossing_coefficient(frac):
    from loopalg.potts import boundary_states, sandwich
    from loopalg.tl_algebra import gram_matrix
    from loopalg.transfer import build_rho_DN_sweep

    p = SpectralParams.rational(*frac, 0.2)
    beta = float(p.beta)
    dm = build_rho_DN_sweep(4, p).data.astype(complex)
    g = gram_matrix(4, p).astype(complex)
    st = boundary_states(4)
    ff = sandwich(st["F"], st["F"], dm, g)
    xx = sandwich(st["X"], st["X"], dm, g)
    za = boundary_Z("a", 4, 1, p) / boundary_prefactor("a", 4, 1, p)
    zb = boundary_Z("b", 4, 1, p) / boundary_prefactor("b", 4, 1, p)
    assert za == pytest.approx(ff - beta * xx, rel=1e-12)
    assert zb == pytest.approx(ff + beta * (beta**2 - 1) * xx, rel=1e-12)
    if frac == (1, 3):
        assert zb == pytest.approx(ff, rel=1e-12)


def test_boundary_input_checks():
    p = params_for_Q(2)
    with pytest.raises(ValueError):
        boundary_Z("c", 3, 1, p)
    with pytest.raises(ValueError):
        boundary_Z("e", 4, 1, p)
