import itertools
import math

import pytest
from hypothesis import given, strategies as st

from loopalg.linkspace import (
    DEFECT,
    Connectivity,
    LinkError,
    LinkState,
    Star,
    enumerate_connectivities,
    eta_decode,
    eta_encode,
    eta_from_text,
    eta_to_text,
    format_link_notation,
    get_basis,
    insert_arcs,
    link_dim,
    max_bubble,
    mu_decode,
    mu_encode,
    parse_link_notation,
    strip_arcs,
)


def brute_link_states(n):
    """Every partner array that passes validation, found by trying all of them."""
    out = []
    for p in itertools.product(range(-1, n), repeat=n):
        try:
            out.append(LinkState(p))
        except LinkError:
            pass
    return out


def noncrossing_oracle(p):
    n = len(p)
    for i in range(n):
        j = p[i]
        if j == DEFECT:
            for a in range(n):
                b = p[a]
                if b != DEFECT and min(a, b) < i < max(a, b):
                    return False
        elif p[j] != i or j == i:
            return False
    arcs = [(i, p[i]) for i in range(n) if p[i] > i]
    return not any(a < c < b < e for (a, b) in arcs for (c, e) in arcs)


@pytest.mark.parametrize("n", range(1, 7))
def test_basis_matches_brute_force(n):
    brute = brute_link_states(n)
    assert all(noncrossing_oracle(s.partner) for s in brute)
    assert set(brute) == set(get_basis(n).states)
    for d in range(n + 1):
        assert sum(1 for s in brute if s.d == d) == link_dim(n, d)


def test_n4_canonical_order():
    states = [format_link_notation(s) for s in get_basis(4).states]
    assert len(states) == 6
    assert states == ["N=4; arcs=1,3", "N=4; arcs=2,1", "N=4; arcs=1", "N=4; arcs=2",
                      "N=4; arcs=3", "N=4; arcs="]


def test_n6_counts():
    b = get_basis(6)
    assert len(b) == 20
    assert sum(1 for s in b.states if s.d == 2) == 9


@pytest.mark.parametrize("n", range(1, 6))
def test_connectivity_count_is_catalan(n):
    assert len(enumerate_connectivities(n)) == math.comb(2 * n, n) // (n + 1)


def test_invalid_states_rejected():
    with pytest.raises(LinkError):
        LinkState((2, DEFECT, 0))  # defect under an arc
    with pytest.raises(LinkError):
        LinkState((2, 3, 0, 1))  # crossing
    with pytest.raises(LinkError):
        Connectivity(2, (2, 3, 0, 1)) if False else Connectivity(2, (3, 2, 1, 0))


def test_notation_examples():
    w = parse_link_notation("2,2,7,7", 10)
    assert w.arcs == ((0, 3), (1, 2), (5, 8), (6, 7))
    assert parse_link_notation("N=10; arcs=2,2,7,7") == w
    assert eta_encode(w) == (1, 1, -1, -1, 0, 1, 1, -1, -1, 0)
    assert eta_from_text(eta_to_text(eta_encode(w))) == eta_encode(w)


def test_mu_examples():
    assert mu_encode(parse_link_notation("3,11,13,19", 20)) == (3, 8, 2, 6, 1)
    w = parse_link_notation("3,5,4,12,12,19", 20)
    mu = mu_encode(w)
    assert [x if isinstance(x, int) else "*" for x in mu] == [2, "*", 5, "*", 6, 1]
    assert mu_decode(mu, 20) == w
    assert mu_encode(parse_link_notation("3,3,3", 6)) is None


def test_mu_single_token():
    assert mu_decode((5,)) == LinkState.all_defects(5)
    with pytest.raises(LinkError):
        mu_decode((Star(1), 2))


states = st.integers(1, 9).flatmap(lambda n: st.sampled_from(get_basis(n).states))


@given(states)
def test_eta_roundtrip(w):
    assert eta_decode(eta_encode(w)) == w


@given(states)
def test_mu_roundtrip(w):
    mu = mu_encode(w)
    if max_bubble(w) <= 2:
        assert mu_decode(mu, w.n) == w
    else:
        assert mu is None


@given(states)
def test_notation_roundtrip(w):
    assert parse_link_notation(format_link_notation(w)) == w


@given(states)
def test_json_roundtrip(w):
    assert LinkState.from_json(w.to_json()) == w


@given(states, st.data())
def test_insert_strip(host, data):
    inner = data.draw(st.sampled_from(get_basis(host.d).states)) if host.d else None
    if inner is None:
        return
    w = insert_arcs(inner, host)
    assert set(host.arcs) <= set(w.arcs)
    assert w.d == inner.d
    assert insert_arcs(LinkState.all_defects(host.d), host) == host
    assert strip_arcs(host) == host.defects
