"""Double-row transfer matrix D_N(lambda, u) and its braid limit F_N(lambda).

Geometry: two rows of N boxes. Each box joins its four edge midpoints in one of
two ways; state ``A`` joins bottom-right and left-top, state ``B`` joins
bottom-left and top-right. A half-arc closes the left edges of the two rows
in the first column, another closes the right edges in the last column.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Any, Sequence

import numpy as np

from ._strands import INF, trace
from .linkspace import DEFECT, Connectivity, LinkState, get_basis, insert_arcs
from .link_rep import SectorMatrix
from .tl_algebra import SpectralParams, TLElement

BRUTE_MAX_N = 8
SWEEP_MAX_N = 14


class CapacityError(ValueError):
    """Requested size is beyond what the chosen algorithm supports."""


# box state -> pairs of edges (bottom, left, top, right) = (0, 1, 2, 3)
BOX_PAIRS = {"A": ((0, 3), (1, 2)), "B": ((0, 1), (2, 3))}


def box_weights(params: SpectralParams, kind: str = "D") -> tuple[Any, Any, Any, Any]:
    """(lower A, lower B, upper A, upper B) face weights."""
    if kind == "D":
        lam, u = params.lam, params.u
        s_u, s_lu = params.sin(u), params.sin(lam - u)
        return s_lu, s_u, s_u, s_lu
    if kind == "F":
        lam = params.lam
        minus = -1j * params.expi(-lam / 2)
        plus = 1j * params.expi(lam / 2)
        return minus, plus, plus, minus
    raise ValueError(f"unknown transfer kind {kind!r}")


# --- brute-force expansion -----------------------------------------------

def _double_row_segments(n: int, low: Sequence[str], up: Sequence[str]) -> list[tuple[int, int]]:
    b = lambda k: k
    t = lambda k: n + k
    m = lambda k: 2 * n + k
    cl = lambda j: 3 * n + j
    cu = lambda j: 4 * n + 1 + j
    segs = [(cl(0), cu(0)), (cl(n), cu(n))]
    for k in range(n):
        edges = (b(k), cl(k), m(k), cl(k + 1))
        segs += [(edges[x], edges[y]) for x, y in BOX_PAIRS[low[k]]]
        edges = (m(k), cu(k), t(k), cu(k + 1))
        segs += [(edges[x], edges[y]) for x, y in BOX_PAIRS[up[k]]]
    return segs


def _brute(n: int, weights, beta) -> TLElement:
    if n > BRUTE_MAX_N:
        raise CapacityError(f"brute-force expansion needs N <= {BRUTE_MAX_N}, got N={n}")
    wl = {"A": weights[0], "B": weights[1]}
    wu = {"A": weights[2], "B": weights[3]}
    terminals = list(range(2 * n))
    out: dict[Connectivity, Any] = {}
    rows = list(itertools.product("AB", repeat=n))
    for low in rows:
        w_low = np.prod([wl[s] for s in low])
        for up in rows:
            segs = _double_row_segments(n, low, up)
            partner, loops = trace(5 * n + 2, segs, terminals)
            c = Connectivity(n, tuple(partner[k] for k in terminals))
            w = w_low * np.prod([wu[s] for s in up]) * beta**loops
            out[c] = out.get(c, 0) + w
    return TLElement(n, out)


def build_DN_brute(n: int, params: SpectralParams) -> TLElement:
    """D_N(lambda, u) as an element of TL_N by summing all 2^(2N) tilings."""
    return _brute(n, box_weights(params, "D"), params.beta)


def build_FN_direct(n: int, params: SpectralParams) -> TLElement:
    """F_N(lambda) as an element of TL_N from the braid-box expansion."""
    return _brute(n, box_weights(params, "F"), params.beta)


# --- frontier sweep ------------------------------------------------------

def sweep_apply(v: LinkState, weights, beta) -> dict[LinkState, Any]:
    """Apply the double row to one link state, column by column.

    The frontier holds the finished bottom points, the two cut points between
    columns and the top points still waiting for an arc of ``v``. Frontier
    patterns that coincide are merged.
    """
    n = v.n
    vp = v.partner
    wl = {"A": weights[0], "B": weights[1]}
    wu = {"A": weights[2], "B": weights[3]}
    pend: list[int] = []
    states: dict[tuple[int, ...], Any] = {(1, 0): 1}
    for k in range(n):
        s = k + 2 + len(pend)
        new_pend = sorted([j for j in pend if j != k] + ([vp[k]] if vp[k] > k else []))
        nb, nl, nu, mid, tk = s, s + 1, s + 2, s + 3, s + 4
        new_p_node = s + 5
        base_nodes = s + 6
        fixed = []
        if vp[k] == DEFECT:
            top_escape = [tk]
        else:
            top_escape = []
            if vp[k] > k:
                fixed.append((tk, new_p_node))
            else:
                fixed.append((tk, k + 2 + pend.index(k)))
        old_pend_slot = {j: k + 2 + i for i, j in enumerate(pend)}
        term_pend = [new_p_node if j == vp[k] and vp[k] > k else old_pend_slot[j] for j in new_pend]
        terminals = list(range(k)) + [nb, nl, nu] + term_pend
        pos = {node: i for i, node in enumerate(terminals)}
        nxt: dict[tuple[int, ...], Any] = {}
        for st, coef in states.items():
            segs = list(fixed)
            escape = list(top_escape)
            extra = base_nodes
            for i, j in enumerate(st):
                if j == INF:
                    segs.append((i, extra))
                    escape.append(extra)
                    extra += 1
                elif i < j:
                    segs.append((i, j))
            for low in "AB":
                e = (nb, k, mid, nl)
                lsegs = [(e[x], e[y]) for x, y in BOX_PAIRS[low]]
                for up in "AB":
                    e2 = (mid, k + 1, tk, nu)
                    usegs = [(e2[x], e2[y]) for x, y in BOX_PAIRS[up]]
                    partner, loops = trace(extra, segs + lsegs + usegs, terminals, escape)
                    key = tuple(INF if partner[t] == INF else pos[partner[t]] for t in terminals)
                    nxt[key] = nxt.get(key, 0) + coef * wl[low] * wu[up] * beta**loops
        states = nxt
        pend = new_pend
    out: dict[LinkState, Any] = {}
    for st, coef in states.items():
        segs = [(n, n + 1)]
        escape = []
        extra = n + 2
        for i, j in enumerate(st):
            if j == INF:
                segs.append((i, extra))
                escape.append(extra)
                extra += 1
            elif i < j:
                segs.append((i, j))
        partner, loops = trace(extra, segs, list(range(n)), escape)
        w = LinkState(tuple(DEFECT if partner[i] == INF else partner[i] for i in range(n)))
        out[w] = out.get(w, 0) + coef * beta**loops
    return out


def _sweep_matrix(n: int, weights, params: SpectralParams) -> SectorMatrix:
    if n > SWEEP_MAX_N:
        raise CapacityError(f"frontier sweep supports N <= {SWEEP_MAX_N}, got N={n}")
    basis = get_basis(n)
    dtype = object if params.extended else complex
    data = np.zeros((len(basis), len(basis)), dtype=dtype)
    if params.extended:
        data[:, :] = params.scalar(0)
    for col, v in enumerate(basis.states):
        for w, x in sweep_apply(v, weights, params.beta).items():
            data[basis.index[w], col] += x
    return SectorMatrix(n, data)


def build_rho_DN_sweep(n: int, params: SpectralParams) -> SectorMatrix:
    """rho(D_N(lambda, u)) built column by column with the frontier sweep."""
    return _sweep_matrix(n, box_weights(params, "D"), params)


def rho_FN(n: int, params: SpectralParams) -> SectorMatrix:
    """rho(F_N(lambda)) via the frontier sweep with braid weights."""
    return _sweep_matrix(n, box_weights(params, "F"), params)


# --- Fourier decomposition -----------------------------------------------

def fourier_coefficients(n: int, params: SpectralParams) -> dict[int, SectorMatrix]:
    """C_0, C_2, ..., C_2N with D(lambda, v + lambda/2) = C_0/2 + sum C_2i cos(2 i v)."""
    vs = [np.pi * k / (2 * n + 1) for k in range(2 * n + 1)]
    samples = np.array([build_rho_DN_sweep(n, params.with_u(v + params.lam / 2)).data.astype(complex)
                        for v in vs])
    a = np.array([[0.5 if i == 0 else np.cos(2 * i * v) for i in range(n + 1)] for v in vs])
    # 2N+1 samples for N+1 cosines: least squares, residual is the check
    dim = samples.shape[1]
    sol, *_ = np.linalg.lstsq(a, samples.reshape(len(vs), -1), rcond=None)
    sol = sol.reshape(n + 1, dim, dim)
    return {2 * i: SectorMatrix(n, sol[i]) for i in range(n + 1)}


def fourier_evaluate(coeffs: dict[int, SectorMatrix], v: float) -> np.ndarray:
    out = 0.5 * coeffs[0].data
    for k, c in coeffs.items():
        if k:
            out = out + c.data * np.cos(k * v)
    return out


# --- recursive columns of F_N --------------------------------------------

@lru_cache(maxsize=None)
def _last_column(d: int, lam: float, frac_key) -> tuple[tuple[LinkState, complex], ...]:
    params = SpectralParams(lam, 0.0, frac_key)
    if d == 0:
        return ()
    col = sweep_apply(LinkState.all_defects(d), box_weights(params, "F"), params.beta)
    return tuple(col.items())


def fn_column_recursive(n: int, params: SpectralParams) -> SectorMatrix:
    """rho(F_N) assembled from the all-defect columns of rho(F_d), d <= N.

    Arcs of an incoming state pass straight through F_N, so the column of a
    state with d defects is the all-defect column of F_d with the arcs put back.
    """
    basis = get_basis(n)
    data = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, v in enumerate(basis.states):
        d = v.d
        if d == 0:
            # the two boundary half-arcs close on themselves
            data[col, col] = params.beta
            continue
        for w, x in _last_column(d, float(params.lam), params.frac):
            data[basis.index[insert_arcs(w, v)], col] += x
    return SectorMatrix(n, data)


# --- closed-form matrix elements of F_N ----------------------------------

def transfer_blocks(params: SpectralParams) -> dict[str, np.ndarray]:
    """The 8x8 matrices N_0, N_1, N_-1, G and vector I of the braid column product."""
    q = complex(params.q)
    qi = 1 / q
    n0 = np.zeros((8, 8), dtype=complex)
    n0[0, :2] = [-q, 1 - qi**2]
    n0[1, 1], n0[1, 3] = -qi, 1
    n0[2, :3] = [-q, 1 - qi, 1]
    n0[3, 3] = 1
    n0[7, 1] = -qi
    n1 = np.zeros((8, 8), dtype=complex)
    n1[0, 4] = 1 - qi**2
    n1[1, 4], n1[1, 5] = -qi, 1
    n1[2, 4] = 1 - qi
    n1[3, 5] = 1
    n1[4, 6] = 1
    n1[5, 6] = 1
    n1[7, 4] = -qi
    nm1 = np.zeros((8, 8), dtype=complex)
    nm1[4, 0], nm1[4, 2], nm1[4, 7] = -q, 1, 1
    nm1[5, 0], nm1[5, 1], nm1[5, 7] = -q, 1, 1
    nm1[6, 4] = 1
    g = np.array([
        [complex(params.beta), 1, 1, 0, 0, 0, 0, 1],
        [1, 0, 1, 0, 0, 0, 0, 0],
        [1, 1, 1, 1, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 1, 0, 0],
        [0, 0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0],
        [1, 0, 0, 0, 0, 0, 0, 0],
    ], dtype=complex)
    unit = np.zeros(8, dtype=complex)
    unit[0] = 1
    blocks = {"N0": n0, "N1": n1, "N-1": nm1, "G": g, "I": unit}
    for key in ("N1", "N-1"):
        if np.abs(np.linalg.matrix_power(blocks[key], 3)).max() > 1e-12:
            raise AssertionError(f"{key} is not nilpotent of degree 3")
    return blocks


def fn_element_8x8(word: Sequence[int], r: int, params: SpectralParams) -> complex:
    """Coefficient of the state with eta word ``word`` in rho(F_r) applied to r defects."""
    if len(word) != r or any(s not in (-1, 0, 1) for s in word):
        raise ValueError("eta word must have r symbols in {-1, 0, 1}")
    blk = transfer_blocks(params)
    row = blk["I"].conj()
    for s in word:
        row = row @ blk[{0: "N0", 1: "N1", -1: "N-1"}[s]]
    return complex(row @ blk["G"] @ blk["I"])


def _v2(m, params: SpectralParams) -> np.ndarray:
    S = params.S
    return 2 * np.array([S(m), S((m - 1) / 2) * S(m / 2) / S(0.5)], dtype=complex)


def _w2(m, params: SpectralParams) -> np.ndarray:
    S, C = params.S, params.C
    return np.array([
        [S((2 * m - 1) / 2) / S(0.5), S(m / 2) * S((m - 2) / 2) / S(0.5) ** 2],
        [2 * C(m - 1), S((2 * m - 3) / 2) / S(0.5)],
    ], dtype=complex)


W_STAR = np.array([[1, 0], [1, 0]], dtype=complex)
G_PRIME = np.array([[1, 1], [1, 0]], dtype=complex)


def fn_element_2x2(tokens: Sequence, r: int, params: SpectralParams) -> complex:
    """Same coefficient from the gap word of a state with 1- and 2-bubbles only."""
    from .linkspace import Star

    if tokens is None:
        raise ValueError("state has bubbles deeper than 2")
    ints = sum(t for t in tokens if not isinstance(t, Star))
    stars = sum(2 * t.inner for t in tokens if isinstance(t, Star))
    if ints + stars != r:
        raise ValueError("gap word does not describe r points")
    if len(tokens) == 1:
        # no bubble at all: the column product degenerates to the diagonal value
        return complex(2 * (-1) ** r * params.cos(params.lam * (r + 1)))
    acc = _v2(tokens[0], params)
    for t in tokens[1:-1]:
        acc = acc @ (W_STAR if isinstance(t, Star) else _w2(t, params))
    return complex(acc @ G_PRIME @ _v2(tokens[-1], params))
