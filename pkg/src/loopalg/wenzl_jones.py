"""Wenzl-Jones projectors, the sector projectors P^d and their coefficients.

Throughout, S_k = sin(k Lambda) and C_k = cos(k Lambda) with Lambda = pi - lambda.
The coefficient P^r_w is the component along ``w`` of P^r applied to the
state with r defects.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np

from .link_rep import SectorMatrix, apply_connectivity
from .linkspace import (
    DEFECT,
    LinkState,
    arc_depths,
    get_basis,
    insert_arcs,
    one_bubbles,
)
from .tl_algebra import SingularParameterError, SpectralParams, TLElement, generator


@dataclass
class ProjectedState:
    """P^d applied to ``source``; ``expansion`` maps link states to coefficients."""

    source: LinkState
    expansion: dict[LinkState, Any] = field(default_factory=dict)

    def coeff(self, w: LinkState):
        return self.expansion.get(w, 0)

    def vector(self) -> np.ndarray:
        basis = get_basis(self.source.n)
        out = np.zeros(len(basis), dtype=complex)
        for w, x in self.expansion.items():
            out[basis.index[w]] += complex(x)
        return out


# --- exact zero tests ----------------------------------------------------

def _lam_frac(params: SpectralParams) -> Fraction | None:
    return params.Lam_frac


def sin_vanishes(k, params: SpectralParams, tol: float = 1e-13) -> bool:
    """S_k == 0, decided exactly for rational lambda."""
    lf = _lam_frac(params)
    if lf is not None:
        return (Fraction(k) * lf).denominator == 1
    return abs(params.S(k)) < tol


def cos_vanishes(k, params: SpectralParams, tol: float = 1e-13) -> bool:
    """C_k == 0, decided exactly for rational lambda."""
    lf = _lam_frac(params)
    if lf is not None:
        return (Fraction(k) * lf - Fraction(1, 2)).denominator == 1
    return abs(params.C(k)) < tol


# --- WJ_N ----------------------------------------------------------------

def wj_boxes(n: int) -> list[tuple[int, int]]:
    """(label k, generator index) for each box of WJ_N, leftmost factor first.

    Box k carries id + (S_k/S_{k+1}) e; boxes of label k sit on generator
    N-k at heights -(N-k-1), ..., N-k-1 in steps of two, and the product runs
    over heights from bottom to top.
    """
    out = []
    for y in range(-(n - 2), n - 1):
        for k in range(1, n):
            if abs(y) <= n - k - 1 and (y - (n - k - 1)) % 2 == 0:
                out.append((k, n - k))
    return out


def _check_boxes(n: int, params: SpectralParams):
    for k in range(1, n):
        if sin_vanishes(k + 1, params):
            raise SingularParameterError(f"S_{k + 1} vanishes: box {k} of WJ_{n} is undefined", index=k)


def build_WJ(n: int, params: SpectralParams) -> TLElement:
    """WJ_N as an element of TL_N, multiplied out box by box."""
    if n < 1:
        raise ValueError("N must be positive")
    _check_boxes(n, params)
    beta = params.beta
    acc = TLElement.identity(n)
    for k, g in wj_boxes(n):
        box = TLElement.identity(n) + (params.S(k) / params.S(k + 1)) * TLElement.gen(g, n)
        acc = acc.mul(box, beta)
    return acc


def embed(x: TLElement, m: int) -> TLElement:
    """Include TL_n into TL_m by adding through-lines on the right."""
    from .linkspace import Connectivity

    n = x.n
    out = {}
    for c, coef in x.terms.items():
        p = [0] * (2 * m)
        for i, j in enumerate(c.partner):
            ii = i if i < n else i - n + m
            jj = j if j < n else j - n + m
            p[ii] = jj
        for k in range(n, m):
            p[k], p[m + k] = m + k, k
        out[Connectivity(m, tuple(p))] = coef
    return TLElement(m, out)


def build_WJ_recursive(n: int, params: SpectralParams) -> TLElement:
    """Independent construction: p_{k+1} = p_k + (S_k/S_{k+1}) p_k e_k p_k."""
    _check_boxes(n, params)
    beta = params.beta
    p = TLElement.identity(1)
    for k in range(1, n):
        p = embed(p, k + 1)
        ek = TLElement.gen(k, k + 1)
        p = p + (params.S(k) / params.S(k + 1)) * p.mul(ek, beta).mul(p, beta)
    return p


# --- P^d -----------------------------------------------------------------

def _apply_wj_defects(d: int, params: SpectralParams) -> dict[LinkState, Any]:
    """rho(WJ_d) on the all-defect state, applying one box at a time."""
    vec: dict[LinkState, Any] = {LinkState.all_defects(d): params.scalar(1) if params.extended else 1.0}
    if d < 2:
        return vec
    _check_boxes(d, params)
    beta = params.beta
    for k, g in reversed(wj_boxes(d)):
        a = params.S(k) / params.S(k + 1)
        e = generator(g, d)
        new = dict(vec)
        for v, x in vec.items():
            w, loops = apply_connectivity(e, v)
            new[w] = new.get(w, 0) + a * x * beta**loops
        vec = {w: x for w, x in new.items() if x != 0}
    return vec


def apply_Pd(v: LinkState, params: SpectralParams) -> ProjectedState:
    """Strip the arcs of v, project the defects with WJ_d, put the arcs back."""
    if v.d == 0:
        return ProjectedState(v, {v: params.scalar(1) if params.extended else 1.0})
    column = _apply_wj_defects(v.d, params)
    return ProjectedState(v, {insert_arcs(w, v): x for w, x in column.items()})


def limit_Pd(v: LinkState, params: SpectralParams, eps: float = 1e-5, rtol: float = 1e-6) -> ProjectedState:
    """lim P^d v as q approaches q_c, from q_c e^{+-i eps}.

    Each side is Richardson-extrapolated from eps and eps/2; the limit is
    declared to exist when the two extrapolations agree to ``rtol``. The
    plain two-sided average is useless for this test since a simple pole
    cancels in it.
    """
    base = params.with_precision("double") if params.extended else params

    def side(h):
        return apply_Pd(v, base.shifted(h)).expansion

    plus1, plus2 = side(eps), side(eps / 2)
    minus1, minus2 = side(-eps), side(-eps / 2)
    keys = set(plus1) | set(plus2) | set(minus1) | set(minus2)
    out = {}
    worst = 0.0
    scale = 1.0
    for w in keys:
        rp = 2 * plus2.get(w, 0) - plus1.get(w, 0)
        rm = 2 * minus2.get(w, 0) - minus1.get(w, 0)
        worst = max(worst, abs(rp - rm))
        scale = max(scale, abs(rp), abs(rm))
        out[w] = (rp + rm) / 2
    if worst > rtol * scale:
        raise SingularParameterError(
            f"P^{v.d} has no finite limit at this lambda (one-sided values differ by {worst:.3g})",
            index=v.d)
    return ProjectedState(v, {w: x for w, x in out.items() if abs(x) > 1e-12 * scale})


def build_PB_basis(n: int, params: SpectralParams) -> list[ProjectedState]:
    """P^{d(v)} v for every v in the link basis."""
    failing = sorted({v.d for v in get_basis(n).states if _sector_singular(v.d, params)})
    if failing:
        raise SingularParameterError(f"P^d undefined for sectors {failing}", index=failing)
    return [apply_Pd(v, params) for v in get_basis(n).states]


def _sector_singular(d: int, params: SpectralParams) -> bool:
    return any(sin_vanishes(k, params) for k in range(2, d + 1))


def pb_matrix(n: int, params: SpectralParams) -> np.ndarray:
    """Columns are the PB vectors expressed in the link basis."""
    return np.column_stack([s.vector() for s in build_PB_basis(n, params)])


# --- closed forms for the projected coefficients ----------------------

def _C(k, params):
    if cos_vanishes(k, params):
        raise SingularParameterError(f"C_{k} vanishes", index=k)
    return params.C(k)


def _S(k, params):
    return params.S(k)


def pr_single_first(r: int, params: SpectralParams):
    """P^r_{1} = S_{(r-1)/2} / (2 S_{1/2} C_{r/2})."""
    return _S((r - 1) / 2, params) / (2 * _S(0.5, params) * _C(r / 2, params))


def pr_single(n: int, r: int, params: SpectralParams):
    """One bubble at half-point n: S_{(r-n)/2} S_{n/2} / (2 S_{1/2}^2 C_{r/2})."""
    return _S((r - n) / 2, params) * _S(n / 2, params) / (2 * _S(0.5, params) ** 2 * _C(r / 2, params))


def pr_single_recursive(n: int, r: int, params: SpectralParams):
    """P^r_{n} = P^{r-1}_{n-1} + S_{r-n} / (4 S_{1/2} C_{r/2} C_{(r-1)/2}), P^{r-1}_{0} = 0."""
    if n == 0 or n >= r:
        return 0
    head = pr_single_recursive(n - 1, r - 1, params)
    return head + _S(r - n, params) / (4 * _S(0.5, params) * _C(r / 2, params) * _C((r - 1) / 2, params))


def pr_concentric_left(m: int, r: int, params: SpectralParams):
    """m concentric arcs starting at the first point."""
    acc = (2 * _S(0.5, params)) ** (-m)
    for i in range(m):
        acc *= _S((r - m - i) / 2, params) / _C((r - i) / 2, params)
    return acc


def pr_concentric_left_recursive(m: int, r: int, params: SpectralParams):
    if m == 0:
        return 1
    fac = _S(r - m, params) / (4 * _C(r / 2, params) * _C((r - 1) / 2, params) * _S(0.5, params))
    return fac * pr_concentric_left_recursive(m - 1, r - 2, params)


def pr_concentric(n: int, m: int, r: int, params: SpectralParams):
    """m concentric arcs around half-point n: arcs (n-i, n+1+i), 1-indexed."""
    acc = (2 * _S(0.5, params)) ** (-m)
    for i in range(m):
        acc *= (_S((r - n - i) / 2, params) * _S((n - i) / 2, params)
                / (_C((r - i) / 2, params) * _S((i + 1) / 2, params)))
    return acc


def pr_left_shift(w: LinkState, params: SpectralParams):
    """General recursion: drop the first point, or remove a 1-bubble and two points."""
    return _left_shift(w.partner, params)


def _left_shift(partner: tuple[int, ...], params: SpectralParams):
    return _left_shift_cached(partner, params)


@lru_cache(maxsize=100_000)
def _left_shift_cached(partner: tuple[int, ...], params: SpectralParams):
    r = len(partner)
    if all(p == DEFECT for p in partner):
        return 1
    w = LinkState(partner)
    head = 0
    if partner[0] == DEFECT:
        head = _left_shift_cached(_shift_left(partner), params)
    fac = 1 / (4 * _S(0.5, params) * _C(r / 2, params) * _C((r - 1) / 2, params))
    total = 0
    for i in one_bubbles(w):
        total += _S(r - (i + 1), params) * _left_shift_cached(_remove_bubble(partner, i), params)
    return head + fac * total


def _shift_left(partner):
    return tuple(DEFECT if p == DEFECT else p - 1 for p in partner[1:])


def _remove_bubble(partner, i):
    out = []
    for k, p in enumerate(partner):
        if k in (i, i + 1):
            continue
        out.append(DEFECT if p == DEFECT else p - (2 if p > i + 1 else 0))
    return tuple(out)


def zeta_pattern(w: LinkState) -> tuple[list[int], list[list[int]]]:
    """Defect runs [a_0, a_1, ...] and, per arc cluster, the half-sizes k of its arcs."""
    runs, clusters = [0], []
    k = 0
    n = w.n
    while k < n:
        if w.partner[k] == DEFECT:
            runs[-1] += 1
            k += 1
            continue
        start = k
        while k < n and w.partner[k] != DEFECT:
            k += 1
        arcs = sorted((i, j) for i, j in w.arcs if start <= i < k)
        clusters.append([(j - i + 1) // 2 for i, j in arcs])
        runs.append(0)
    return runs, clusters


def concentric_representative(w: LinkState) -> LinkState:
    """Same defect runs as w, every cluster replaced by concentric arcs."""
    p = list(w.partner)
    k, n = 0, w.n
    while k < n:
        if p[k] == DEFECT:
            k += 1
            continue
        start = k
        while k < n and w.partner[k] != DEFECT:
            k += 1
        for off in range((k - start) // 2):
            a, b = start + off, k - 1 - off
            p[a], p[b] = b, a
    return LinkState(tuple(p))


def pr_cluster_replacement(w: LinkState, params: SpectralParams):
    """P^r_w from the concentric representative and the factor prod S_i / S_k."""
    _, clusters = zeta_pattern(w)
    u = concentric_representative(w)
    fac = 1
    for ks in clusters:
        for i, k in enumerate(ks, start=1):
            fac *= _S(i, params) / _S(k, params)
    return fac * pr_coeff_formula(u, w.n, params)


def pr_single_moved(n: int, r: int, params: SpectralParams):
    """P^r_{n} = (S_n/S_1) P^r_{1} - S_{n/2} S_{(n-1)/2} / (S_{1/2} S_1)."""
    return (_S(n, params) / _S(1, params) * pr_single_first(r, params)
            - _S(n / 2, params) * _S((n - 1) / 2, params) / (_S(0.5, params) * _S(1, params)))


def bubble_alpha(w: LinkState, params: SpectralParams) -> dict[int, Any]:
    """alpha_i with P^r_w = sum_i alpha_i P^r_{1,3,...,2i-1}, for w with 1-bubbles only."""
    if any(d > 1 for d in arc_depths(w).values()):
        raise ValueError("state must contain 1-bubbles only")
    labels = [i + 1 for i in one_bubbles(w)]

    def expand(b, rest) -> dict[int, Any]:
        # b - 1 bubbles already sit at 1, 3, ..., 2b-3
        if not rest:
            return {b - 1: 1}
        n, tail = rest[0], rest[1:]
        if n == 2 * b - 1:
            return expand(b + 1, tail)
        out: dict[int, Any] = {}
        moved = _S(n - b + 1, params) / _S(b, params)
        dropped = (_S((n - 2 * b + 2) / 2, params) * _S((n - 2 * b + 1) / 2, params)
                   / (_S(0.5, params) * _S(1, params)))
        for i, x in expand(b + 1, tail).items():
            out[i] = out.get(i, 0) + moved * x
        for i, x in expand(b, tail).items():
            out[i] = out.get(i, 0) - dropped * x
        return out

    return expand(1, labels)


def pr_bubble_expansion(w: LinkState, params: SpectralParams):
    """sum_i alpha_i prod_{j<=i} (S_j/S_1) P^r_{i^i}."""
    r = w.n
    total = 0
    for i, a in bubble_alpha(w, params).items():
        fac = 1
        for j in range(1, i + 1):
            fac *= _S(j, params) / _S(1, params)
        total += a * fac * pr_concentric_left(i, r, params)
    return total


def pr_coeff_formula(w: LinkState, r: int, params: SpectralParams):
    """Coefficient of w in P^r v^r from the closed forms, never from WJ_r."""
    if w.n != r:
        raise ValueError("state must live on r points")
    arcs = w.arcs
    if not arcs:
        return 1
    if len(arcs) == 1:
        i, j = arcs[0]
        return pr_single(i + 1, r, params)
    depths = arc_depths(w)
    if len(set(a[0] + a[1] for a in arcs)) == 1 and max(depths.values()) == len(arcs):
        # one stack of concentric arcs around half-point n
        inner = min(arcs, key=lambda a: a[1] - a[0])
        return pr_concentric(inner[0] + 1, len(arcs), r, params)
    return pr_left_shift(w, params)


# --- criticality ---------------------------------------------------------

def reduce_Lambda(a: int, b: int) -> tuple[int, int]:
    """Lambda/pi for lambda = pi a/b, as a reduced fraction in [0, 2)."""
    f = (1 - Fraction(a, b)) % 2
    return f.numerator, f.denominator


def jordan_condition(d: int, d_prime: int, a: int, b: int) -> bool:
    """True iff P^d at Lambda = pi a/b links sector d to sector d'."""
    if b == 0:
        raise ValueError("b must be non-zero")
    if math.gcd(a, b) != 1:
        raise ValueError(f"{a}/{b} is not in lowest terms")
    if (d - d_prime) % 2:
        raise ValueError("d and d' must have the same parity")
    if d_prime < 0 or d_prime >= d:
        return False
    return a % 2 == 1 and d - d_prime < 2 * b and ((d + d_prime) // 2) % (2 * b) == (b - 1) % (2 * b)


@dataclass
class SingularityReport:
    d: int
    a: int
    b: int
    d_prime: int | None
    is_singular: bool

    @property
    def lambda_c(self) -> str:
        return f"pi*{self.a}/{self.b}"

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "d_prime": self.d_prime, "a": self.a, "b": self.b,
                           "singular": self.is_singular})


def singularity_report(d: int, n: int, a: int, b: int) -> SingularityReport:
    """Largest d' < d linked to d when Lambda = pi a/b."""
    partners = [dp for dp in range(d - 2, -1, -2) if jordan_condition(d, dp, a, b)]
    dp = partners[0] if partners else None
    return SingularityReport(d, a, b, dp, dp is not None)


def predicted_links(n: int, a: int, b: int) -> set[tuple[int, int]]:
    """All (d, d') within V_N predicted at Lambda = pi a/b."""
    out = set()
    for d in range(n % 2, n + 1, 2):
        for dp in range(d % 2, d, 2):
            if jordan_condition(d, dp, a, b):
                out.add((d, dp))
    return out


# --- Laurent split -------------------------------------------------------

@dataclass
class LaurentSplit:
    regular: dict[LinkState, complex]
    residue: dict[LinkState, complex]
    d: int
    d_prime: int | None

    def vectors(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        basis = get_basis(n)
        r = np.zeros(len(basis), dtype=complex)
        s = np.zeros(len(basis), dtype=complex)
        for w, x in self.regular.items():
            r[basis.index[w]] += x
        for w, x in self.residue.items():
            s[basis.index[w]] += x
        return r, s


def laurent_split(v: LinkState, params: SpectralParams, eps: float = 1e-4) -> LaurentSplit:
    """P^d(q) v = r + s/(q - q_c) near q_c, from q_c e^{+-i eps} with Richardson refinement.

    Only the simple-pole part is extracted: with t = q - q_c,
    t f(q) = s + r t, so ``s`` is the t -> 0 limit of t f and ``r`` the
    limit of (f - s/t).
    """
    if params.frac is None:
        raise ValueError("Laurent split needs a rational lambda")
    a, b = reduce_Lambda(params.frac.numerator, params.frac.denominator)
    rep = singularity_report(v.d, v.n, a, b)
    if not rep.is_singular and not _sector_singular(v.d, params):
        raise ValueError(f"P^{v.d} is regular at this lambda")
    lam_c = float(params.lam)
    qc = complex(params.q)

    def at(h):
        p = SpectralParams(lam_c + h, float(params.u), None, "double")
        t = qc * (complex(math.cos(h), math.sin(h)) - 1)
        return apply_Pd(v, p).expansion, t

    def estimate(h):
        fp, tp = at(h)
        fm, tm = at(-h)
        keys = set(fp) | set(fm)
        s = {w: (tp * fp.get(w, 0) + tm * fm.get(w, 0)) / 2 for w in keys}
        r = {w: ((fp.get(w, 0) - s[w] / tp) + (fm.get(w, 0) - s[w] / tm)) / 2 for w in keys}
        return s, r

    s1, r1 = estimate(eps)
    s2, r2 = estimate(eps / 2)
    keys = set(s1) | set(s2)
    # both estimates carry O(eps^2) errors; Richardson cancels them
    s = {w: (4 * s2.get(w, 0) - s1.get(w, 0)) / 3 for w in keys}
    r = {w: (4 * r2.get(w, 0) - r1.get(w, 0)) / 3 for w in keys}
    scale = max([abs(x) for x in r.values()] + [1.0])
    s = {w: x for w, x in s.items() if abs(x) > 1e-9 * scale}
    r = {w: x for w, x in r.items() if abs(x) > 1e-12 * scale}
    if not s or max(abs(x) for x in s.values()) < 1e-8 * scale:
        raise FloatingPointError("residue is numerically zero; the pole could not be resolved")
    return LaurentSplit(r, s, v.d, rep.d_prime)


def fn_restricted(n: int, params: SpectralParams) -> SectorMatrix:
    from .transfer import rho_FN

    return rho_FN(n, params)
