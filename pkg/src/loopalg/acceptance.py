"""Acceptance checks shared by the test suite and ``loopalg verify``.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
comparison, so a run always reports every criterion.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .link_rep import rho, rho_generator
from .linkspace import LinkState, eta_encode, get_basis, max_bubble, mu_encode, parse_link_notation
from .potts import (
    Strip,
    boundary_spin_sum,
    boundary_Z,
    eigenvalue_weights,
    euler_check_all,
    params_for_Q,
    three_way,
)
from .spectral import detected_links, is_diagonalizable, jordan_analyze
from .tl_algebra import SpectralParams, TLElement
from .transfer import (
    build_DN_brute,
    build_rho_DN_sweep,
    fn_element_2x2,
    fn_element_8x8,
    fourier_coefficients,
    rho_FN,
)
from .wenzl_jones import (
    apply_Pd,
    bubble_alpha,
    build_WJ,
    build_WJ_recursive,
    pr_bubble_expansion,
    pr_cluster_replacement,
    pr_coeff_formula,
    pr_concentric,
    pr_concentric_left,
    pr_concentric_left_recursive,
    pr_left_shift,
    pr_single,
    pr_single_first,
    pr_single_moved,
    pr_single_recursive,
    predicted_links,
    reduce_Lambda,
)

GENERIC_LAMBDAS = (0.41, 0.77, 1.13, 1.9, 2.6)


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.key}: {self.title} ({self.detail}; {self.seconds:.1f}s)"


def _timed(key: str, title: str, fn: Callable[[], tuple[bool, str, list[str]]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail, notes = fn()
    except Exception as exc:  # a crash is a failure, reported like any other
        ok, detail, notes = False, f"raised {type(exc).__name__}: {exc}", []
    return CheckResult(key, title, ok, detail, time.perf_counter() - t0, notes)


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-300))


# --- 1 -------------------------------------------------------------------

def check_diagonal_blocks(ns: Sequence[int] = range(2, 9),
                          lams: Sequence[SpectralParams] | None = None) -> CheckResult:
    lams = lams or [SpectralParams.rational(1, 5), SpectralParams.rational(1, 4), SpectralParams.real(1.0)]

    def run():
        worst = 0.0
        for p in lams:
            lam = float(p.lam)
            for n in ns:
                f = rho_FN(n, p)
                for d in f.sectors:
                    blk = f.block(d, d).astype(complex)
                    target = 2 * (-1) ** d * math.cos(lam * (d + 1)) * np.eye(len(blk))
                    worst = max(worst, float(np.abs(blk - target).max()))
        return worst <= 1e-10, f"max abs deviation {worst:.2e}", []

    return _timed("1", "diagonal blocks of rho(F_N)", run)


# --- 2 -------------------------------------------------------------------

def check_fourier(ns: Sequence[int] = range(2, 6), lam: SpectralParams | None = None) -> CheckResult:
    p = lam or SpectralParams.real(0.83)

    def run():
        worst = 0.0
        for n in ns:
            coeffs = fourier_coefficients(n, p)
            target = 2.0 ** (1 - 2 * n) * rho_FN(n, p).data
            worst = max(worst, _rel(coeffs[2 * n].data, target))
        return worst <= 1e-8, f"max rel deviation {worst:.2e}", []

    return _timed("2", "top Fourier coefficient equals 2^(1-2N) rho(F_N)", run)


# --- 3 -------------------------------------------------------------------

def check_braid_column(rs: Sequence[int] = range(1, 8), lams: Sequence[float] = GENERIC_LAMBDAS,
                     params: Sequence[SpectralParams] | None = None) -> CheckResult:
    plist = list(params) if params else [SpectralParams.real(x) for x in lams]

    def run():
        worst_closed = 0.0
        worst_routes = 0.0
        target_state = parse_link_notation("2", 4)
        for p in plist:
            lam = float(p.lam)
            closed = -(2**5) * math.cos(lam) * math.sin(lam) ** 2 * math.sin(lam / 2) ** 2
            f4 = rho_FN(4, p)
            b4 = get_basis(4)
            direct = f4.data[b4.index[target_state], b4.index[LinkState.all_defects(4)]]
            worst_closed = max(worst_closed, abs(direct - closed) / max(abs(closed), 1e-300))
            for r in rs:
                f = rho_FN(r, p)
                basis = get_basis(r)
                col = basis.index[LinkState.all_defects(r)]
                for w in basis.states:
                    x = f.data[basis.index[w], col]
                    scale = max(abs(x), 1.0)
                    worst_routes = max(worst_routes, abs(fn_element_8x8(eta_encode(w), r, p) - x) / scale)
                    mu = mu_encode(w)
                    if mu is not None:
                        worst_routes = max(worst_routes, abs(fn_element_2x2(mu, r, p) - x) / scale)
        ok = worst_closed <= 1e-12 and worst_routes <= 1e-9
        return ok, f"closed form rel {worst_closed:.2e}, routes {worst_routes:.2e}", []

    return _timed("3", "braid column products against direct expansion", run)


# --- 4 -------------------------------------------------------------------

def _formula_values(w: LinkState, r: int, p: SpectralParams) -> dict[str, complex]:
    vals = {"dispatch": pr_coeff_formula(w, r, p), "left_shift": pr_left_shift(w, p),
            "cluster": pr_cluster_replacement(w, p)}
    arcs = w.arcs
    if max_bubble(w) <= 1:
        vals["bubble_moves"] = pr_bubble_expansion(w, p)
    if len(arcs) == 1:
        n = arcs[0][0] + 1
        vals["single"] = pr_single(n, r, p)
        vals["single_recursion"] = pr_single_recursive(n, r, p)
        vals["single_moved"] = pr_single_moved(n, r, p)
        if n == 1:
            vals["first"] = pr_single_first(r, p)
    if arcs and len({i + j for i, j in arcs}) == 1 and max_bubble(w) == len(arcs):
        inner = min(arcs, key=lambda a: a[1] - a[0])
        vals["concentric"] = pr_concentric(inner[0] + 1, len(arcs), r, p)
        if min(i for i, _ in arcs) == 0:
            vals["concentric_left"] = pr_concentric_left(len(arcs), r, p)
            vals["concentric_left_recursion"] = pr_concentric_left_recursive(len(arcs), r, p)
    return vals


def check_projectors(max_wj: int = 6, max_r: int = 8, lams: Sequence[float] = GENERIC_LAMBDAS) -> CheckResult:
    def run():
        worst_wj = 0.0
        worst_formula = 0.0
        worst_name = ""
        for lam in lams:
            p = SpectralParams.real(lam)
            beta = p.beta
            for n in range(2, max_wj + 1):
                wj = build_WJ(n, p)
                worst_wj = max(worst_wj, wj.mul(wj, beta).max_abs_diff(wj),
                               wj.max_abs_diff(build_WJ_recursive(n, p)))
                zero = TLElement(n)
                for i in range(1, n):
                    e = TLElement.gen(i, n)
                    worst_wj = max(worst_wj, e.mul(wj, beta).max_abs_diff(zero), wj.mul(e, beta).max_abs_diff(zero))
            for r in range(1, max_r + 1):
                col = apply_Pd(LinkState.all_defects(r), p)
                for w in get_basis(r).states:
                    x = col.coeff(w)
                    for name, y in _formula_values(w, r, p).items():
                        dev = abs(y - x) / max(abs(x), 1e-300) if abs(x) > 1e-12 else abs(y - x)
                        if dev > worst_formula:
                            worst_formula, worst_name = dev, name
        ok = worst_wj <= 1e-10 and worst_formula <= 1e-9
        return ok, f"WJ residual {worst_wj:.2e}, formulas rel {worst_formula:.2e} ({worst_name or 'all'})", []

    return _timed("4", "Wenzl-Jones projectors and coefficient formulas", run)


# --- 5 -------------------------------------------------------------------

def _u_samples(lam: float, seed: int = 1234, k: int = 3) -> list[float]:
    rng = np.random.default_rng(seed)
    return list(rng.uniform(0.1 * lam, 0.9 * lam, size=k))


def check_jordan_pattern(seed: int = 1234) -> CheckResult:
    def run():
        notes = []
        ok = True
        half = SpectralParams.rational(1, 2)
        a, b = reduce_Lambda(1, 2)
        for n in (4, 6, 8):
            f = rho_FN(n, half)
            reports = jordan_analyze(f)
            det, pred = detected_links(reports), predicted_links(n, a, b)
            sizes = {s for r in reports for s in r.block_size_histogram}
            good = det == pred and sizes <= {1, 2}
            ok &= good
            sq = float(np.abs(f.data @ f.data).max())
            ok &= sq <= 1e-9
            notes.append(f"pi/2 N={n}: links {sorted(det)} predicted {sorted(pred)}, |F^2| {sq:.1e}")
        for n in (3, 5, 7):
            f = rho_FN(n, half).data
            res = float(np.abs((f - 2 * np.eye(len(f))) @ (f + 2 * np.eye(len(f)))).max())
            ok &= res <= 1e-9
            notes.append(f"pi/2 N={n}: |(F-2)(F+2)| {res:.1e}")
        ising = detected_links(jordan_analyze(rho_FN(8, SpectralParams.rational(1, 4))))
        ok &= {(6, 0), (4, 2)} <= ising
        notes.append(f"pi/4 N=8: links {sorted(ising)}")
        third = SpectralParams.rational(1, 3)
        for n in (4, 5, 6):
            for u in _u_samples(float(third.lam), seed):
                diag = is_diagonalizable(jordan_analyze(build_rho_DN_sweep(n, third.with_u(u))))
                ok &= diag
                if not diag:
                    notes.append(f"pi/3 N={n} u={u:.4f}: Jordan block found")
        if not any(x.startswith("pi/3") for x in notes):
            notes.append("pi/3 N=4,5,6: rho(D_N) diagonalizable at all sampled u")
        return ok, "; ".join(notes[:3]) + " ...", notes

    return _timed("5", "Jordan pattern at lambda = pi/2, pi/4, pi/3", run)


# --- 6 -------------------------------------------------------------------

def check_predicted_vs_detected(max_b: int = 5, max_n: int = 8) -> CheckResult:
    def run():
        ok = True
        mismatches, far = [], []
        cases = 0
        for b in range(2, max_b + 1):
            for a in range(1, b, 2):
                if math.gcd(a, b) != 1:
                    continue
                lam = 1 - Fraction(a, b)
                p = SpectralParams.rational(lam.numerator, lam.denominator)
                for n in range(2, max_n + 1):
                    det = detected_links(jordan_analyze(rho_FN(n, p)))
                    pred = predicted_links(n, a, b)
                    extra = {x for x in det - pred if x[0] - x[1] >= 2 * b}
                    if extra:
                        far.append((a, b, n, sorted(extra)))
                    if det - extra != pred:
                        ok = False
                        mismatches.append((a, b, n, sorted(det), sorted(pred)))
                    cases += 1
        notes = [f"links with d-d' >= 2b: {far}"] if far else ["no links with d-d' >= 2b found"]
        notes += [f"mismatch {m}" for m in mismatches]
        return ok, f"{cases} (a,b,N) cases, {len(mismatches)} mismatches", notes

    return _timed("6", "predicted Jordan links equal detected links", run)


# --- 7 -------------------------------------------------------------------

def check_potts(u_frac: float = 0.3) -> CheckResult:
    def run():
        worst = 0.0
        notes = []
        ok = True
        for Q, Ms in ((2, (1, 2)), (3, (1, 2))):
            base = params_for_Q(Q)
            p = base.with_u(u_frac * float(base.lam))
            for M in Ms:
                row = three_way(4, M, Q, p)
                worst = max(worst, row["max_rel_dev"])
            for row in eigenvalue_weights(4, Q, p):
                dev = abs(row["spin_multiplicity"] - row["loop_weight"])
                if dev > 1e-6 or (row["spin_multiplicity"] and not row["in_loop_spectrum"]):
                    ok = False
                    notes.append(f"Q={Q}: weight mismatch at {row['eigenvalue']:.6g}")
        euler = euler_check_all(4, 1)
        ok = ok and euler and worst <= 1e-8
        return ok, f"three-way rel {worst:.2e}, Euler {'ok' if euler else 'broken'}", notes

    return _timed("7", "spin = FK = loop partition functions", run)


# --- 8 -------------------------------------------------------------------

def check_boundary(u_frac: float = 0.3) -> CheckResult:
    def run():
        base = params_for_Q(2)
        p = base.with_u(u_frac * float(base.lam))
        worst = 0.0
        for n in (2, 4):
            for kind in "abcd":
                z = boundary_Z(kind, n, 1, p)
                s = boundary_spin_sum(kind, n, 1, 2, p)
                worst = max(worst, abs(z - s) / abs(s))
        return worst <= 1e-8, f"max rel deviation {worst:.2e}", []

    return _timed("8", "boundary partition functions against constrained spin sums", run)


# --- 9 -------------------------------------------------------------------

def check_oracles(max_brute: int = 7, max_comm: int = 8, lam: float = 0.9) -> CheckResult:
    def run():
        p = SpectralParams.real(lam, 0.31)
        worst_build = 0.0
        for n in range(1, max_brute + 1):
            a = rho(build_DN_brute(n, p), n, p).data
            b = build_rho_DN_sweep(n, p).data
            worst_build = max(worst_build, float(np.abs(a - b).max()))
        worst_comm = 0.0
        for n in range(2, max_comm + 1):
            d1 = build_rho_DN_sweep(n, p.with_u(0.23)).data
            d2 = build_rho_DN_sweep(n, p.with_u(0.61)).data
            worst_comm = max(worst_comm, float(np.abs(d1 @ d2 - d2 @ d1).max()))
            f = rho_FN(n, p).data
            for i in range(1, n):
                e = rho_generator(i, n, p).data
                worst_comm = max(worst_comm, float(np.abs(f @ e - e @ f).max()))
        ok = worst_build <= 1e-10 and worst_comm <= 1e-9
        return ok, f"brute vs sweep {worst_build:.2e}, commutators {worst_comm:.2e}", []

    return _timed("9", "oracle equivalence and commutation", run)


ALL_CHECKS: dict[str, Callable[[], CheckResult]] = {
    "1": check_diagonal_blocks,
    "2": check_fourier,
    "3": check_braid_column,
    "4": check_projectors,
    "5": check_jordan_pattern,
    "6": check_predicted_vs_detected,
    "7": check_potts,
    "8": check_boundary,
    "9": check_oracles,
}

SUITES = {
    "diag": ["1"],
    "fourier": ["2"],
    "braid": ["3"],
    "appendixB": ["3"],
    "projectors": ["4"],
    "jordan": ["5", "6"],
    "potts": ["7"],
    "boundary": ["8"],
    "oracle": ["9"],
    "all": list(ALL_CHECKS),
}


def run_all(keys: Sequence[str] | None = None) -> list[CheckResult]:
    return [ALL_CHECKS[k]() for k in (keys or list(ALL_CHECKS))]
