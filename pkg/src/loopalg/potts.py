"""Critical Potts model on the N x 2M strip: spins, FK graphs and loops.

Lattice: boxes (x, y), x = 0..N-1, y = 0..2M-1. Spins sit on the box corners
(X, Y) with X + Y odd, so every box has two spin corners on one of its
diagonals and carries one possible bond between them. Bonds in even columns
are K bonds, in odd columns J bonds. A bonded box draws its two medial arcs
around the non-spin corners, an empty box around the spin corners. On the
cylinder Y is periodic with period 2M.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ._strands import trace
from .link_rep import SectorMatrix, sector_weight
from .linkspace import DEFECT, LinkState, get_basis
from .tl_algebra import SpectralParams, gram_matrix
from .transfer import CapacityError, build_rho_DN_sweep

MAX_BONDS = 24
MAX_SPIN_STATES = 10_000


# --- parameters ----------------------------------------------------------

@dataclass(frozen=True)
class PottsParams:
    Q: float
    v_J: float
    v_K: float
    kappa: float

    @classmethod
    def critical(cls, params: SpectralParams, N: int) -> "PottsParams":
        beta = float(params.beta)
        s_u, s_lu = math.sin(float(params.u)), math.sin(float(params.lam - params.u))
        Q = beta * beta
        kappa = Q ** ((N + 1) / 2) / (s_u * s_lu) ** N
        return cls(Q, beta * s_lu / s_u, beta * s_u / s_lu, kappa)


def params_for_Q(Q: int, u: float | None = None) -> SpectralParams:
    """lambda with 2 cos(lambda) = sqrt(Q); u defaults to lambda/2 (isotropic)."""
    lam = math.acos(math.sqrt(Q) / 2)
    table = {1: (1, 3), 2: (1, 4), 3: (1, 6), 4: (0, 1)}
    if Q in table and table[Q][0]:
        a, b = table[Q]
        return SpectralParams.rational(a, b, lam / 2 if u is None else u)
    return SpectralParams.real(lam, lam / 2 if u is None else u)


# --- lattice -------------------------------------------------------------

def spin_corners(x: int, y: int) -> tuple[tuple[int, int], tuple[int, int]]:
    if (x + y) % 2 == 0:
        return (x + 1, y), (x, y + 1)
    return (x, y), (x + 1, y + 1)


def box_state(x: int, y: int, bonded: bool) -> str:
    """Transfer-matrix box state (A: bottom-right, left-top; B: bottom-left, top-right)."""
    even = (x + y) % 2 == 0
    return ("B" if bonded else "A") if even else ("A" if bonded else "B")


@dataclass(frozen=True)
class Strip:
    N: int
    M: int
    periodic: bool = True

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError("the Potts strip needs even N >= 2")
        if self.M < 1:
            raise ValueError("M must be positive")

    @property
    def rows(self) -> int:
        return 2 * self.M if self.periodic else 2 * self.M + 1

    @property
    def spins(self) -> list[tuple[int, int]]:
        return [(X, Y) for Y in range(self.rows) for X in range(self.N + 1) if (X + Y) % 2]

    @property
    def spin_index(self) -> dict[tuple[int, int], int]:
        return {s: i for i, s in enumerate(self.spins)}

    @property
    def boxes(self) -> list[tuple[int, int]]:
        return [(x, y) for y in range(2 * self.M) for x in range(self.N)]

    def bond(self, x: int, y: int) -> tuple[int, int]:
        idx = self.spin_index
        a, b = spin_corners(x, y)
        wrap = lambda s: (s[0], s[1] % self.rows) if self.periodic else s
        return idx[wrap(a)], idx[wrap(b)]

    def bond_kind(self, x: int) -> str:
        return "K" if x % 2 == 0 else "J"

    @property
    def n_spins(self) -> int:
        return len(self.spins)

    def row_spins(self, Y: int) -> list[int]:
        idx = self.spin_index
        return [idx[(X, Y)] for X in range(self.N + 1) if (X + Y) % 2]


# --- FK graphs -----------------------------------------------------------

def _components(n: int, edges: list[tuple[int, int]]) -> int:
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    comps = n
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return comps


def medial_loops(strip: Strip, mask: int) -> int:
    """Closed medial loops on the cylinder, traced from the box tilings."""
    N, R = strip.N, 2 * strip.M
    h = lambda x, y: x * R + (y % R)                     # bottom edge of box (x, y)
    v = lambda X, y: N * R + X * R + y                   # left edge of box (X, y)
    segs = []
    for k, (x, y) in enumerate(strip.boxes):
        state = box_state(x, y, bool(mask >> k & 1))
        bottom, left, top, right = h(x, y), v(x, y), h(x, y + 1), v(x + 1, y)
        if state == "A":
            segs += [(bottom, right), (left, top)]
        else:
            segs += [(bottom, left), (top, right)]
    for j in range(strip.M):
        segs += [(v(0, 2 * j), v(0, 2 * j + 1)), (v(N, 2 * j), v(N, 2 * j + 1))]
    return trace(N * R + (N + 1) * R, segs, [])[1]


@dataclass(frozen=True)
class FKGraph:
    strip: Strip
    bond_mask: int

    @property
    def bonds(self) -> list[tuple[int, int]]:
        return [b for k, b in enumerate(self.strip.boxes) if self.bond_mask >> k & 1]

    @property
    def N_b(self) -> int:
        return bin(self.bond_mask).count("1")

    @property
    def N_bJ(self) -> int:
        return sum(1 for x, _ in self.bonds if x % 2)

    @property
    def N_bK(self) -> int:
        return self.N_b - self.N_bJ

    @property
    def N_c(self) -> int:
        return _components(self.strip.n_spins, [self.strip.bond(x, y) for x, y in self.bonds])

    @property
    def loop_count(self) -> int:
        return medial_loops(self.strip, self.bond_mask)

    def euler_holds(self) -> bool:
        return 2 * self.N_c == self.loop_count + self.strip.n_spins - self.N_b


def _check_bonds(strip: Strip):
    nb = len(strip.boxes)
    if nb > MAX_BONDS:
        raise CapacityError(f"2NM = {nb} bonds exceeds the limit of {MAX_BONDS}")


def fk_bruteforce_Z(N: int, M: int, params: SpectralParams, check_euler: bool = True) -> float:
    """Sum over all bond subsets of v_J^{N_bJ} v_K^{N_bK} Q^{N_c}."""
    strip = Strip(N, M)
    _check_bonds(strip)
    pp = PottsParams.critical(params, N)
    total = 0.0
    for mask in range(1 << len(strip.boxes)):
        g = FKGraph(strip, mask)
        nc = g.N_c
        if check_euler and 2 * nc != g.loop_count + strip.n_spins - g.N_b:
            raise AssertionError(f"Euler relation fails for bond mask {mask:#x}")
        total += pp.v_J ** g.N_bJ * pp.v_K ** g.N_bK * pp.Q ** nc
    return total


def euler_check_all(N: int, M: int) -> bool:
    strip = Strip(N, M)
    _check_bonds(strip)
    return all(FKGraph(strip, m).euler_holds() for m in range(1 << len(strip.boxes)))


# --- spin sums -----------------------------------------------------------

def _box_couplings(strip: Strip, pp: PottsParams) -> list[tuple[int, int, float]]:
    return [(*strip.bond(x, y), pp.v_K if x % 2 == 0 else pp.v_J) for x, y in strip.boxes]


def spin_sum(strip: Strip, pp: PottsParams, Q: int, fixed: dict[int, int] | None = None) -> float:
    """sum over spins of prod over boxes (1 + v delta), some spins held fixed."""
    fixed = fixed or {}
    free = [i for i in range(strip.n_spins) if i not in fixed]
    if Q ** len(free) > 5_000_000:
        raise CapacityError(f"{Q}^{len(free)} spin configurations is too many")
    couplings = _box_couplings(strip, pp)
    configs = np.array(list(itertools.product(range(Q), repeat=len(free))), dtype=np.int8).reshape(-1, len(free))
    sigma = np.zeros((configs.shape[0], strip.n_spins), dtype=np.int8)
    sigma[:, free] = configs
    for i, val in fixed.items():
        sigma[:, i] = val
    w = np.ones(configs.shape[0])
    for a, b, v in couplings:
        w *= 1 + v * (sigma[:, a] == sigma[:, b])
    return float(w.sum())


def spin_Z(N: int, M: int, params: SpectralParams, Q: int) -> float:
    strip = Strip(N, M)
    return spin_sum(strip, PottsParams.critical(params, N), Q)


def spin_transfer(N: int, Q: int, params: SpectralParams, normalized: bool = True) -> np.ndarray:
    """Row-to-row matrix from spin row Y=0 to Y=2, the odd row summed out."""
    if Q < 2 or int(Q) != Q:
        raise ValueError("the spin transfer matrix needs an integer Q >= 2")
    if N % 2:
        raise ValueError("N must be even")
    size = Q ** (N // 2)
    if size > MAX_SPIN_STATES:
        raise CapacityError(f"Q^(N/2) = {size} exceeds {MAX_SPIN_STATES}")
    pp = PottsParams.critical(params, N)
    strip = Strip(N, 1, periodic=False)
    idx = strip.spin_index
    bottom = [idx[(X, 0)] for X in range(1, N + 1, 2)]
    middle = [idx[(X, 1)] for X in range(0, N + 1, 2)]
    top = [idx[(X, 2)] for X in range(1, N + 1, 2)]
    couplings = _box_couplings(strip, pp)
    rows = np.array(list(itertools.product(range(Q), repeat=N // 2)))
    mids = np.array(list(itertools.product(range(Q), repeat=N // 2 + 1)))
    out = np.zeros((size, size))
    for i, s0 in enumerate(rows):
        for j, s2 in enumerate(rows):
            sigma = np.zeros((len(mids), strip.n_spins), dtype=int)
            sigma[:, bottom] = s0
            sigma[:, top] = s2
            sigma[:, middle] = mids
            w = np.ones(len(mids))
            for a, b, v in couplings:
                w *= 1 + v * (sigma[:, a] == sigma[:, b])
            out[i, j] = w.sum()
    return out / pp.kappa if normalized else out


# --- loop side -----------------------------------------------------------

def loop_trace(N: int, M: int, params: SpectralParams) -> complex:
    """tr(rho(D_N)^M W)."""
    d = build_rho_DN_sweep(N, params).data
    dm = np.linalg.matrix_power(d, M)
    total = 0
    for dd, sl in get_basis(N).sectors.items():
        total += complex(sector_weight(dd, params)) * np.trace(dm[sl, sl])
    return complex(total)


def three_way(N: int, M: int, Q: int, params: SpectralParams) -> dict[str, float]:
    pp = PottsParams.critical(params, N)
    z_spin = spin_Z(N, M, params, Q)
    z_fk = fk_bruteforce_Z(N, M, params)
    z_loop = pp.kappa**M * loop_trace(N, M, params).real
    z_tr = pp.kappa**M * float(np.trace(np.linalg.matrix_power(spin_transfer(N, Q, params), M)))
    ref = abs(z_spin)
    return {"N": N, "M": M, "Q": Q, "u": float(params.u), "Z_spin": z_spin, "Z_fk": z_fk,
            "Z_loop": z_loop, "Z_transfer": z_tr,
            "max_rel_dev": max(abs(z_fk - z_spin), abs(z_loop - z_spin), abs(z_tr - z_spin)) / ref}


def eigenvalue_weights(N: int, Q: int, params: SpectralParams, tol: float = 1e-6) -> list[dict[str, Any]]:
    """Match eigenvalues of the spin matrix with weighted sector eigenvalues of rho(D_N).

    Each row gives an eigenvalue, its multiplicity in the spin matrix and the
    sum of sin((d+1) lambda)/sin(lambda) over its occurrences in the diagonal
    blocks of rho(D_N).
    """
    from .spectral import cluster_values

    lam_spin = np.linalg.eigvals(spin_transfer(N, Q, params))
    dn = build_rho_DN_sweep(N, params)
    loop_vals, loop_w = [], []
    for d, sl in dn.basis.sectors.items():
        for x in np.linalg.eigvals(dn.data[sl, sl]):
            loop_vals.append(complex(x))
            loop_w.append(float(complex(sector_weight(d, params)).real))
    vals = [complex(x) for x in lam_spin] + loop_vals
    k = len(lam_spin)
    scale = max(1.0, max(abs(x) for x in vals))
    rows = []
    for g in cluster_values(vals, tol * scale):
        rows.append({
            "eigenvalue": complex(np.mean([vals[i] for i in g])),
            "spin_multiplicity": sum(1 for i in g if i < k),
            "loop_weight": sum(loop_w[i - k] for i in g if i >= k),
            "in_loop_spectrum": any(i >= k for i in g),
        })
    return rows


# --- boundary partition functions ----------------------------------------

def boundary_states(N: int) -> dict[str, LinkState]:
    """F: arc (1,N) around (2,3),...; X: defects at 1 and N with the same inner arcs; E: (1,2),(3,4),..."""
    if N % 2 or N < 2:
        raise ValueError("boundary states need even N >= 2")
    inner = [(i, i + 1) for i in range(1, N - 2, 2)]
    f = LinkState.from_arcs(N, [(0, N - 1)] + inner)
    x = LinkState.from_arcs(N, inner)
    e = LinkState.from_arcs(N, [(i, i + 1) for i in range(0, N, 2)])
    return {"F": f, "X": x, "E": e}


def sandwich(v: LinkState, w: LinkState, dm: np.ndarray, gram: np.ndarray) -> complex:
    """<v | D^M w> = sum_y G[v, y] rho(D^M)[y, w]; w enters at the top."""
    basis = get_basis(v.n)
    return complex(gram[basis.index[v], :] @ dm[:, basis.index[w]])


def boundary_prefactor(kind: str, N: int, M: int, params: SpectralParams):
    beta = float(params.beta)
    s = math.sin(float(params.u)) * math.sin(float(params.lam - params.u))
    n_s = (N + 1) * M + N // 2
    k = beta**n_s / s ** (N * M)
    return {"a": k * beta ** (-N - 2), "b": k * beta ** (-N - 2), "c": k, "d": k * beta ** (-N / 2 - 1)}[kind]


def boundary_Z(kind: str, N: int, M: int, params: SpectralParams) -> complex:
    """Open-strip partition functions from Gram sandwiches of rho(D_N)^M.

    a: bottom row fixed to one value, top row to another; b: both fixed to
    the same value; c: both free; d: bottom fixed, top free.
    """
    if kind not in "abcd" or len(kind) != 1:
        raise ValueError("kind must be one of a, b, c, d")
    if N % 2:
        raise ValueError("boundary partition functions need even N")
    beta = params.beta
    dm = np.linalg.matrix_power(build_rho_DN_sweep(N, params).data.astype(complex), M)
    g = gram_matrix(N, params).astype(complex)
    st = boundary_states(N)
    ff = sandwich(st["F"], st["F"], dm, g)
    xx = sandwich(st["X"], st["X"], dm, g)
    pref = boundary_prefactor(kind, N, M, params)
    if kind == "a":
        return pref * (ff - beta * xx)
    if kind == "b":
        return pref * (ff + beta * (beta**2 - 1) * xx)
    if kind == "c":
        return pref * sandwich(st["E"], st["E"], dm, g)
    return pref * sandwich(st["F"], st["E"], dm, g)


def boundary_spin_sum(kind: str, N: int, M: int, Q: int, params: SpectralParams) -> float:
    """Constrained spin sum on the open strip with rows Y = 0..2M."""
    strip = Strip(N, M, periodic=False)
    pp = PottsParams.critical(params, N)
    bottom, top = strip.row_spins(0), strip.row_spins(2 * M)
    fixed: dict[int, int] = {}
    if kind in "abd":
        fixed.update({i: 0 for i in bottom})
    if kind == "a":
        fixed.update({i: 1 for i in top})
    if kind == "b":
        fixed.update({i: 0 for i in top})
    return spin_sum(strip, pp, Q, fixed)
