"""The link representation rho of TL_N and the trace matrices W, M, M^-1."""
from __future__ import annotations

import io
import json
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np

from ._strands import INF, trace
from .linkspace import DEFECT, Connectivity, LinkBasis, LinkError, LinkState, get_basis, link_dim
from .tl_algebra import SingularParameterError, SpectralParams, TLElement, generator


@lru_cache(maxsize=200_000)
def apply_connectivity(c: Connectivity, v: LinkState) -> tuple[LinkState, int]:
    """Draw ``v`` on top of ``c`` and read the link state off the bottom."""
    if c.n != v.n:
        raise LinkError("connectivity and link state of different sizes")
    n = c.n
    segs = [(i, j) for i, j in enumerate(c.partner) if i < j]
    segs += [(n + i, n + j) for i, j in v.arcs]
    escape = [n + k for k in v.defects]
    partner, loops = trace(2 * n, segs, list(range(n)), escape)
    out = tuple(DEFECT if partner[k] == INF else partner[k] for k in range(n))
    return LinkState(out), loops


def apply_generator(i: int, v: LinkState) -> tuple[LinkState, int]:
    return apply_connectivity(generator(i, v.n), v)


class SectorMatrix:
    """Dense matrix on the ordered link basis; row = output state, column = input."""

    def __init__(self, n: int, data: np.ndarray):
        self.n = n
        self.basis: LinkBasis = get_basis(n)
        if data.shape != (len(self.basis), len(self.basis)):
            raise ValueError("matrix shape does not match the link basis")
        self.data = data

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def sectors(self) -> list[int]:
        return list(self.basis.sectors)

    @property
    def sector_offsets(self) -> dict[int, int]:
        return {d: s.start for d, s in self.basis.sectors.items()}

    def block(self, d_row: int, d_col: int) -> np.ndarray:
        return self.data[self.basis.sectors[d_row], self.basis.sectors[d_col]]

    def is_block_upper_triangular(self, tol: float = 0.0) -> bool:
        for d1, s1 in self.basis.sectors.items():
            for d2, s2 in self.basis.sectors.items():
                if d1 > d2 and self.data[s1, s2].size and np.max(np.abs(self.data[s1, s2].astype(complex))) > tol:
                    return False
        return True

    def __matmul__(self, other: "SectorMatrix") -> "SectorMatrix":
        return SectorMatrix(self.n, self.data @ other.data)

    def __sub__(self, other: "SectorMatrix") -> "SectorMatrix":
        return SectorMatrix(self.n, self.data - other.data)

    def power(self, m: int) -> "SectorMatrix":
        return SectorMatrix(self.n, np.linalg.matrix_power(self.data, m))

    def to_json(self) -> str:
        flat = self.data.astype(complex).ravel()
        return json.dumps({
            "n": self.n,
            "shape": list(self.data.shape),
            "sector_offsets": self.sector_offsets,
            "data": [[float(z.real), float(z.imag)] for z in flat],
        })

    def to_csv(self) -> str:
        buf = io.StringIO()
        for row in self.data.astype(complex):
            buf.write(",".join(f"{z.real:.17g}{z.imag:+.17g}i" for z in row) + "\n")
        return buf.getvalue()


def rho(x: TLElement | Connectivity, n: int, params: SpectralParams) -> SectorMatrix:
    """Matrix of ``x`` in the link representation."""
    if isinstance(x, Connectivity):
        x = TLElement.basis(x)
    if x.n != n:
        raise LinkError("element size does not match N")
    basis = get_basis(n)
    dtype = object if params.extended else complex
    out = np.zeros((len(basis), len(basis)), dtype=dtype)
    if params.extended:
        out[:, :] = params.scalar(0)
    beta = params.beta
    for c, coef in x.terms.items():
        for col, v in enumerate(basis.states):
            w, loops = apply_connectivity(c, v)
            out[basis.index[w], col] += coef * beta**loops
    return SectorMatrix(n, out)


def rho_generator(i: int, n: int, params: SpectralParams) -> SectorMatrix:
    return rho(generator(i, n), n, params)


def apply_element(x: TLElement, vec: dict[LinkState, Any], beta) -> dict[LinkState, Any]:
    """Sparse action of a TL element on a vector given as {state: coefficient}."""
    out: dict[LinkState, Any] = {}
    for c, coef in x.terms.items():
        for v, a in vec.items():
            w, loops = apply_connectivity(c, v)
            out[w] = out.get(w, 0) + coef * a * beta**loops
    return out


def _check_sin(params: SpectralParams):
    if params.frac is not None:
        if params.frac.denominator == 1:
            raise SingularParameterError("sin(lambda) vanishes", index=0)
    elif abs(params.sin(params.lam)) < 1e-15:
        raise SingularParameterError("sin(lambda) vanishes", index=0)


def sector_weight(d: int, params: SpectralParams):
    _check_sin(params)
    return params.sin((d + 1) * params.lam) / params.sin(params.lam)


def weight_matrix(n: int, params: SpectralParams) -> SectorMatrix:
    """Diagonal W with sin((d+1) lambda)/sin(lambda) on the sector with d defects."""
    basis = get_basis(n)
    dtype = object if params.extended else complex
    diag = np.zeros(len(basis), dtype=dtype)
    for d, sl in basis.sectors.items():
        diag[sl] = sector_weight(d, params)
    out = np.zeros((len(basis), len(basis)), dtype=dtype)
    if params.extended:
        out[:, :] = params.scalar(0)
    np.fill_diagonal(out, diag)
    return SectorMatrix(n, out)


def sector_traces(m: SectorMatrix) -> dict[int, Any]:
    return {d: np.trace(m.block(d, d)) for d in m.sectors}


def _even_sectors(n: int) -> list[int]:
    if n % 2:
        raise ValueError("the defect-counting matrices are defined for even N")
    return list(range(0, n + 1, 2))


def matrix_M(n: int, params: SpectralParams) -> tuple[list[int], np.ndarray]:
    """M[d, d'] = beta^(-d') dim V_{d'}^d for d' >= d (indices are even defect numbers)."""
    ds = _even_sectors(n)
    beta = params.beta
    if _beta_vanishes(params):
        raise SingularParameterError("beta vanishes", index=None)
    m = np.zeros((len(ds), len(ds)), dtype=complex)
    for a, d in enumerate(ds):
        for b, dp in enumerate(ds):
            if dp >= d:
                m[a, b] = beta ** (-dp) * link_dim(dp, d)
    return ds, m


def matrix_M_inverse(n: int, params: SpectralParams) -> tuple[list[int], np.ndarray]:
    """Closed-form inverse: (-1)^((d+d')/2) beta^d binom((d+d')/2, d) for d' >= d."""
    ds = _even_sectors(n)
    beta = params.beta
    m = np.zeros((len(ds), len(ds)), dtype=complex)
    for a, d in enumerate(ds):
        for b, dp in enumerate(ds):
            if dp >= d:
                h = (d + dp) // 2
                m[a, b] = (-1) ** h * beta**d * math.comb(h, d)
    return ds, m


def _beta_vanishes(params: SpectralParams) -> bool:
    if params.frac is not None:
        return (params.frac - Fraction(1, 2)).denominator == 1
    return abs(params.beta) < 1e-15
