"""Sector spectra, Jordan structure and commuting-family decompositions.

Matrices here act on the ordered link basis, where the defect number never
increases: the subspace UpTo_d of states with at most d defects is spanned by
a leading block of coordinates and is invariant.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .link_rep import SectorMatrix

DEFAULT_TOL = 1e-9
EXTENDED_TOL = 1e-30


class AmbiguousClusterWarning(UserWarning):
    pass


# --- linear algebra helpers ----------------------------------------------

def numeric_rank(a: np.ndarray, tol: float, scale: float | None = None) -> int:
    """Singular values above tol * scale (default sigma_max) count."""
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.sum(s > tol * ref))


def null_space(a: np.ndarray, tol: float, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical kernel; threshold tol * scale (default sigma_max)."""
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(a)
    ref = scale if scale is not None else (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol * ref)) if ref > 0 else 0
    return vh[rank:].conj().T


def orth(a: np.ndarray, tol: float, scale: float | None = None) -> np.ndarray:
    if a.shape[1] == 0:
        return a
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    ref = (s[0] if s.size else 0.0) if scale is None else scale
    if ref == 0:
        return a[:, :0]
    return u[:, : int(np.sum(s > tol * ref))]


def cluster_values(values: Sequence[complex], radius: float) -> list[list[int]]:
    """Union-find over values closer than ``radius``; returns index groups."""
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: (np.mean([values[i] for i in g]).real,
                                                   np.mean([values[i] for i in g]).imag))


def _as_complex(m: SectorMatrix | np.ndarray) -> np.ndarray:
    data = m.data if isinstance(m, SectorMatrix) else m
    return np.asarray(data.astype(complex))


# --- sector spectra ------------------------------------------------------

def sector_spectrum(m: SectorMatrix) -> dict[int, np.ndarray]:
    """Eigenvalues of each diagonal block; their union is the spectrum of m."""
    if not m.is_block_upper_triangular(tol=1e-12 * max(1.0, float(np.abs(_as_complex(m)).max()))):
        raise ValueError("matrix is not block upper triangular in the defect grading")
    out = {}
    for d in m.sectors:
        blk = _as_complex(m.block(d, d))
        out[d] = np.linalg.eigvals(blk) if blk.size else np.zeros(0, dtype=complex)
    return out


# --- Jordan analysis -----------------------------------------------------

@dataclass
class JordanReport:
    eigenvalue: complex
    algebraic_multiplicity: int
    block_size_histogram: dict[int, int]
    sector_links: list[tuple[int, int]]
    rank_tolerance: float
    sectors: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def max_block(self) -> int:
        return max(self.block_size_histogram, default=0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalue": [float(self.eigenvalue.real), float(self.eigenvalue.imag)],
            "algebraic_multiplicity": self.algebraic_multiplicity,
            "block_size_histogram": {str(k): v for k, v in sorted(self.block_size_histogram.items())},
            "sector_links": [list(x) for x in self.sector_links],
            "sectors": self.sectors,
            "rank_tolerance": self.rank_tolerance,
            "warnings": self.warnings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _rank_sequence(shifted: np.ndarray, tol: float, floor: float = 0.0) -> list[int]:
    """rank (A - mu)^k for k = 0, 1, ... until it stalls; ``floor`` is ||A||."""
    n = shifted.shape[0]
    ranks = [n]
    # powers of a nilpotent part shrink, so compare against ||A - mu||^k
    # rather than against the power's own largest singular value
    top = float(np.linalg.norm(shifted, 2)) if n else 0.0
    if top <= tol * floor or top == 0.0:
        return [n, 0]
    power = np.eye(n, dtype=complex)
    k = 0
    while True:
        power = power @ shifted
        k += 1
        r = numeric_rank(power, tol, top**k)
        ranks.append(r)
        if r == ranks[-2] or len(ranks) > n + 1:
            return ranks


def _histogram(ranks: list[int]) -> dict[int, int]:
    ext = ranks + [ranks[-1]]
    hist = {}
    for s in range(1, len(ranks)):
        count = (ext[s - 1] - ext[s]) - (ext[s] - ext[s + 1])
        if count:
            hist[s] = count
    return hist


def jordan_analyze(m: SectorMatrix, tol: float = DEFAULT_TOL) -> list[JordanReport]:
    """Block sizes per eigenvalue and the sector pairs joined by Jordan chains.

    Eigenvalues come from the diagonal blocks. Block sizes follow from the
    rank sequence of (A - mu)^k. A link (d, d') means a chain whose head
    first appears in UpTo_d and whose image first appears in UpTo_d';
    these are counted by inclusion-exclusion on
    f(d, d') = dim((A - mu) G_d  intersect  UpTo_d'),
    where G_d is the generalized eigenspace of A restricted to UpTo_d.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _as_complex(m)
    n = a.shape[0]
    norm_a = float(np.linalg.norm(a, 2)) if n else 0.0
    spec = sector_spectrum(m)
    vals, owner = [], []
    for d, ev in spec.items():
        for x in ev:
            vals.append(complex(x))
            owner.append(d)
    scale = max(1.0, max((abs(x) for x in vals), default=1.0))
    groups = cluster_values(vals, tol * scale)
    centres = [np.mean([vals[i] for i in g]) for g in groups]
    ends = {d: sl.stop for d, sl in m.basis.sectors.items()}
    reports = []
    for g, mu in zip(groups, centres):
        notes = []
        for other in centres:
            if other is not mu and 0 < abs(other - mu) <= 10 * tol * scale:
                notes.append(f"another eigenvalue cluster lies within 10*tol of {mu:.6g}")
                warnings.warn(notes[-1], AmbiguousClusterWarning)
        shifted = a - mu * np.eye(n)
        ranks = _rank_sequence(shifted, tol, norm_a)
        hist = _histogram(ranks)
        mult = n - ranks[-1]
        sectors = sorted({owner[i] for i in g})
        links = []
        if max(hist, default=1) > 1:
            depth = max(hist)
            top = max(float(np.linalg.norm(shifted, 2)), 1e-300)
            gen: dict[int, np.ndarray] = {}
            for d in sectors:
                sub = shifted[: ends[d], : ends[d]]
                gen[d] = null_space(np.linalg.matrix_power(sub, depth), tol, top**depth)

            def f(d, dp):
                if d not in gen or dp not in ends:
                    return 0
                sub = shifted[: ends[d], : ends[d]]
                img = orth(sub @ gen[d], tol, top) if gen[d].shape[1] else gen[d]
                if img.shape[1] == 0:
                    return 0
                if ends[dp] >= ends[d]:
                    return img.shape[1]
                return img.shape[1] - numeric_rank(img[ends[dp]:, :], tol, 1.0)

            def lower(d):
                prev = [s for s in sectors if s < d]
                return max(prev) if prev else None

            for d in sectors:
                for dp in sectors:
                    if dp >= d:
                        continue
                    d0, dp0 = lower(d), lower(dp)
                    count = f(d, dp)
                    if d0 is not None:
                        count -= f(d0, dp)
                    if dp0 is not None:
                        count -= f(d, dp0)
                    if d0 is not None and dp0 is not None:
                        count += f(d0, dp0)
                    if count > 0:
                        links.append((d, dp))
        reports.append(JordanReport(complex(mu), mult, hist, links, tol, sectors, notes))
    return reports


def detected_links(reports: Sequence[JordanReport]) -> set[tuple[int, int]]:
    return {link for r in reports for link in r.sector_links}


def is_diagonalizable(reports: Sequence[JordanReport]) -> bool:
    return all(r.max_block <= 1 for r in reports)


def diagonal_blocks_diagonalizable(m: SectorMatrix, tol: float = DEFAULT_TOL) -> dict[int, bool]:
    """Per-sector check that the diagonal block itself has no Jordan block."""
    out = {}
    for d in m.sectors:
        data = _as_complex(m.block(d, d))
        ev = np.linalg.eigvals(data)
        scale = max(1.0, float(np.abs(ev).max()))
        ok = True
        for g in cluster_values(list(ev), tol * scale):
            mu = np.mean(ev[g])
            ranks = _rank_sequence(data - mu * np.eye(len(data)), tol, float(np.linalg.norm(data, 2)))
            if max(_histogram(ranks), default=1) > 1:
                ok = False
        out[d] = ok
    return out


# --- commuting families --------------------------------------------------

@dataclass
class InvariantSpace:
    eigenvalues: tuple[complex, ...]
    basis: np.ndarray  # orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a @ b - b @ a).max())


def commuting_family_refine(ms: Sequence[SectorMatrix | np.ndarray], tol: float = DEFAULT_TOL,
                            cluster_tol: float = 1e-6) -> list[InvariantSpace]:
    """Intersections of generalized eigenspaces, one eigenvalue per member.

    Each space found so far is invariant under every member, so the next
    member is restricted to it and split by its own generalized eigenspaces.
    Defective eigenvalues split under rounding by about sqrt(eps), hence the
    separate, looser ``cluster_tol``; the cluster mean is used as the value.
    """
    mats = [_as_complex(m) for m in ms]
    if not mats:
        raise ValueError("empty family")
    n = mats[0].shape[0]
    scale = max(1.0, max(float(np.abs(x).max()) for x in mats))
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            c = commutator_norm(mats[i], mats[j])
            if c > max(tol, 1e-12) * scale**2 * n:
                raise ValueError(f"members {i} and {j} do not commute (residual {c:.3g})")
    spaces = [InvariantSpace((), np.eye(n, dtype=complex))]
    for a in mats:
        nxt = []
        for sp in spaces:
            q = sp.basis
            b = q.conj().T @ a @ q
            ev = np.linalg.eigvals(b)
            for g in cluster_values(list(ev), cluster_tol * scale):
                mu = complex(np.mean(ev[g]))
                shifted = b - mu * np.eye(len(b))
                power = np.linalg.matrix_power(shifted, len(g))
                ker = null_space(power, tol * 100, scale=max(1.0, float(np.linalg.norm(shifted, 2))) ** len(g))
                if ker.shape[1] != len(g):
                    # fall back to the smallest singular vectors matching the multiplicity
                    _, _, vh = np.linalg.svd(power)
                    ker = vh[-len(g):].conj().T
                nxt.append(InvariantSpace(sp.eigenvalues + (mu,), q @ ker))
        spaces = nxt
    return spaces


def invariance_residual(space: InvariantSpace, a: np.ndarray) -> float:
    """Norm of the part of A Q that leaves span(Q)."""
    q = space.basis
    aq = _as_complex(a) @ q
    return float(np.abs(aq - q @ (q.conj().T @ aq)).max()) if q.shape[1] else 0.0
