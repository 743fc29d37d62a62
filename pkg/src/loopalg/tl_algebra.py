"""The Temperley-Lieb algebra TL_N(beta) on planar connectivities."""
from __future__ import annotations

import cmath
import json
import math
import os
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Iterable, Mapping

import mpmath

from ._strands import INF, trace
from .linkspace import Connectivity, LinkError, LinkState, enumerate_connectivities

EXTENDED_DPS = 50


class SingularParameterError(ValueError):
    """A formula or construction hits a zero denominator at the given lambda."""

    def __init__(self, message: str, index: Any = None):
        super().__init__(message)
        self.index = index


def default_precision() -> str:
    return os.environ.get("LOOPALG_PRECISION", "double")


@dataclass(frozen=True)
class SpectralParams:
    """Spectral parameter lambda (rational multiple of pi or real) and anisotropy u.

    ``frac`` holds lambda/pi when it is rational; criticality is decided from it
    exactly. ``precision`` selects complex doubles or mpmath numbers with 50
    significant digits.
    """

    lam: Any
    u: Any = 0.0
    frac: Fraction | None = None
    precision: str = "double"

    @classmethod
    def rational(cls, a: int, b: int, u: float = 0.0, precision: str | None = None) -> "SpectralParams":
        if b == 0:
            raise ValueError("denominator must be non-zero")
        frac = Fraction(a, b)
        precision = precision or default_precision()
        if precision == "extended":
            mpmath.mp.dps = max(mpmath.mp.dps, EXTENDED_DPS)
            lam = mpmath.pi * frac.numerator / frac.denominator
            u = mpmath.mpf(u)
        else:
            lam = math.pi * frac.numerator / frac.denominator
        return cls(lam, u, frac, precision)

    @classmethod
    def real(cls, lam: float, u: float = 0.0, precision: str | None = None) -> "SpectralParams":
        precision = precision or default_precision()
        if precision == "extended":
            mpmath.mp.dps = max(mpmath.mp.dps, EXTENDED_DPS)
            return cls(mpmath.mpf(lam), mpmath.mpf(u), None, precision)
        return cls(float(lam), float(u), None, precision)

    # --- scalar backend -----------------------------------------------
    @property
    def extended(self) -> bool:
        return self.precision == "extended"

    def sin(self, x):
        if self.extended:
            return mpmath.sin(x)
        return cmath.sin(x) if isinstance(x, complex) else math.sin(x)

    def cos(self, x):
        if self.extended:
            return mpmath.cos(x)
        return cmath.cos(x) if isinstance(x, complex) else math.cos(x)

    def expi(self, x):
        """exp(i x)."""
        return mpmath.expj(x) if self.extended else cmath.exp(1j * x)

    def scalar(self, x):
        return mpmath.mpc(x) if self.extended else complex(x)

    @property
    def pi(self):
        return mpmath.pi if self.extended else math.pi

    # --- derived quantities -------------------------------------------
    @property
    def Lam(self):
        """Lambda = pi - lambda."""
        return self.pi - self.lam

    @property
    def beta(self):
        return 2 * self.cos(self.lam)

    @property
    def q(self):
        return self.expi(self.lam)

    def S(self, k):
        """sin(k Lambda); k may be a half-integer."""
        return self.sin(k * self.Lam)

    def C(self, k):
        """cos(k Lambda)."""
        return self.cos(k * self.Lam)

    @property
    def Lam_frac(self) -> Fraction | None:
        """Lambda/pi reduced to [0, 2), when lambda is rational."""
        if self.frac is None:
            return None
        return (1 - self.frac) % 2

    def is_critical(self, n: int) -> bool:
        """True iff exp(i Lambda) is a 2l-th root of unity for some 2 <= l <= n."""
        lf = self.Lam_frac
        if lf is None:
            return False
        b = lf.denominator
        return any(l % b == 0 for l in range(2, n + 1))

    def shifted(self, eps) -> "SpectralParams":
        """Same parameters with lambda moved by ``eps`` (rationality dropped)."""
        return replace(self, lam=self.lam + eps, frac=None)

    def with_u(self, u) -> "SpectralParams":
        return replace(self, u=mpmath.mpf(u) if self.extended else u)

    def with_precision(self, precision: str) -> "SpectralParams":
        if self.frac is not None:
            return SpectralParams.rational(self.frac.numerator, self.frac.denominator,
                                           float(self.u), precision)
        if precision == "extended":
            return SpectralParams.real(self.lam, self.u, precision)
        return SpectralParams(float(self.lam), float(self.u), None, precision)


# --- connectivities ------------------------------------------------------

def generator(i: int, n: int) -> Connectivity:
    """e_i (1-indexed): joins bottom i, i+1 and top i, i+1, identity elsewhere."""
    if not 1 <= i <= n - 1:
        raise LinkError(f"generator index {i} outside 1..{n - 1}")
    p = list(Connectivity.identity(n).partner)
    a, b = i - 1, i
    p[a], p[b] = b, a
    p[n + a], p[n + b] = n + b, n + a
    return Connectivity(n, tuple(p))


def compose(c1: Connectivity, c2: Connectivity) -> tuple[Connectivity, int]:
    """Stack ``c2`` on top of ``c1``; returns the result and the closed loop count."""
    if c1.n != c2.n:
        raise LinkError("connectivities of different sizes")
    n = c1.n
    segs = [(i, j) for i, j in enumerate(c1.partner) if i < j]
    segs += [(2 * n + i, 2 * n + j) for i, j in enumerate(c2.partner) if i < j]
    segs += [(n + k, 2 * n + k) for k in range(n)]
    terminals = list(range(n)) + list(range(3 * n, 4 * n))
    partner, loops = trace(4 * n, segs, terminals)

    def relabel(x: int) -> int:
        return x if x < n else x - 2 * n

    p = [0] * (2 * n)
    for t in terminals:
        p[relabel(t)] = relabel(partner[t])
    return Connectivity(n, tuple(p)), loops


def closure_loops(c: Connectivity) -> int:
    """Loops formed when every top point is joined to the bottom point below it."""
    n = c.n
    segs = [(i, j) for i, j in enumerate(c.partner) if i < j]
    segs += [(k, n + k) for k in range(n)]
    return trace(2 * n, segs, [])[1]


def delta_of(c: Connectivity) -> int:
    """Largest defect number among link states u with rho(c)_uu != 0.

    A contiguous bottom arc (i, i+1) of c must appear in every eigenstate,
    so cap top points i, i+1 with the same arc and drop both pairs; repeat
    until the remaining diagram is the unit. Its size is the answer.
    """
    n = c.n
    partner = list(c.partner)
    while True:
        arc = next((i for i in range(n - 1) if partner[i] == i + 1), None)
        if arc is None:
            return n
        top_a, top_b = n + arc, n + arc + 1
        p, q = partner[top_a], partner[top_b]
        if p != top_b:
            partner[p], partner[q] = q, p
        gone = {arc, arc + 1, top_a, top_b}
        keep = [x for x in range(2 * n) if x not in gone]
        relabel = {x: k for k, x in enumerate(keep)}
        partner = [relabel[partner[x]] for x in keep]
        n -= 2


# --- algebra elements ----------------------------------------------------

class TLElement:
    """Finite linear combination of connectivities."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Connectivity, Any] | None = None):
        self.n = n
        self.terms: dict[Connectivity, Any] = {}
        for c, x in (terms or {}).items():
            if c.n != n:
                raise LinkError("term of the wrong size")
            if x != 0:
                self.terms[c] = x

    @classmethod
    def identity(cls, n: int) -> "TLElement":
        return cls(n, {Connectivity.identity(n): 1})

    @classmethod
    def gen(cls, i: int, n: int) -> "TLElement":
        return cls(n, {generator(i, n): 1})

    @classmethod
    def basis(cls, c: Connectivity) -> "TLElement":
        return cls(c.n, {c: 1})

    def coeff(self, c: Connectivity):
        return self.terms.get(c, 0)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __add__(self, other: "TLElement") -> "TLElement":
        out = dict(self.terms)
        for c, x in other.terms.items():
            out[c] = out.get(c, 0) + x
        return TLElement(self.n, out)

    def __sub__(self, other: "TLElement") -> "TLElement":
        return self + (-1) * other

    def __rmul__(self, s) -> "TLElement":
        return TLElement(self.n, {c: s * x for c, x in self.terms.items()})

    def __neg__(self) -> "TLElement":
        return (-1) * self

    def mul(self, other: "TLElement", beta) -> "TLElement":
        """Algebra product ``self * other`` (``other`` drawn on top)."""
        out: dict[Connectivity, Any] = {}
        for c1, x in self.terms.items():
            for c2, y in other.terms.items():
                c, loops = compose(c1, c2)
                out[c] = out.get(c, 0) + x * y * beta**loops
        return TLElement(self.n, out)

    def max_abs_diff(self, other: "TLElement") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coeff(c) - other.coeff(c)) for c in keys), default=0.0)

    def to_json(self) -> str:
        return json.dumps([
            {"partner": list(c.partner), "coeff": [float(complex(x).real), float(complex(x).imag)]}
            for c, x in sorted(self.terms.items(), key=lambda t: t[0].partner)
        ])

    @classmethod
    def from_json(cls, text: str, n: int) -> "TLElement":
        terms = {}
        for item in json.loads(text):
            re_, im_ = item["coeff"]
            terms[Connectivity(n, tuple(item["partner"]))] = complex(re_, im_)
        return cls(n, terms)


def product(elements: Iterable[TLElement], beta) -> TLElement:
    it = iter(elements)
    acc = next(it)
    for x in it:
        acc = acc.mul(x, beta)
    return acc


def trace_tau(x: TLElement, params: SpectralParams):
    """Markov trace: each connectivity contributes beta to its closure loop count."""
    beta = params.beta
    return sum((coef * beta ** closure_loops(c) for c, coef in x.terms.items()), params.scalar(0))


def split_by_delta(x: TLElement) -> dict[int, TLElement]:
    """Decompose x into the parts whose connectivities have a given through-line count."""
    parts: dict[int, dict] = {}
    for c, coef in x.terms.items():
        parts.setdefault(delta_of(c), {})[c] = coef
    return {d: TLElement(x.n, t) for d, t in parts.items()}


# --- Gram form on link states --------------------------------------------

def gram_loops(v: LinkState, w: LinkState) -> int | None:
    """Loops closed by gluing w to the mirror image of v; None if a defect dead-ends."""
    if v.n != w.n:
        raise LinkError("link states of different sizes")
    if v.d != w.d:
        return None
    n = v.n
    segs = [(k, n + k) for k in range(n)]
    segs += [(i, j) for i, j in v.arcs]
    segs += [(n + i, n + j) for i, j in w.arcs]
    v_def = list(v.defects)
    w_def = [n + k for k in w.defects]
    partner, loops = trace(2 * n, segs, v_def + w_def)
    for t in v_def:
        if partner[t] == INF or partner[t] < n:
            return None
    return loops


def gram(v: LinkState, w: LinkState, params: SpectralParams):
    loops = gram_loops(v, w)
    if loops is None:
        return params.scalar(0)
    return params.scalar(params.beta**loops)


def gram_matrix(n: int, params: SpectralParams):
    import numpy as np
    from .linkspace import enumerate_link_basis

    states = enumerate_link_basis(n)
    g = np.zeros((len(states), len(states)), dtype=object if params.extended else complex)
    for a, v in enumerate(states):
        for b, w in enumerate(states):
            g[a, b] = gram(v, w, params)
    return g


def all_connectivities(n: int) -> tuple[Connectivity, ...]:
    return enumerate_connectivities(n)
