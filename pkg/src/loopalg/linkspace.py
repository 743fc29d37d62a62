"""Link states, connectivities and their encodings.

Points are 0-indexed internally. Text formats (v-notation, eta words) use
1-indexed half-point labels so that they can be compared directly with
hand-drawn diagrams.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

DEFECT = -1


class LinkError(ValueError):
    """Raised for malformed link states, words or notation strings."""


@dataclass(frozen=True)
class LinkState:
    """Non-crossing pairing of N points; ``partner[i] == -1`` marks a defect."""

    partner: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.partner)
        object.__setattr__(self, "partner", p)
        n = len(p)
        if n == 0:
            raise LinkError("link state needs at least one point")
        stack: list[int] = []
        for i, j in enumerate(p):
            if j == DEFECT:
                if stack:
                    raise LinkError(f"defect at {i} lies under an arc")
                continue
            if not 0 <= j < n or j == i or p[j] != i:
                raise LinkError(f"partner array is not an involution at {i}")
            if j > i:
                stack.append(i)
            else:
                if not stack or stack[-1] != j:
                    raise LinkError(f"arcs cross at {i}")
                stack.pop()

    @property
    def n(self) -> int:
        return len(self.partner)

    @property
    def defects(self) -> tuple[int, ...]:
        return tuple(i for i, j in enumerate(self.partner) if j == DEFECT)

    @property
    def d(self) -> int:
        return sum(1 for j in self.partner if j == DEFECT)

    @property
    def arcs(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, j) for i, j in enumerate(self.partner) if j > i)

    def sort_key(self) -> tuple:
        n = self.n
        return (self.d, tuple(n if j == DEFECT else j for j in self.partner))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "partner": list(self.partner)})

    @classmethod
    def from_json(cls, text: str) -> "LinkState":
        obj = json.loads(text)
        st = cls(tuple(obj["partner"]))
        if st.n != obj["n"]:
            raise LinkError("length does not match n")
        return st

    @classmethod
    def all_defects(cls, n: int) -> "LinkState":
        return cls((DEFECT,) * n)

    @classmethod
    def from_arcs(cls, n: int, arcs: Sequence[tuple[int, int]]) -> "LinkState":
        p = [DEFECT] * n
        for i, j in arcs:
            if p[i] != DEFECT or p[j] != DEFECT:
                raise LinkError(f"point reused by arc ({i}, {j})")
            p[i], p[j] = j, i
        return cls(tuple(p))

    def __str__(self) -> str:
        return format_link_notation(self)


@dataclass(frozen=True)
class Connectivity:
    """Planar perfect matching of 2N points.

    Bottom points are ``0..N-1`` left to right and top points ``N..2N-1`` left
    to right, so that ``N + k`` sits above ``k``.
    """

    n: int
    partner: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.partner)
        object.__setattr__(self, "partner", p)
        if len(p) != 2 * self.n:
            raise LinkError("connectivity needs 2N entries")
        for i, j in enumerate(p):
            if not 0 <= j < 2 * self.n or j == i or p[j] != i:
                raise LinkError(f"partner array is not a perfect matching at {i}")
        # walk the rectangle boundary: bottom left->right, then top right->left
        pos = {pt: k for k, pt in enumerate(_boundary_order(self.n))}
        stack: list[int] = []
        for pt in _boundary_order(self.n):
            q = p[pt]
            if pos[q] > pos[pt]:
                stack.append(pt)
            elif not stack or stack[-1] != q:
                raise LinkError("connectivity is not planar")
            else:
                stack.pop()

    @classmethod
    def identity(cls, n: int) -> "Connectivity":
        return cls(n, tuple(list(range(n, 2 * n)) + list(range(n))))

    def through_lines(self) -> int:
        n = self.n
        return sum(1 for i in range(n) if self.partner[i] >= n)


def _boundary_order(n: int) -> list[int]:
    return list(range(n)) + list(range(2 * n - 1, n - 1, -1))


def _words(n: int) -> Iterator[tuple[int, ...]]:
    """Eta words of all link states: defects only at arc depth zero."""

    def rec(prefix: list[int], depth: int):
        left = n - len(prefix)
        if left == 0:
            if depth == 0:
                yield tuple(prefix)
            return
        if depth == 0:
            prefix.append(0)
            yield from rec(prefix, 0)
            prefix.pop()
        if depth + 1 <= left - 1:
            prefix.append(1)
            yield from rec(prefix, depth + 1)
            prefix.pop()
        if depth > 0:
            prefix.append(-1)
            yield from rec(prefix, depth - 1)
            prefix.pop()

    yield from rec([], 0)


def link_dim(n: int, d: int) -> int:
    """Number of link states on ``n`` points with ``d`` defects."""
    if d < 0 or d > n or (n - d) % 2:
        return 0
    k = (n - d) // 2
    return math.comb(n, k) - (math.comb(n, k - 1) if k >= 1 else 0)


@lru_cache(maxsize=None)
def enumerate_link_basis(n: int) -> tuple[LinkState, ...]:
    """All link states on ``n`` points, sorted by defect count then partner array."""
    if n < 1:
        raise LinkError("N must be positive")
    states = [eta_decode(w) for w in _words(n)]
    states.sort(key=LinkState.sort_key)
    return tuple(states)


class LinkBasis:
    """Ordered link basis with index lookup and sector slices."""

    def __init__(self, n: int):
        self.n = n
        self.states = enumerate_link_basis(n)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.sectors: dict[int, slice] = {}
        start = 0
        for d in range(n % 2, n + 1, 2):
            size = link_dim(n, d)
            self.sectors[d] = slice(start, start + size)
            start += size

    def __len__(self) -> int:
        return len(self.states)

    def sector_of(self, i: int) -> int:
        return self.states[i].d

    def upto(self, d: int) -> int:
        """Number of basis states with at most ``d`` defects."""
        return sum(link_dim(self.n, e) for e in range(self.n % 2, d + 1, 2))


@lru_cache(maxsize=None)
def get_basis(n: int) -> LinkBasis:
    return LinkBasis(n)


@lru_cache(maxsize=None)
def enumerate_connectivities(n: int) -> tuple[Connectivity, ...]:
    """All Catalan(n) planar connectivities on 2n points."""
    order = _boundary_order(n)

    def matchings(seq: tuple[int, ...]) -> Iterator[list[tuple[int, int]]]:
        if not seq:
            yield []
            return
        first = seq[0]
        for k in range(1, len(seq), 2):
            for inner in matchings(seq[1:k]):
                for outer in matchings(seq[k + 1:]):
                    yield [(first, seq[k])] + inner + outer

    out = []
    for m in matchings(tuple(order)):
        p = [0] * (2 * n)
        for a, b in m:
            p[a], p[b] = b, a
        out.append(Connectivity(n, tuple(p)))
    out.sort(key=lambda c: c.partner)
    return tuple(out)


# --- eta words -----------------------------------------------------------

def eta_encode(w: LinkState) -> tuple[int, ...]:
    """0 for a defect, +1 where an arc opens, -1 where it closes."""
    return tuple(0 if j == DEFECT else (1 if j > i else -1) for i, j in enumerate(w.partner))


def eta_decode(word: Sequence[int]) -> LinkState:
    p = [DEFECT] * len(word)
    stack: list[int] = []
    for i, s in enumerate(word):
        if s == 1:
            stack.append(i)
        elif s == -1:
            if not stack:
                raise LinkError("eta word closes an arc that was never opened")
            j = stack.pop()
            p[i], p[j] = j, i
        elif s != 0:
            raise LinkError(f"bad eta symbol {s!r}")
    if stack:
        raise LinkError("eta word leaves arcs open")
    return LinkState(tuple(p))


def eta_to_text(word: Sequence[int]) -> str:
    return ",".join({0: "0", 1: "+", -1: "-"}[s] for s in word)


def eta_from_text(text: str) -> tuple[int, ...]:
    table = {"0": 0, "+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    try:
        return tuple(table[t.strip()] for t in text.split(",") if t.strip())
    except KeyError as exc:
        raise LinkError(f"bad eta symbol {exc.args[0]!r}") from None


# --- bubbles -------------------------------------------------------------

def arc_depths(w: LinkState) -> dict[tuple[int, int], int]:
    """Bubble order of every arc: 1 if it encloses no arc, else 1 + max inside."""
    depth: dict[tuple[int, int], int] = {}
    for i, j in sorted(w.arcs, key=lambda a: a[1] - a[0]):
        inner = [depth[(a, b)] for (a, b) in depth if i < a and b < j]
        depth[(i, j)] = 1 + max(inner, default=0)
    return depth


def max_bubble(w: LinkState) -> int:
    return max(arc_depths(w).values(), default=0)


def one_bubbles(w: LinkState) -> list[int]:
    """Left endpoints of the 1-bubbles, left to right."""
    return [i for i, j in w.arcs if j == i + 1]


# --- mu words ------------------------------------------------------------

@dataclass(frozen=True)
class Star:
    """A 2-bubble token; ``inner`` is the number of 1-bubbles it encloses."""

    inner: int

    def __str__(self) -> str:
        return "*"


MuToken = Union[int, Star]


def mu_encode(w: LinkState) -> tuple[MuToken, ...] | None:
    """Gap word between bubble markers; ``None`` when w has a 3-bubble or deeper."""
    depth = arc_depths(w)
    if depth and max(depth.values()) > 2:
        return None
    top = sorted(a for a in depth if not any(b[0] < a[0] and a[1] < b[1] for b in depth))
    # markers are half-integer positions; a 2-bubble contributes two of them
    markers: list[tuple[float, bool]] = []
    for i, j in top:
        if j == i + 1:
            markers.append((i + 0.5, False))
        else:
            markers.append((i + 0.5, False))
            markers.append((j - 0.5, True))
    n = w.n
    if not markers:
        return (n,)
    tokens: list[MuToken] = [int(markers[0][0] + 0.5)]
    for (x, _), (y, closes) in zip(markers, markers[1:]):
        gap = int(round(y - x))
        tokens.append(Star(gap // 2) if closes else gap)
    tokens.append(int(n - (markers[-1][0] + 0.5)))
    return tuple(tokens)


def mu_decode(tokens: Sequence[MuToken], n: int | None = None) -> LinkState:
    if not tokens or isinstance(tokens[0], Star) or isinstance(tokens[-1], Star):
        raise LinkError("mu word must start and end with integers")
    if len(tokens) == 1:
        return LinkState.all_defects(int(tokens[0]))
    pos = tokens[0] - 0.5
    arcs: list[tuple[int, int]] = []
    pending = [pos]
    for t in tokens[1:-1]:
        if isinstance(t, Star):
            s = int(pending.pop() - 0.5)
            e = int(pos + 2 * t.inner + 0.5)
            arcs.append((s, e))
            arcs.extend((s + 1 + 2 * k, s + 2 + 2 * k) for k in range(t.inner))
            pos = pos + 2 * t.inner
        else:
            pos = pos + t
            pending.append(pos)
    for x in pending:
        arcs.append((int(x - 0.5), int(x + 0.5)))
    total = int(pos + 0.5) + tokens[-1]
    if n is not None and total != n:
        raise LinkError(f"mu word describes {total} points, expected {n}")
    return LinkState.from_arcs(total, arcs)


def mu_to_text(tokens: Sequence[MuToken]) -> str:
    return "[" + ",".join(str(t) for t in tokens) + "]"


# --- v-notation ----------------------------------------------------------

def parse_link_notation(spec: str, n: int | None = None) -> LinkState:
    """Build a state by closing arcs at 1-indexed half-points, inner arcs first.

    Accepts ``"2,2,7,7"`` together with ``n`` or the long form
    ``"N=10; arcs=2,2,7,7"``.
    """
    text = spec.strip()
    if "=" in text:
        fields = {}
        for part in text.split(";"):
            if part.strip():
                key, _, val = part.partition("=")
                fields[key.strip().lower()] = val.strip()
        if "n" not in fields:
            raise LinkError("long form needs N=")
        n_long = int(fields["n"])
        if n is not None and n != n_long:
            raise LinkError("conflicting N")
        n = n_long
        text = fields.get("arcs", "")
    if n is None or n < 1:
        raise LinkError("N must be given and positive")
    labels = [int(t) for t in text.replace(" ", "").split(",") if t]
    p = [DEFECT] * n
    for lab in labels:
        if not 1 <= lab <= n - 1:
            raise LinkError(f"half-point {lab} outside 1..{n - 1}")
        left = next((i for i in range(lab - 1, -1, -1) if p[i] == DEFECT), None)
        right = next((i for i in range(lab, n) if p[i] == DEFECT), None)
        if left is None or right is None:
            raise LinkError(f"no free endpoint around half-point {lab}")
        p[left], p[right] = right, left
    return LinkState(tuple(p))


def notation_labels(w: LinkState) -> list[int]:
    return [i + 1 for i, j in sorted(w.arcs, key=lambda a: (a[1] - a[0], a[0]))]


def format_link_notation(w: LinkState) -> str:
    return f"N={w.n}; arcs=" + ",".join(str(x) for x in notation_labels(w))


# --- arc stripping -------------------------------------------------------

def strip_arcs(w: LinkState) -> tuple[int, ...]:
    """Positions of the defects of ``w``; the arcs are what is left."""
    return w.defects


def insert_arcs(inner: LinkState, host: LinkState) -> LinkState:
    """Place ``inner`` (on d points) on the defect positions of ``host``."""
    pos = host.defects
    if inner.n != len(pos):
        raise LinkError("inner state size must equal the host defect count")
    p = list(host.partner)
    for k, j in enumerate(inner.partner):
        p[pos[k]] = DEFECT if j == DEFECT else pos[j]
    return LinkState(tuple(p))
