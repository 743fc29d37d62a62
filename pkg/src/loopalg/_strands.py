"""Strand tracing for planar diagrams.

Every diagram in the package (connectivities, stacked link states, transfer
matrix tilings, FK medial loops) reduces to the same question: given a set of
nodes of degree at most two, joined by strand segments, which terminal nodes
are joined to which, and how many closed loops are left over.
"""
from __future__ import annotations

from typing import Iterable, Sequence

INF = -1


def trace(
    n_nodes: int,
    segments: Iterable[tuple[int, int]],
    terminals: Sequence[int],
    to_infinity: Iterable[int] = (),
) -> tuple[dict[int, int], int]:
    """Follow strands through a degree-2 graph.

    ``segments`` joins pairs of nodes. ``terminals`` are the open endpoints
    whose connections we want; ``to_infinity`` are nodes whose strand escapes
    (defect lines). Returns ``(partner, loops)`` where ``partner[t]`` is the
    terminal reached from ``t`` or ``INF``; strands running from infinity to
    infinity are dropped and do not count as loops.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_nodes)]
    n_seg = 0
    for a, b in segments:
        adj[a].append((b, n_seg))
        adj[b].append((a, n_seg))
        n_seg += 1

    used = [False] * n_seg
    seen = [False] * n_nodes
    term = set(terminals)
    escape = set(to_infinity)

    def walk(start: int) -> int:
        cur = start
        seen[cur] = True
        while True:
            nxt = None
            for nb, eid in adj[cur]:
                if not used[eid]:
                    used[eid] = True
                    nxt = nb
                    break
            if nxt is None:
                return INF if cur in escape else cur
            cur = nxt
            seen[cur] = True
            if cur in term or cur in escape:
                return INF if cur in escape else cur

    partner: dict[int, int] = {}
    for t in terminals:
        if t in partner:
            continue
        end = walk(t)
        partner[t] = end
        if end != INF:
            partner[end] = t
    for s in escape:
        if not seen[s]:
            walk(s)

    loops = 0
    for node in range(n_nodes):
        if seen[node] or not adj[node]:
            continue
        # an untouched node with segments sits on a closed loop
        loops += 1
        cur = node
        seen[cur] = True
        while True:
            nxt = None
            for nb, eid in adj[cur]:
                if not used[eid]:
                    used[eid] = True
                    nxt = nb
                    break
            if nxt is None:
                break
            cur = nxt
            seen[cur] = True
    return partner, loops
