"""Maximum induced matching: exhaustive oracle, branch and bound, heuristics.

The exact solver searches for a maximum independent set of the conflict
graph (equivalently a maximum clique of its complement) with bitset
candidate sets and a greedy-colouring bound. The brute-force oracle works on
the original graph and never builds the conflict graph, so the two routes
share no search code.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import RefusalError
from .graph import Graph, Matching, bits, conflict_graph, is_induced_matching

BRUTEFORCE_MAX_N = 16


@dataclass(frozen=True)
class SolveResult:
    size: int
    witness: Matching
    optimal: bool
    nodes_explored: int = 0

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "witness": self.witness.to_json(),
            "optimal": self.optimal,
            "nodes_explored": self.nodes_explored,
        }


def mim_bruteforce(g: Graph) -> SolveResult:
    """Enumerate every induced matching by backtracking over the edge list."""
    if g.n > BRUTEFORCE_MAX_N:
        raise RefusalError(f"brute force is capped at n <= {BRUTEFORCE_MAX_N}, got n={g.n}")
    edges = g.edges()
    rows = g.rows
    best: list[tuple[int, int]] = []
    chosen: list[tuple[int, int]] = []
    nodes = 0

    def extend(start: int, blocked: int) -> None:
        # blocked = chosen vertices together with all their neighbours
        nonlocal best, nodes
        nodes += 1
        if len(chosen) > len(best):
            best = list(chosen)
        for i in range(start, len(edges)):
            u, v = edges[i]
            if (blocked >> u) & 1 or (blocked >> v) & 1:
                continue
            chosen.append((u, v))
            extend(i + 1, blocked | rows[u] | rows[v] | (1 << u) | (1 << v))
            chosen.pop()

    extend(0, 0)
    return SolveResult(len(best), Matching(tuple(best)), True, nodes)


class _Timeout(Exception):
    pass


def max_independent_set(
    adjacency: tuple[int, ...] | list[int],
    time_budget: float | None = None,
    initial: list[int] | None = None,
) -> tuple[list[int], bool, int]:
    """Maximum independent set of a graph given as bitset rows.

    Returns ``(vertices, optimal, nodes_explored)``. Vertices are relabelled by
    non-increasing degree in the complement, then a clique search in the
    complement prunes with the number of colour classes of a greedy colouring.
    When ``time_budget`` (seconds) runs out the best set found so far is
    returned with ``optimal=False``.
    """
    m = len(adjacency)
    if m == 0:
        return [], True, 0
    full = (1 << m) - 1
    compl = [full & ~row & ~(1 << v) for v, row in enumerate(adjacency)]
    order = sorted(range(m), key=lambda v: (-compl[v].bit_count(), v))
    pos = {v: i for i, v in enumerate(order)}

    def relabel(mask: int) -> int:
        out = 0
        for v in bits(mask):
            out |= 1 << pos[v]
        return out

    h = [relabel(compl[v]) for v in order]
    deadline = None if time_budget is None else time.monotonic() + time_budget

    best: list[int] = [pos[v] for v in (initial or [])]
    current: list[int] = []
    nodes = 0

    def expand(cand: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if deadline is not None and nodes & 255 == 0 and time.monotonic() > deadline:
            raise _Timeout
        # greedy colouring: each class is independent in the complement, so
        # it can contribute at most one vertex to the clique
        verts: list[int] = []
        colours: list[int] = []
        uncoloured = cand
        colour = 0
        while uncoloured:
            colour += 1
            q = uncoloured
            while q:
                low = q & -q
                v = low.bit_length() - 1
                uncoloured &= ~low
                q &= ~low & ~h[v]
                verts.append(v)
                colours.append(colour)
        size = len(current)
        for i in range(len(verts) - 1, -1, -1):
            if size + colours[i] <= len(best):
                return
            v = verts[i]
            current.append(v)
            nxt = cand & h[v]
            if nxt:
                expand(nxt)
            elif len(current) > len(best):
                best = list(current)
            current.pop()
            cand &= ~(1 << v)

    try:
        expand(full)
        optimal = True
    except _Timeout:
        optimal = False
    return sorted(order[i] for i in best), optimal, nodes


def _matching_from_edge_indices(edges: list[tuple[int, int]], idx: list[int]) -> Matching:
    return Matching(tuple(edges[i] for i in idx))


def mim_exact(g: Graph, time_budget: float | None = None) -> SolveResult:
    """Maximum induced matching via independent sets of the conflict graph.

    ``time_budget`` is in seconds (``None`` means no limit). A timeout is not
    an error: the best matching found is returned with ``optimal=False``.
    """
    edges = g.edges()
    cg = conflict_graph(g)
    seed = _greedy_independent(cg.rows)
    idx, optimal, nodes = max_independent_set(cg.rows, time_budget, initial=seed)
    witness = _matching_from_edge_indices(edges, idx)
    return SolveResult(len(idx), witness, optimal, nodes)


def _greedy_independent(rows: tuple[int, ...]) -> list[int]:
    # minimum-degree greedy, ties by index
    alive = (1 << len(rows)) - 1
    out = []
    while alive:
        v = min(bits(alive), key=lambda u: ((rows[u] & alive).bit_count(), u))
        out.append(v)
        alive &= ~rows[v] & ~(1 << v)
    return out


def mim_greedy(g: Graph, seed: int = 0) -> SolveResult:
    """Random greedy induced matching.

    Repeatedly takes a uniformly random edge among those whose endpoints are
    both still available, then removes both endpoints and all their
    neighbours. Scanning one random permutation of the edge list and taking
    every edge that is still available realises exactly that process.
    """
    edges = g.edges()
    if not edges:
        return SolveResult(0, Matching(), False, 0)
    rng = np.random.default_rng(seed)
    rows = g.rows
    available = (1 << g.n) - 1
    chosen = []
    for i in rng.permutation(len(edges)).tolist():
        u, v = edges[i]
        if (available >> u) & 1 and (available >> v) & 1:
            chosen.append((u, v))
            available &= ~(rows[u] | rows[v] | (1 << u) | (1 << v))
    return SolveResult(len(chosen), Matching(tuple(chosen)), False, len(edges))


def mim_local_search(g: Graph, start: SolveResult, rounds: int = 100, seed: int = 0) -> SolveResult:
    """Hill climbing on the conflict-graph independent set.

    Each round first inserts every free edge (no conflict with the current
    set), then looks for a (1-out, 2-in) exchange: a chosen edge ``x`` and
    two mutually compatible edges whose only conflict in the set is ``x``.
    Stops early when a round finds no improvement.
    """
    if not is_induced_matching(g, start.witness):
        raise ValueError("start witness is not an induced matching of g")
    edges = g.edges()
    index = {e: i for i, e in enumerate(edges)}
    try:
        current = [index[p] for p in start.witness.pairs]
    except KeyError:
        raise ValueError("start witness uses a non-edge") from None
    if not edges:
        return SolveResult(0, Matching(), False, 0)

    adj = conflict_graph(g).rows
    m = len(edges)
    rng = np.random.default_rng(seed)
    sol = 0
    for i in current:
        sol |= 1 << i
    moves = 0

    for _ in range(rounds):
        improved = False
        for v in rng.permutation(m).tolist():
            if not (sol >> v) & 1 and adj[v] & sol == 0:
                sol |= 1 << v
                improved = True
                moves += 1
        for x in rng.permutation(bits(sol)).tolist():
            # edges outside the set whose only conflict inside it is x
            tight = 0
            for v in bits(adj[x] & ~sol):
                if adj[v] & sol == 1 << x:
                    tight |= 1 << v
            pair = _compatible_pair(tight, adj)
            if pair is not None:
                a, b = pair
                sol = (sol & ~(1 << x)) | (1 << a) | (1 << b)
                improved = True
                moves += 1
                break
        if not improved:
            break

    result = _matching_from_edge_indices(edges, bits(sol))
    return SolveResult(len(result), result, False, moves)


def _compatible_pair(candidates: int, adj: tuple[int, ...]) -> tuple[int, int] | None:
    for a in bits(candidates):
        rest = candidates & ~adj[a] & ~((1 << (a + 1)) - 1)
        if rest:
            return a, (rest & -rest).bit_length() - 1
    return None


SOLVERS = ("exact", "bruteforce", "greedy", "greedy+local_search")


def solve(g: Graph, solver: str = "exact", time_budget: float | None = None,
          seed: int = 0, rounds: int = 1000) -> SolveResult:
    """Dispatch on solver name (one of :data:`SOLVERS`)."""
    if solver == "exact":
        return mim_exact(g, time_budget)
    if solver == "bruteforce":
        return mim_bruteforce(g)
    if solver == "greedy":
        return mim_greedy(g, seed)
    if solver == "greedy+local_search":
        return mim_local_search(g, mim_greedy(g, seed), rounds, seed)
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
