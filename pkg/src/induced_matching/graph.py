"""Graphs as packed bit rows, G(n,p) samplers, induced-matching predicates.

Vertices are labelled ``0..n-1``. Adjacency row ``rows[v]`` is a Python int
whose bit ``u`` is set iff ``uv`` is an edge, so pair queries are a shift and
set intersections are a single ``&``.

Random streams: an integer ``seed`` is fed to :class:`numpy.random.SeedSequence`
and drives a PCG64 generator (``numpy.random.default_rng(seed)``). Per-sample
seeds for experiments come from :func:`derive_seed`, which hashes
``(master_seed, *spawn_key)`` through the same SeedSequence mixing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_VERTICES = 1 << 16

Pair = tuple[int, int]


@dataclass(frozen=True)
class GnpParams:
    n: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.n > MAX_VERTICES:
            raise ValueError(f"n > {MAX_VERTICES} is not supported")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph on ``range(n)``."""

    n: int
    rows: tuple[int, ...]
    edge_count: int = field(init=False)

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ValueError("need exactly one adjacency row per vertex")
        full = (1 << self.n) - 1
        total = 0
        for v, row in enumerate(self.rows):
            if row & ~full or row < 0:
                raise ValueError(f"row {v} has bits outside range({self.n})")
            if (row >> v) & 1:
                raise ValueError(f"self-loop at vertex {v}")
            total += row.bit_count()
        for v, row in enumerate(self.rows):
            r = row
            while r:
                low = r & -r
                u = low.bit_length() - 1
                if not (self.rows[u] >> v) & 1:
                    raise ValueError(f"asymmetric adjacency between {v} and {u}")
                r ^= low
        object.__setattr__(self, "edge_count", total // 2)

    @classmethod
    def _trusted(cls, n: int, rows: tuple[int, ...]) -> Graph:
        # rows built by this module are symmetric and loop-free by construction
        g = object.__new__(cls)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "rows", rows)
        object.__setattr__(g, "edge_count", sum(r.bit_count() for r in rows) // 2)
        return g

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Pair]) -> Graph:
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls._trusted(n, tuple(rows))

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> Graph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def path(cls, n: int) -> Graph:
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)))

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def neighbors(self, v: int) -> list[int]:
        return bits(self.rows[v])

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def edges(self) -> list[Pair]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        out = []
        for u, row in enumerate(self.rows):
            out.extend((u, v) for v in bits(row >> (u + 1) << (u + 1)))
        return out

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            a[u, v] = a[v, u] = True
        return a

    def delete_vertex(self, v: int) -> Graph:
        """Isolate ``v`` (vertex labels are kept, so ``n`` is unchanged)."""
        mask = ~(1 << v)
        rows = tuple(0 if u == v else r & mask for u, r in enumerate(self.rows))
        return Graph._trusted(self.n, rows)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return hash((self.n, self.rows))

    def __repr__(self):
        return f"Graph(n={self.n}, edge_count={self.edge_count})"


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint pairs in canonical order.

    Each pair is stored sorted and the pairs are sorted lexicographically, so
    two matchings on the same pair set compare (and hash) equal.
    """

    pairs: tuple[Pair, ...] = ()

    def __post_init__(self):
        canon = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.pairs))
        seen: set[int] = set()
        for u, v in canon:
            if u == v:
                raise ValueError(f"degenerate pair ({u}, {v})")
            if u in seen or v in seen:
                raise ValueError("pairs of a matching must be vertex-disjoint")
            seen.update((u, v))
        object.__setattr__(self, "pairs", canon)

    def __len__(self):
        return len(self.pairs)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def vertices(self) -> list[int]:
        return sorted(x for pair in self.pairs for x in pair)

    def vertex_mask(self) -> int:
        mask = 0
        for u, v in self.pairs:
            mask |= (1 << u) | (1 << v)
        return mask

    def without(self, pair: Pair) -> Matching:
        pair = tuple(sorted(pair))
        return Matching(tuple(p for p in self.pairs if p != pair))

    def to_json(self) -> list[list[int]]:
        return [list(p) for p in self.pairs]


# -- sampling -----------------------------------------------------------------


def derive_seed(master_seed: int, *spawn_key: int) -> int:
    """64-bit seed for the stream at ``spawn_key`` under ``master_seed``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in spawn_key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column arrays of all ``C(n,2)`` pairs in lexicographic order."""
    return np.triu_indices(n, k=1)


def _rows_from_pairs(n: int, iu: np.ndarray, ju: np.ndarray, present: np.ndarray) -> tuple[int, ...]:
    rows = [0] * n
    for u, v in zip(iu[present].tolist(), ju[present].tolist()):
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return tuple(rows)


def sample_gnp(params: GnpParams) -> Graph:
    """G(n,p): every pair in lexicographic order is an edge independently.

    One uniform draw per pair, edge iff ``draw < p``; ``p=0`` and ``p=1``
    give the empty and complete graph exactly.
    """
    n, p = params.n, params.p
    rng = np.random.default_rng(params.seed)
    iu, ju = pair_index(n)
    present = rng.random(iu.size) < p
    return Graph._trusted(n, _rows_from_pairs(n, iu, ju, present))


def sample_gnp_product(params: GnpParams) -> Graph:
    """G(n,p) built vertex by vertex as a product of independent coordinates.

    For ``i = 1..n-1`` draw ``d ~ Bi(i, p)`` as ``i`` Bernoulli trials, then a
    uniform ``d``-subset of ``{0..i-1}`` becomes the lower neighbourhood of
    vertex ``i``.
    """
    n, p = params.n, params.p
    rng = np.random.default_rng(params.seed)
    rows = [0] * n
    for i in range(1, n):
        d = int(np.count_nonzero(rng.random(i) < p))
        if d == 0:
            continue
        for u in rng.choice(i, size=d, replace=False).tolist():
            rows[i] |= 1 << u
            rows[u] |= 1 << i
    return Graph._trusted(n, tuple(rows))


def sample_gnp_batch(n: int, p: float, count: int, seed: int) -> np.ndarray:
    """``count`` independent G(n,p) samples as a ``(count, C(n,2))`` bool array.

    Column order is :func:`pair_index`. Used where per-graph objects would be
    too slow (Monte Carlo over 10^5 graphs).
    """
    rng = np.random.default_rng(seed)
    return rng.random((count, n * (n - 1) // 2)) < p


def graph_from_pair_row(n: int, row: np.ndarray) -> Graph:
    iu, ju = pair_index(n)
    return Graph._trusted(n, _rows_from_pairs(n, iu, ju, np.asarray(row, dtype=bool)))


# -- matchings ----------------------------------------------------------------


def _check_in_range(g: Graph, m: Matching) -> None:
    for u, v in m.pairs:
        if not (0 <= u < g.n and 0 <= v < g.n):
            raise ValueError(f"pair ({u}, {v}) out of range for n={g.n}")


def is_induced_matching(g: Graph, m: Matching) -> bool:
    """True iff every pair of ``m`` is an edge and ``V(m)`` spans no other edge."""
    _check_in_range(g, m)
    span = m.vertex_mask()
    rows = g.rows
    for u, v in m.pairs:
        if rows[u] & span != 1 << v or rows[v] & span != 1 << u:
            return False
    return True


def iter_matchings(vertices: Sequence[int] | int, k: int) -> Iterator[tuple[Pair, ...]]:
    """All sets of ``k`` disjoint pairs on ``vertices``, each in canonical order.

    Pairs are generated by always matching the smallest unused chosen vertex,
    so every matching appears exactly once.
    """
    if isinstance(vertices, int):
        vertices = range(vertices)
    vertices = sorted(vertices)
    for support in combinations(vertices, 2 * k):
        yield from _perfect_matchings(support)


def _perfect_matchings(support: Sequence[int]) -> Iterator[tuple[Pair, ...]]:
    if not support:
        yield ()
        return
    first, rest = support[0], support[1:]
    for j, partner in enumerate(rest):
        remaining = rest[:j] + rest[j + 1:]
        for tail in _perfect_matchings(remaining):
            yield ((first, partner),) + tail


def count_induced_matchings(g: Graph, t: int) -> int:
    """Number of induced matchings of size ``t`` (exhaustive; small graphs only)."""
    edges = g.edges()
    total = 0
    for chosen in combinations(edges, t):
        try:
            m = Matching(chosen)
        except ValueError:
            continue
        if is_induced_matching(g, m):
            total += 1
    return total


def conflict_graph(g: Graph) -> Graph:
    """Graph on the edges of ``g`` (lexicographic index) joining incompatible edges.

    Edges ``ab`` and ``cd`` conflict iff they share an endpoint or some
    endpoint of one is adjacent to some endpoint of the other. Independent
    sets of size t are exactly the induced matchings of size t.
    """
    edges = g.edges()
    incident = [0] * g.n
    for idx, (u, v) in enumerate(edges):
        incident[u] |= 1 << idx
        incident[v] |= 1 << idx
    rows = []
    for idx, (u, v) in enumerate(edges):
        closed = g.rows[u] | g.rows[v] | (1 << u) | (1 << v)
        row = 0
        for w in bits(closed):
            row |= incident[w]
        rows.append(row & ~(1 << idx))
    return Graph._trusted(len(edges), tuple(rows))


def count_independent_sets(g: Graph, t: int) -> int:
    total = 0
    for subset in combinations(range(g.n), t):
        mask = 0
        for v in subset:
            mask |= 1 << v
        if all(g.rows[v] & mask == 0 for v in subset):
            total += 1
    return total


# -- text format --------------------------------------------------------------


def read_graph(text: str) -> Graph:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"`` with ``0 <= u < v < n``.

    Lines starting with ``#`` and blank lines are skipped.
    """
    lines = [
        ln.strip() for ln in text.splitlines()
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise ValueError("missing header line 'n m'")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"malformed header {lines[0]!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError(f"malformed header {lines[0]!r}") from None
    if n < 1 or m < 0:
        raise ValueError(f"malformed header {lines[0]!r}")
    if n > MAX_VERTICES:
        raise ValueError(f"n > {MAX_VERTICES} is not supported")
    body = lines[1:]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    seen: set[Pair] = set()
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"malformed edge line {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"malformed edge line {ln!r}") from None
        if u == v:
            raise ValueError(f"self-loop {ln!r}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"vertex out of range in {ln!r}")
        if u > v:
            raise ValueError(f"edge must be written 'u v' with u < v: {ln!r}")
        if (u, v) in seen:
            raise ValueError(f"duplicate edge {ln!r}")
        seen.add((u, v))
    return Graph.from_edges(n, seen)


def write_graph(g: Graph) -> str:
    edges = g.edges()
    out = [f"{g.n} {len(edges)}"]
    out.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(out) + "\n"
