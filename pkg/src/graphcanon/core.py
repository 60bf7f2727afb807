"""Colored graphs, permutation actions, and the orderings everything else builds on.

Vertices are 0-based ints throughout: a graph on ``n`` vertices has vertex set
``{0, ..., n-1}``. Adjacency is stored as one int bitmask per vertex (bit ``v``
of ``adj[u]`` is set iff ``u ~ v``), which keeps the refinement hot loops on
``int.bit_count`` instead of set algebra.

A :class:`Coloring` is a surjective map onto ``{0, ..., m-1}``, i.e. an ordered
partition of the vertex set into ``m`` cells (cell ``i`` holds the vertices of
color ``i``).  A discrete coloring (``m == n``) doubles as a permutation: the
color tuple itself maps each vertex to its new label.

Permutations are plain tuples ``sigma`` with ``sigma[v]`` the image of ``v``.
Composition is left to right: ``compose(a, b)[v] == b[a[v]]``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence


class Graph:
    """An undirected simple graph with bitmask adjacency rows."""

    __slots__ = ("n", "adj", "__dict__")

    def __init__(self, n: int, adj: Sequence[int]):
        if n <= 0:
            raise ValueError("graph must have at least one vertex")
        if len(adj) != n:
            raise ValueError("adjacency row count does not match n")
        self.n = n
        self.adj = tuple(adj)
        for u, row in enumerate(self.adj):
            if row >> n:
                raise ValueError("adjacency bits outside vertex range")
            if row >> u & 1:
                raise ValueError("self-loops are not allowed")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside vertex range")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, adj)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Sorted tuple of edges, each as ``(u, v)`` with ``u < v``."""
        out = []
        for u in range(self.n):
            row = self.adj[u] >> (u + 1)
            v = u + 1
            while row:
                if row & 1:
                    out.append((u, v))
                row >>= 1
                v += 1
        return tuple(out)

    @property
    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    @cached_property
    def _cmp_key(self) -> int:
        # Row-major adjacency matrix read as a big binary number: row 0 is the
        # most significant block and within a row vertex 0 is the most
        # significant bit. Bigger number == bigger graph.
        n = self.n
        key = 0
        for u in range(n):
            row = self.adj[u]
            rev = 0
            for v in range(n):
                if row >> v & 1:
                    rev |= 1 << (n - 1 - v)
            key = (key << n) | rev
        return key

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph) and self.n == other.n and self.adj == other.adj
        )

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={list(self.edges)})"


class Coloring:
    """An ordered partition of ``{0..n-1}``; color ``i`` is the ``i``-th cell."""

    __slots__ = ("colors", "__dict__")

    def __init__(self, colors: Sequence[int]):
        colors = tuple(colors)
        if not colors:
            raise ValueError("coloring of an empty vertex set")
        m = max(colors) + 1
        seen = [False] * m
        for c in colors:
            if c < 0:
                raise ValueError("negative color")
            seen[c] = True
        if not all(seen):
            raise ValueError("colors must cover 0..m-1 with no gaps")
        self.colors = colors

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[int]]) -> "Coloring":
        n = sum(len(c) for c in cells)
        colors = [-1] * n
        for i, cell in enumerate(cells):
            for v in cell:
                if not (0 <= v < n) or colors[v] != -1:
                    raise ValueError("cells must partition the vertex set")
                colors[v] = i
        return cls(colors)

    @property
    def n(self) -> int:
        return len(self.colors)

    @cached_property
    def cells(self) -> tuple[tuple[int, ...], ...]:
        """Cells in color order, each cell's vertices ascending."""
        m = max(self.colors) + 1
        buckets: list[list[int]] = [[] for _ in range(m)]
        for v, c in enumerate(self.colors):
            buckets[c].append(v)
        return tuple(tuple(b) for b in buckets)

    @property
    def m(self) -> int:
        return len(self.cells)

    @property
    def discrete(self) -> bool:
        return self.m == self.n

    def cell_of(self, v: int) -> tuple[int, ...]:
        return self.cells[self.colors[v]]

    def perm(self) -> tuple[int, ...]:
        """The permutation ``v -> color(v)`` defined by a discrete coloring."""
        if not self.discrete:
            raise ValueError("only a discrete coloring defines a permutation")
        return self.colors

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Coloring) and self.colors == other.colors

    def __hash__(self) -> int:
        return hash(self.colors)

    def __repr__(self) -> str:
        inner = " | ".join(" ".join(str(v) for v in cell) for cell in self.cells)
        return f"Coloring[{inner}]"


def unit_coloring(n: int) -> Coloring:
    """The coarsest coloring: every vertex in one cell."""
    return Coloring([0] * n)


def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Left-to-right composition: apply ``a`` first, then ``b``."""
    return tuple(b[x] for x in a)


def invert(a: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(a)
    for x, y in enumerate(a):
        inv[y] = x
    return tuple(inv)


def relabel_graph(g: Graph, sigma: Sequence[int]) -> Graph:
    """The graph ``G^sigma``: edge ``(u, v)`` becomes ``(sigma[u], sigma[v])``."""
    if len(sigma) != g.n:
        raise ValueError("permutation length does not match graph order")
    adj = [0] * g.n
    for u in range(g.n):
        row = g.adj[u]
        new = 0
        v = 0
        while row:
            if row & 1:
                new |= 1 << sigma[v]
            row >>= 1
            v += 1
        adj[sigma[u]] = new
    return Graph(g.n, adj)


def act_coloring(pi: Coloring, sigma: Sequence[int]) -> Coloring:
    """The coloring ``pi^sigma`` with ``pi^sigma(sigma[v]) == pi(v)``."""
    colors = [0] * pi.n
    for v, c in enumerate(pi.colors):
        colors[sigma[v]] = c
    return Coloring(colors)


def graph_compare(g1: Graph, g2: Graph) -> int:
    """Total order on graphs: by vertex count, then by adjacency-matrix bits.

    The matrix is read row-major with vertex 0 most significant, so the graph
    whose first differing entry is 1 compares greater. Returns -1, 0 or 1.
    """
    if g1.n != g2.n:
        return -1 if g1.n < g2.n else 1
    k1, k2 = g1._cmp_key, g2._cmp_key
    if k1 == k2:
        return 0
    return -1 if k1 < k2 else 1


def is_finer(pi1: Coloring, pi2: Coloring) -> bool:
    """True iff ``pi1`` refines ``pi2``: every strict color inequality of
    ``pi2`` is preserved by ``pi1`` (equal colorings count as finer)."""
    if pi1.n != pi2.n:
        return False
    # Each pi2 cell must be a union of consecutive pi1 cells, in order.
    # Equivalent pointwise test: pi2(u) < pi2(v) implies pi1(u) < pi1(v).
    seen_pairs: dict[int, int] = {}
    for v in range(pi1.n):
        c1, c2 = pi1.colors[v], pi2.colors[v]
        prev = seen_pairs.get(c1)
        if prev is not None and prev != c2:
            return False
        seen_pairs[c1] = c2
    order = [seen_pairs[c1] for c1 in sorted(seen_pairs)]
    return order == sorted(order)


def is_automorphism(g: Graph, pi0: Coloring, sigma: Sequence[int]) -> bool:
    """True iff ``sigma`` maps the colored graph ``(G, pi0)`` onto itself."""
    if len(sigma) != g.n or sorted(sigma) != list(range(g.n)):
        return False
    if act_coloring(pi0, sigma).colors != pi0.colors:
        return False
    return relabel_graph(g, sigma) == g


class DimacsError(ValueError):
    """Raised for unreadable DIMACS input."""


def parse_dimacs(text: str) -> Graph:
    """Read a graph in DIMACS ``p edge`` format (1-based vertices).

    Comment lines start with ``c``. Duplicate and reversed edge lines are
    ignored; the edge count in the header is not enforced. Self-loops are
    rejected: this toolkit handles simple graphs only.
    """
    n = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            if len(parts) != 4 or parts[1] != "edge":
                raise DimacsError(f"line {lineno}: expected 'p edge N M'")
            try:
                n = int(parts[2])
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad vertex count") from exc
            if n <= 0:
                raise DimacsError(f"line {lineno}: vertex count must be positive")
        elif parts[0] == "e":
            if n is None:
                raise DimacsError(f"line {lineno}: edge before problem line")
            if len(parts) != 3:
                raise DimacsError(f"line {lineno}: expected 'e U V'")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad edge endpoints") from exc
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: endpoint outside 1..{n}")
            if u == v:
                raise DimacsError(f"line {lineno}: self-loop at {u}")
            a, b = min(u, v) - 1, max(u, v) - 1
            edges.add((a, b))
        else:
            raise DimacsError(f"line {lineno}: unrecognized line {parts[0]!r}")
    if n is None:
        raise DimacsError("missing problem line")
    return Graph.from_edges(n, edges)


def format_dimacs(g: Graph, comment: str | None = None) -> str:
    """Render a graph back to DIMACS ``p edge`` text (1-based vertices)."""
    lines = []
    if comment:
        for part in comment.splitlines():
            lines.append(f"c {part}")
    edges = g.edges
    lines.append(f"p edge {g.n} {len(edges)}")
    for u, v in edges:
        lines.append(f"e {u + 1} {v + 1}")
    return "\n".join(lines) + "\n"
