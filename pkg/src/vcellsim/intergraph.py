"""BS interference graph and its coloring into non-interfering groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class InterferenceGraph:
    """Undirected graph on BS indices; edges stored as (a, b) with a < b."""

    num_vertices: int
    edges: frozenset
    gamma_d: float

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on vertex {a}")
            if not (0 <= a < b < self.num_vertices):
                raise ValueError(f"edge ({a},{b}) out of range or unordered")

    def adjacency(self) -> list[set]:
        adj = [set() for _ in range(self.num_vertices)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def max_degree(self) -> int:
        if not self.edges:
            return 0
        return max(len(nbrs) for nbrs in self.adjacency())

    def to_edge_list_text(self) -> str:
        """Plain edge list, one "a b" pair per line, sorted."""
        return "".join(f"{a} {b}\n" for a, b in sorted(self.edges))


def build_interference_graph(bs_positions, partition, user_counts, gamma_d: float) -> InterferenceGraph:
    """Connect BSs of different virtual cells closer than gamma_d when at
    least one of the two serves a user.

    ``user_counts[b]`` must be the number of users whose serving BS is b.
    The distance test is strict (d < gamma_d), so gamma_d = 0 yields an
    empty edge set.
    """
    pos = np.asarray(bs_positions, dtype=float).reshape(-1, 2)
    n = pos.shape[0]
    counts = np.asarray(user_counts)
    if counts.shape[0] != n:
        raise ValueError("user_counts must have one entry per BS")
    cell_of = partition.bs_cell_index()

    diff = pos[:, None, :] - pos[None, :, :]
    dmat = np.hypot(diff[..., 0], diff[..., 1])
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            if cell_of[a] == cell_of[b]:
                continue
            if not dmat[a, b] < gamma_d:
                continue
            if counts[a] + counts[b] > 0:
                edges.add((a, b))
    return InterferenceGraph(num_vertices=n, edges=frozenset(edges), gamma_d=float(gamma_d))


@dataclass(frozen=True)
class Coloring:
    """Proper vertex coloring; groups[c] is the set of vertices with color c."""

    color_of: tuple[int, ...]
    groups: tuple[frozenset, ...]

    def __post_init__(self):
        for c, group in enumerate(self.groups):
            for v in group:
                if self.color_of[v] != c:
                    raise ValueError("groups inconsistent with color_of")
        if sorted(v for g in self.groups for v in g) != list(range(len(self.color_of))):
            raise ValueError("groups must partition the vertex set")

    @property
    def num_colors(self) -> int:
        return len(self.groups)


def color_graph(graph: InterferenceGraph) -> Coloring:
    """Recursive-largest-first coloring.

    Each color class starts from the highest-degree vertex of the yet
    uncolored subgraph and grows greedily by the candidate with the most
    neighbours already forbidden for this class; all ties break to the
    smallest vertex index. Uses at most max_degree + 1 colors.
    """
    n = graph.num_vertices
    adj = graph.adjacency()
    uncolored = set(range(n))
    groups = []
    color_of = [-1] * n

    while uncolored:
        seed = min(uncolored, key=lambda v: (-len(adj[v] & uncolored), v))
        cls = {seed}
        forbidden = adj[seed] & uncolored
        candidates = uncolored - cls - forbidden
        while candidates:
            v = min(candidates, key=lambda v: (-len(adj[v] & forbidden), v))
            cls.add(v)
            candidates.discard(v)
            newly = adj[v] & candidates
            forbidden |= newly
            candidates -= newly
        color = len(groups)
        for v in cls:
            color_of[v] = color
        groups.append(frozenset(cls))
        uncolored -= cls

    return Coloring(color_of=tuple(color_of), groups=tuple(groups))
