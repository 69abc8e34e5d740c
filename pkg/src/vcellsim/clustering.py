"""Static BS clustering and user affiliation.

The BS hierarchy is built bottom-up by greedy minimax-linkage merges under
a per-level maximum cluster size; cutting the hierarchy at m clusters and
attaching each user to the cell of its best-channel BS yields the virtual
cells used by the rest of the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AFFILIATION_RULES = ("max_abs", "mean_power")


class ScheduleInfeasibleError(ValueError):
    """Raised when no cluster pair satisfies the size cap at some level."""


def minimax_radius(points) -> float:
    """Smallest over member points of the farthest distance to the set.

    Equals the radius of the smallest ball centered at a member point that
    covers the whole set.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[0] == 0:
        raise ValueError("minimax_radius of an empty point set")
    diff = pts[:, None, :] - pts[None, :, :]
    dm = np.hypot(diff[..., 0], diff[..., 1])
    return float(dm.max(axis=1).min())


def minimax_linkage(a, b) -> float:
    """Minimax radius of the union of two non-empty point sets."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("minimax_linkage needs two non-empty sets")
    return minimax_radius(np.vstack([a, b]))


@dataclass(frozen=True)
class SizeSchedule:
    """Per-level maximum cluster size: max_size[m-1] caps groups when the
    hierarchy has m clusters."""

    max_size: tuple[int, ...]

    def __post_init__(self):
        n = len(self.max_size)
        if n < 1:
            raise ValueError("schedule must cover at least one level")
        for m in range(1, n + 1):
            need = -(-n // m)  # ceil(n / m)
            if self.max_size[m - 1] < need:
                raise ValueError(
                    f"max_size[{m}]={self.max_size[m - 1]} < ceil({n}/{m})={need}; "
                    "no proper clustering can exist at that level"
                )

    @property
    def num_points(self) -> int:
        return len(self.max_size)

    def cap(self, m: int) -> int:
        return self.max_size[m - 1]

    @classmethod
    def binary_tree(cls, num_points: int) -> "SizeSchedule":
        """Doubling schedule: cap(m) is the smallest power of two strictly
        greater than num_points / m, capped at num_points.

        For 20 points this gives 20, 16, 8, 8, 8, 4, 4, 4, 4, 4, 2, ..., 2.
        """
        caps = []
        for m in range(1, num_points + 1):
            size = 1
            while size * m <= num_points:
                size *= 2
            caps.append(min(num_points, size))
        return cls(max_size=tuple(caps))

    @classmethod
    def unconstrained(cls, num_points: int) -> "SizeSchedule":
        return cls(max_size=tuple([num_points] * num_points))


def _sorted_groups(groups) -> tuple[frozenset, ...]:
    return tuple(sorted((frozenset(g) for g in groups), key=min))


@dataclass(frozen=True)
class ClusterHierarchy:
    """Full merge history from singletons down to a single cluster.

    ``merges[i]`` records the i-th merge as (id_a, id_b, new_id) where
    singletons carry ids 0..n-1 and merged clusters n, n+1, ... in merge
    order; ``heights[i]`` is the linkage value of that merge. ``levels[m]``
    is the partition with m groups, each group a frozenset of BS indices
    sorted by smallest member.
    """

    num_points: int
    merges: tuple[tuple[int, int, int], ...]
    heights: tuple[float, ...]
    levels: dict[int, tuple[frozenset, ...]]

    def partition(self, m: int) -> tuple[frozenset, ...]:
        if m not in self.levels:
            raise ValueError(f"no level with {m} clusters (1..{self.num_points})")
        return self.levels[m]

    def to_dendrogram_text(self) -> str:
        """Merge list with linkage heights, one line per merge."""
        lines = [f"points {self.num_points}"]
        for (ida, idb, new), h in zip(self.merges, self.heights):
            lines.append(f"merge {ida} {idb} -> {new} height {h!r}")
        return "\n".join(lines) + "\n"


def build_hierarchy(bs_positions, schedule: SizeSchedule) -> ClusterHierarchy:
    """Greedy size-constrained minimax-linkage agglomeration.

    At the step producing m clusters the merged pair minimizes the minimax
    linkage among all pairs whose combined size is within schedule.cap(m);
    ties go to the lexicographically smallest (min member, min member)
    pair. Linkages are recomputed from scratch at every step since minimax
    linkage admits no recurrence over merge history.
    """
    pos = np.asarray(bs_positions, dtype=float).reshape(-1, 2)
    n = pos.shape[0]
    if schedule.num_points != n:
        raise ValueError(f"schedule covers {schedule.num_points} points, got {n}")

    diff = pos[:, None, :] - pos[None, :, :]
    dmat = np.hypot(diff[..., 0], diff[..., 1])

    clusters: list[tuple[int, tuple[int, ...]]] = [(i, (i,)) for i in range(n)]
    levels = {n: _sorted_groups([members for _, members in clusters])}
    merges: list[tuple[int, int, int]] = []
    heights: list[float] = []
    next_id = n

    for m in range(n - 1, 0, -1):
        cap = schedule.cap(m)
        best = None
        for i in range(len(clusters)):
            id_i, mem_i = clusters[i]
            for j in range(i + 1, len(clusters)):
                id_j, mem_j = clusters[j]
                if len(mem_i) + len(mem_j) > cap:
                    continue
                union = np.array(mem_i + mem_j)
                sub = dmat[np.ix_(union, union)]
                linkage = float(sub.max(axis=1).min())
                lo, hi = min(mem_i[0], mem_j[0]), max(mem_i[0], mem_j[0])
                key = (linkage, lo, hi)
                if best is None or key < best[0]:
                    best = (key, i, j)
        if best is None:
            raise ScheduleInfeasibleError(
                f"no cluster pair fits max size {cap} at level m={m}"
            )
        _, i, j = best
        id_i, mem_i = clusters[i]
        id_j, mem_j = clusters[j]
        merged = tuple(sorted(mem_i + mem_j))
        # Drop j first; it sits after i.
        del clusters[j]
        del clusters[i]
        clusters.append((next_id, merged))
        merges.append((min(id_i, id_j), max(id_i, id_j), next_id))
        heights.append(best[0][0])
        next_id += 1
        levels[m] = _sorted_groups([members for _, members in clusters])

    return ClusterHierarchy(
        num_points=n, merges=tuple(merges), heights=tuple(heights), levels=levels
    )


@dataclass(frozen=True)
class VirtualCellPartition:
    """Simultaneous partition of BSs and users into virtual cells.

    Cell ids run 0..num_cells-1 in order of each cell's smallest BS index.
    ``serving_bs[u]`` is the BS whose channel magnitude won the affiliation
    rule for user u; the user belongs to the cell containing that BS.
    """

    num_cells: int
    bs_of_cell: tuple[frozenset, ...]
    users_of_cell: tuple[frozenset, ...]
    serving_bs: tuple[int, ...]

    def __post_init__(self):
        if len(self.bs_of_cell) != self.num_cells or len(self.users_of_cell) != self.num_cells:
            raise ValueError("cell lists must have num_cells entries")
        all_bs = [b for g in self.bs_of_cell for b in g]
        if len(all_bs) != len(set(all_bs)):
            raise ValueError("BS groups overlap")
        all_users = [u for g in self.users_of_cell for u in g]
        if len(all_users) != len(set(all_users)) or len(all_users) != len(self.serving_bs):
            raise ValueError("user groups must partition the user set")
        for u, b in enumerate(self.serving_bs):
            v = self.cell_of_bs(b)
            if u not in self.users_of_cell[v]:
                raise ValueError(f"user {u} not in the cell of its serving BS {b}")

    def cell_of_bs(self, b: int) -> int:
        for v, group in enumerate(self.bs_of_cell):
            if b in group:
                return v
        raise ValueError(f"BS {b} not in any cell")

    def bs_cell_index(self) -> np.ndarray:
        """cell id per BS index, as an array."""
        num_bs = sum(len(g) for g in self.bs_of_cell)
        out = np.empty(num_bs, dtype=np.int64)
        for v, group in enumerate(self.bs_of_cell):
            for b in group:
                out[b] = v
        return out

    def user_counts(self, num_bs: int) -> np.ndarray:
        """Number of users whose serving BS is b, for each BS."""
        counts = np.zeros(num_bs, dtype=np.int64)
        for b in self.serving_bs:
            counts[b] += 1
        return counts


def affiliate_users(real, hierarchy: ClusterHierarchy, m: int, rule: str = "max_abs") -> VirtualCellPartition:
    """Cut the hierarchy at m cells and attach users by best channel.

    ``max_abs`` scores BS b for user u by max over bands of |h[u, b, k]|;
    ``mean_power`` by the band-average of |h|^2 (sensitivity switch). Ties
    go to the smallest BS index.
    """
    if rule not in AFFILIATION_RULES:
        raise ValueError(f"rule must be one of {AFFILIATION_RULES}")
    if not 1 <= m <= hierarchy.num_points:
        raise ValueError(f"m={m} outside 1..{hierarchy.num_points}")

    groups = hierarchy.partition(m)
    if rule == "max_abs":
        score = np.abs(real.channel).max(axis=2)
    else:
        score = (np.abs(real.channel) ** 2).mean(axis=2)
    serving = score.argmax(axis=1) if real.num_users else np.zeros(0, dtype=np.int64)

    cell_of = {}
    for v, group in enumerate(groups):
        for b in group:
            cell_of[b] = v
    users = [set() for _ in range(m)]
    for u, b in enumerate(serving):
        users[cell_of[int(b)]].add(u)

    return VirtualCellPartition(
        num_cells=m,
        bs_of_cell=groups,
        users_of_cell=tuple(frozenset(s) for s in users),
        serving_bs=tuple(int(b) for b in serving),
    )
