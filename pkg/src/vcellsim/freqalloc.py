"""Frequency-band allocation: contiguous ranges per non-interfering group,
proportional to served-user counts, plus per-user transmit band sets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class FrequencyPlan:
    """Receive bands per BS and transmit bands per user (0-based indices)."""

    num_bands: int
    gamma_d: float
    group_band_counts: tuple[int, ...]
    bands_of_bs: tuple[frozenset, ...]
    bands_of_user: tuple[frozenset, ...]

    def __post_init__(self):
        if sum(self.group_band_counts) != self.num_bands:
            raise ValueError("group band counts must sum to num_bands")

    def to_csv_text(self) -> str:
        lines = ["kind,id,bands"]
        for b, bands in enumerate(self.bands_of_bs):
            lines.append(f"bs,{b},{_format_band_set(bands)}")
        for u, bands in enumerate(self.bands_of_user):
            lines.append(f"user,{u},{_format_band_set(bands)}")
        return "\n".join(lines) + "\n"


def _format_band_set(bands) -> str:
    return ";".join(str(k) for k in sorted(bands))


def allocate_group_bands(user_counts_per_group, num_bands: int, literal_denominator: bool = False):
    """Split num_bands across groups proportionally to their user counts.

    Ideal shares are num_bands * n_g / sum(n); when they are not all
    integral each share is rounded up and the surplus is taken back one
    band at a time, walking the groups in descending order of their
    round-up remainder (ties to the smaller group index) and skipping any
    group already down to one band. The walk repeats until the surplus is
    gone, so every group with users keeps at least one band.

    ``literal_denominator=True`` replaces each share's denominator by the
    user count of all *other* groups (a formulation kept for comparison
    only); it is undefined when any group holds every user.

    All-zero counts degenerate to every band in group 0.
    """
    counts = [int(c) for c in user_counts_per_group]
    if any(c < 0 for c in counts):
        raise ValueError("user counts must be >= 0")
    num_groups = len(counts)
    if num_groups < 1:
        raise ValueError("need at least one group")
    total = sum(counts)
    if total == 0:
        return tuple([num_bands] + [0] * (num_groups - 1))
    nonzero = sum(1 for c in counts if c > 0)
    if num_bands < nonzero:
        raise ValueError(
            f"{num_bands} bands cannot cover {nonzero} groups with users"
        )

    if literal_denominator:
        denoms = [total - c for c in counts]
        if any(d == 0 and c > 0 for c, d in zip(counts, denoms)):
            raise ValueError("literal denominator undefined: a group holds all users")
        shares = [
            Fraction(num_bands * c, d) if c > 0 else Fraction(0)
            for c, d in zip(counts, denoms)
        ]
    else:
        shares = [Fraction(num_bands * c, total) for c in counts]

    if all(s.denominator == 1 for s in shares):
        return tuple(int(s) for s in shares)

    ceilings = [-(-s.numerator // s.denominator) for s in shares]
    surplus = sum(ceilings) - num_bands
    remainders = [Fraction(c) - s for c, s in zip(ceilings, shares)]
    order = sorted(range(num_groups), key=lambda g: (-remainders[g], g))

    alloc = list(ceilings)
    while surplus > 0:
        took = False
        for g in order:
            if surplus == 0:
                break
            if alloc[g] > 1:
                alloc[g] -= 1
                surplus -= 1
                took = True
        if not took:
            # Unreachable when num_bands >= number of non-empty groups.
            raise ValueError("cannot absorb rounding surplus without starving a group")
    return tuple(alloc)


def assign_bs_bands(coloring, group_band_counts):
    """Give color group g the contiguous band range after groups 0..g-1;
    every BS inherits its group's range."""
    counts = list(group_band_counts)
    if len(counts) != coloring.num_colors:
        raise ValueError("one band count per color group required")
    ranges = []
    start = 0
    for f in counts:
        ranges.append(frozenset(range(start, start + f)))
        start += f
    return tuple(ranges[coloring.color_of[b]] for b in range(len(coloring.color_of)))


def assign_user_bands(real, partition, bands_of_bs, gamma_d: float):
    """Forbid each user the receive bands of foreign-cell BSs that are
    within gamma_d of both the user and its serving BS.

    A user with no such foreign BS keeps every band.
    """
    num_bands = real.num_bands
    all_bands = frozenset(range(num_bands))
    cell_of = partition.bs_cell_index()
    bs_pos = real.bs_positions
    diff = bs_pos[:, None, :] - bs_pos[None, :, :]
    bs_dist = np.hypot(diff[..., 0], diff[..., 1])
    du = real.user_positions[:, None, :] - bs_pos[None, :, :]
    user_dist = np.hypot(du[..., 0], du[..., 1])

    out = []
    for u, b in enumerate(partition.serving_bs):
        blocked = set()
        for other in range(bs_pos.shape[0]):
            if cell_of[other] == cell_of[b]:
                continue
            if bs_dist[b, other] < gamma_d and user_dist[u, other] < gamma_d:
                blocked |= bands_of_bs[other]
        out.append(all_bands - blocked if blocked else all_bands)
    return tuple(out)


def build_frequency_plan(real, partition, coloring, user_counts, gamma_d: float,
                         literal_denominator: bool = False) -> FrequencyPlan:
    """Run the group/BS/user allocation stages in order for one graph coloring."""
    counts = np.asarray(user_counts)
    group_counts = [int(counts[list(g)].sum()) if g else 0 for g in coloring.groups]
    f = allocate_group_bands(group_counts, real.num_bands, literal_denominator)
    bands_of_bs = assign_bs_bands(coloring, f)
    bands_of_user = assign_user_bands(real, partition, bands_of_bs, gamma_d)
    return FrequencyPlan(
        num_bands=real.num_bands,
        gamma_d=float(gamma_d),
        group_band_counts=tuple(f),
        bands_of_bs=bands_of_bs,
        bands_of_user=bands_of_user,
    )
