"""Per-virtual-cell power allocation by cyclic iterative water-filling.

Each user in turn water-fills against the noise-plus-in-cell-interference
covariance left by the others, restricted to the frequency plan; cycling
repeats until the largest per-user power change over a full cycle drops
below a budget-relative tolerance. Every single-user step solves a convex
subproblem exactly, so the cell sum-capacity objective never decreases
across cycles.

Channel vectors are restricted to the cell's listening BSs per band. The
kernels realize that restriction by zeroing the non-listening entries of
fixed-width vectors, which leaves both the quadratic forms and the log
determinants untouched (zeroed rows decouple into identity blocks).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import get_kernels

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 500


@dataclass(frozen=True)
class CellPowerProblem:
    """Inputs of one cell's sum-capacity power allocation.

    ``channel[u, k, :]`` holds user u's coefficients to the cell's BSs on
    band k with non-listening BSs zeroed; ``listen_mask[j, k]`` says
    whether the cell's j-th BS receives band k. ``allowed[u, k]`` marks the
    user's permitted transmit bands. ``noise_power`` is the per-band white
    noise power at every BS (linear scale).
    """

    cell_id: int
    users: tuple[int, ...]
    bs: tuple[int, ...]
    channel: np.ndarray
    listen_mask: np.ndarray
    allowed: np.ndarray
    noise_power: float
    budgets: np.ndarray
    band_width: float

    def __post_init__(self):
        if self.noise_power <= 0:
            raise ValueError("noise_power must be > 0 (noise covariance must be PD)")
        num_users, num_bands, dim = self.channel.shape
        if num_users != len(self.users) or dim != len(self.bs):
            raise ValueError("channel tensor shape inconsistent with users/bs lists")
        if self.listen_mask.shape != (dim, num_bands):
            raise ValueError("listen_mask must be (num_bs_in_cell, num_bands)")
        if self.allowed.shape != (num_users, num_bands):
            raise ValueError("allowed must be (num_users_in_cell, num_bands)")
        if self.budgets.shape != (num_users,):
            raise ValueError("one budget per cell user required")

    @property
    def num_bands(self) -> int:
        return self.channel.shape[1]

    def restricted_channel(self, u_local: int, band: int) -> np.ndarray:
        """Channel vector of a cell user on one band, reduced to the BSs
        actually listening there (dimension varies by band)."""
        return self.channel[u_local, band][self.listen_mask[:, band]]


@dataclass(frozen=True)
class CellSolveResult:
    """Outcome of solve_cell: powers indexed like problem.users."""

    cell_id: int
    users: tuple[int, ...]
    powers: np.ndarray
    converged: bool
    cycles: int
    objective: float
    objective_per_cycle: tuple[float, ...]


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit powers for every user and band in the system (linear scale)."""

    p: np.ndarray
    cell_results: tuple[CellSolveResult, ...] = ()

    def __post_init__(self):
        if (self.p < 0).any():
            raise ValueError("powers must be non-negative")

    def to_csv_text(self) -> str:
        """Debug dump: one row per user, one column per band."""
        num_bands = self.p.shape[1]
        lines = ["user," + ",".join(f"p_band{k}" for k in range(num_bands))]
        for u, row in enumerate(self.p):
            lines.append(f"{u}," + ",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def build_cell_problem(real, partition, plan, cell_id: int,
                       user_budget: float, band_width: float) -> CellPowerProblem:
    """Assemble one cell's allocation inputs from a realization, a virtual
    cell partition and a frequency plan.

    ``user_budget`` (linear scale, identical for all users) and
    ``band_width`` (Hz) come from the scenario configuration.
    """
    bs = tuple(sorted(partition.bs_of_cell[cell_id]))
    users = tuple(sorted(partition.users_of_cell[cell_id]))
    num_bands = real.num_bands

    listen_mask = np.zeros((len(bs), num_bands), dtype=bool)
    for j, b in enumerate(bs):
        listen_mask[j, list(plan.bands_of_bs[b])] = True

    # (U, K, d) layout keeps each per-band vector contiguous for the kernels.
    channel = np.transpose(real.channel[np.ix_(users, bs)], (0, 2, 1)).copy()
    channel[:, ~listen_mask.T] = 0.0

    allowed = np.zeros((len(users), num_bands), dtype=bool)
    for i, u in enumerate(users):
        allowed[i, list(plan.bands_of_user[u])] = True

    return CellPowerProblem(
        cell_id=cell_id,
        users=users,
        bs=bs,
        channel=np.ascontiguousarray(channel),
        listen_mask=listen_mask,
        allowed=allowed,
        noise_power=real.noise_power_per_band,
        budgets=np.full(len(users), float(user_budget)),
        band_width=float(band_width),
    )


def waterfill_single_user(effective_gains, budget: float, allowed=None, band_width: float = 1.0):
    """Classic water-filling over parallel channels.

    Returns p_k = max(0, level - 1/g_k) on the allowed bands with positive
    gain, the water level bisected (1e-12 absolute) so the powers sum to
    the budget; all-zero gains give all-zero powers. ``band_width`` fixes
    the scale of the dual variable only; the powers do not depend on it.
    """
    gains = np.asarray(effective_gains, dtype=float)
    if (gains < 0).any():
        raise ValueError("effective gains must be >= 0")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if allowed is None:
        allowed = np.ones(gains.shape, dtype=bool)
    else:
        allowed = _as_band_mask(allowed, gains.shape[0])
    from ._kernels import numpy_impl

    return numpy_impl._waterfill(gains, allowed, float(budget))


def solve_cell(problem: CellPowerProblem, tol: float = DEFAULT_TOL,
               max_iters: int = DEFAULT_MAX_ITERS) -> CellSolveResult:
    """Run the cyclic water-filling best response to convergence.

    ``tol`` is relative to the budget: the loop stops once no user's power
    moved by more than tol * max(budgets) over a full cycle. A cell that
    hits ``max_iters`` first is returned with converged=False.
    """
    kern = get_kernels()
    budgets = np.asarray(problem.budgets, dtype=float)
    tol_abs = tol * (budgets.max() if budgets.size else 1.0)
    p, converged, cycles, objectives = kern.solve_cell_powers(
        np.ascontiguousarray(problem.channel, dtype=np.complex128),
        float(problem.noise_power),
        budgets,
        np.ascontiguousarray(problem.allowed),
        tol_abs,
        int(max_iters),
    )
    objective = problem.band_width * (objectives[-1] if len(objectives) else 0.0)
    return CellSolveResult(
        cell_id=problem.cell_id,
        users=problem.users,
        powers=p,
        converged=bool(converged),
        cycles=int(cycles),
        objective=float(objective),
        objective_per_cycle=tuple(problem.band_width * o for o in objectives),
    )


def cell_objective(problem: CellPowerProblem, powers) -> float:
    """Cell sum capacity (bits/s) at the given powers, ignoring interference
    from outside the cell.

    Per band this is W * log2 |I + sum_u p_uk h h^H / sigma2|, evaluated at
    the listening-BS dimension (the rank of h h^H never exceeds it).
    """
    p = np.asarray(powers, dtype=float)
    ch = problem.channel
    num_users, num_bands, dim = ch.shape
    if p.shape != (num_users, num_bands):
        raise ValueError("powers must be (num_users_in_cell, num_bands)")
    m = np.einsum("uk,uki,ukj->kij", p / problem.noise_power, ch, ch.conj())
    m[:, np.arange(dim), np.arange(dim)] += 1.0
    sign, logdet = np.linalg.slogdet(m)
    return float(problem.band_width * logdet.sum() / np.log(2.0))


def effective_gains(problem: CellPowerProblem, powers) -> np.ndarray:
    """h^H Sigma^{-1} h per (cell user, band) at the given powers, with the
    user's own contribution removed from Sigma; zero off allowed bands."""
    kern = get_kernels()
    return kern.effective_gains(
        np.ascontiguousarray(problem.channel, dtype=np.complex128),
        np.ascontiguousarray(np.asarray(powers, dtype=float)),
        float(problem.noise_power),
        np.ascontiguousarray(problem.allowed),
    )


def solve_all_cells(real, partition, plan, user_budget: float, band_width: float,
                    tol: float = DEFAULT_TOL,
                    max_iters: int = DEFAULT_MAX_ITERS) -> PowerAllocation:
    """Solve every cell independently and merge into one global matrix."""
    p = np.zeros((real.num_users, real.num_bands))
    results = []
    for cell_id in range(partition.num_cells):
        problem = build_cell_problem(real, partition, plan, cell_id, user_budget, band_width)
        res = solve_cell(problem, tol=tol, max_iters=max_iters)
        for i, u in enumerate(res.users):
            p[u] = res.powers[i]
        results.append(res)
    return PowerAllocation(p=p, cell_results=tuple(results))


def _as_band_mask(allowed, num_bands: int) -> np.ndarray:
    allowed = np.asarray(allowed)
    if allowed.dtype == bool:
        return allowed
    mask = np.zeros(num_bands, dtype=bool)
    mask[list(allowed)] = True
    return mask
