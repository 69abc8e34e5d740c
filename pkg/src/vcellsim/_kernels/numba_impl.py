"""Numba backend for the two hot kernels: cyclic water-filling inside one
virtual cell and per-band SIC rate evaluation.

Matrices here are small (dimension = BSs per cell, <= a few tens), so the
Cholesky factor/solve/log-det steps are hand-rolled; that keeps every call
allocation-free inside the user loop and avoids per-call LAPACK dispatch.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

LN2 = 0.6931471805599453
WATER_TOL = 1e-12
WATER_MAX_STEPS = 200


@njit(cache=True)
def _chol_factor(a, lower):
    """In-place lower Cholesky of a Hermitian PD matrix read from ``a``.

    Returns the log-determinant of ``a``; raises on a non-positive pivot.
    """
    n = a.shape[0]
    logdet = 0.0
    for j in range(n):
        s = a[j, j].real
        for k in range(j):
            v = lower[j, k]
            s -= v.real * v.real + v.imag * v.imag
        if s <= 0.0:
            raise ValueError("matrix not positive definite in Cholesky")
        d = np.sqrt(s)
        logdet += np.log(s)
        lower[j, j] = d
        for i in range(j + 1, n):
            t = a[i, j]
            for k in range(j):
                t -= lower[i, k] * np.conj(lower[j, k])
            lower[i, j] = t / d
    return logdet


@njit(cache=True)
def _quadform_inv(lower, h, work):
    """h^H A^{-1} h given the lower Cholesky factor of A (forward solve)."""
    n = lower.shape[0]
    acc = 0.0
    for i in range(n):
        t = h[i]
        for k in range(i):
            t -= lower[i, k] * work[k]
        y = t / lower[i, i]
        work[i] = y
        acc += y.real * y.real + y.imag * y.imag
    return acc


@njit(cache=True)
def _waterfill(gains, allowed, budget, out):
    """p_k = max(0, level - 1/g_k) on allowed positive-gain bands, with the
    water level bisected until the powers sum to the budget.

    The leftover bisection residual (at most bands * level tolerance) is
    folded into the strongest band so the budget binds exactly; without
    that, successive best responses of one user wobble by ~1e-12 in total
    power and the cell objective loses strict monotonicity.
    """
    num_bands = gains.shape[0]
    for k in range(num_bands):
        out[k] = 0.0
    if budget <= 0.0:
        return
    lo = np.inf
    best = -1
    for k in range(num_bands):
        if allowed[k] and gains[k] > 0.0:
            inv = 1.0 / gains[k]
            if inv < lo:
                lo = inv
                best = k
    if best < 0:
        return
    hi = lo + budget
    for _ in range(WATER_MAX_STEPS):
        if hi - lo <= WATER_TOL:
            break
        mid = 0.5 * (lo + hi)
        s = 0.0
        for k in range(num_bands):
            if allowed[k] and gains[k] > 0.0:
                p = mid - 1.0 / gains[k]
                if p > 0.0:
                    s += p
        if s > budget:
            hi = mid
        else:
            lo = mid
    level = 0.5 * (lo + hi)
    s = 0.0
    for k in range(num_bands):
        if allowed[k] and gains[k] > 0.0:
            p = level - 1.0 / gains[k]
            if p > 0.0:
                out[k] = p
                s += p
    residual = budget - s
    adjusted = out[best] + residual
    out[best] = adjusted if adjusted > 0.0 else 0.0


@njit(cache=True)
def _band_covariances(ch, p, sigma2, cov):
    """cov[k] = sigma2*I + sum_u p[u,k] h_{u,k} h_{u,k}^H."""
    num_users, num_bands, dim = ch.shape
    for k in range(num_bands):
        for i in range(dim):
            for j in range(dim):
                cov[k, i, j] = 0.0
            cov[k, i, i] = sigma2
        for u in range(num_users):
            w = p[u, k]
            if w > 0.0:
                for i in range(dim):
                    hi = w * ch[u, k, i]
                    for j in range(dim):
                        cov[k, i, j] += hi * np.conj(ch[u, k, j])
    return cov


@njit(cache=True)
def _objective_bits(ch, p, sigma2, cov, lower):
    """sum_k log2 |I + sum_u p h h^H / sigma2| from freshly built
    covariances, so the reported trace is a function of the powers alone."""
    num_bands, dim = ch.shape[1], ch.shape[2]
    _band_covariances(ch, p, sigma2, cov)
    total = 0.0
    for k in range(num_bands):
        ld = _chol_factor(cov[k], lower)
        total += ld - dim * np.log(sigma2)
    return total / LN2


@njit(cache=True)
def solve_cell_powers(ch, sigma2, budgets, allowed, tol_abs, max_iters):
    """Cyclic per-user water-filling best response for one virtual cell.

    ch: (U, K, d) complex128, listening-masked channel vectors.
    Returns (powers (U, K), converged, cycles, objective_per_cycle) where
    the objective is the per-cell sum capacity in bits/s/Hz units (no band
    width factor) evaluated at each cycle's end.
    """
    num_users, num_bands, dim = ch.shape
    p = np.zeros((num_users, num_bands))
    objectives = np.empty(max_iters)
    cov = np.empty((num_bands, dim, dim), dtype=np.complex128)
    sub = np.empty((dim, dim), dtype=np.complex128)
    lower = np.empty((dim, dim), dtype=np.complex128)
    work = np.empty(dim, dtype=np.complex128)
    gains = np.empty(num_bands)
    pnew = np.empty(num_bands)

    if num_users == 0:
        return p, True, 0, objectives[:0]

    converged = False
    cycles = 0
    _band_covariances(ch, p, sigma2, cov)
    for _ in range(max_iters):
        max_delta = 0.0
        for u in range(num_users):
            for k in range(num_bands):
                gains[k] = 0.0
                if not allowed[u, k]:
                    continue
                pu = p[u, k]
                for i in range(dim):
                    for j in range(dim):
                        sub[i, j] = cov[k, i, j]
                if pu > 0.0:
                    for i in range(dim):
                        hi = pu * ch[u, k, i]
                        for j in range(dim):
                            sub[i, j] -= hi * np.conj(ch[u, k, j])
                _chol_factor(sub, lower)
                gains[k] = _quadform_inv(lower, ch[u, k], work)
            _waterfill(gains, allowed[u], budgets[u], pnew)
            for k in range(num_bands):
                delta = pnew[k] - p[u, k]
                if delta != 0.0:
                    ad = abs(delta)
                    if ad > max_delta:
                        max_delta = ad
                    for i in range(dim):
                        hi = delta * ch[u, k, i]
                        for j in range(dim):
                            cov[k, i, j] += hi * np.conj(ch[u, k, j])
                    p[u, k] = pnew[k]
        # Rebuilds cov from the cycle-end powers, which also resets any
        # rank-1 update drift before the next cycle.
        objectives[cycles] = _objective_bits(ch, p, sigma2, cov, lower)
        cycles += 1
        if max_delta < tol_abs:
            converged = True
            break
    return p, converged, cycles, objectives[:cycles]


@njit(cache=True)
def effective_gains(ch, p, sigma2, allowed):
    """h^H Sigma^{-1} h per (user, band) at the given powers, where Sigma
    excludes the user's own rank-1 term; zero outside allowed bands."""
    num_users, num_bands, dim = ch.shape
    cov = np.empty((num_bands, dim, dim), dtype=np.complex128)
    _band_covariances(ch, p, sigma2, cov)
    sub = np.empty((dim, dim), dtype=np.complex128)
    lower = np.empty((dim, dim), dtype=np.complex128)
    work = np.empty(dim, dtype=np.complex128)
    out = np.zeros((num_users, num_bands))
    for u in range(num_users):
        for k in range(num_bands):
            if not allowed[u, k]:
                continue
            pu = p[u, k]
            for i in range(dim):
                for j in range(dim):
                    sub[i, j] = cov[k, i, j]
            if pu > 0.0:
                for i in range(dim):
                    hi = pu * ch[u, k, i]
                    for j in range(dim):
                        sub[i, j] -= hi * np.conj(ch[u, k, j])
            _chol_factor(sub, lower)
            out[u, k] = _quadform_inv(lower, ch[u, k], work)
    return out


@njit(cache=True)
def _decode_order(transmitting, keys, order):
    """Descending key order, transmitting users first, index breaking ties.

    Insertion sort; U is small and the order must be reproducible exactly.
    """
    n = keys.shape[0]
    for i in range(n):
        order[i] = i
    for i in range(1, n):
        cur = order[i]
        j = i - 1
        while j >= 0:
            prev = order[j]
            before = False
            if transmitting[cur] and not transmitting[prev]:
                before = True
            elif transmitting[cur] == transmitting[prev]:
                if keys[cur] > keys[prev]:
                    before = True
                elif keys[cur] == keys[prev] and cur < prev:
                    before = True
            if not before:
                break
            order[j + 1] = prev
            j -= 1
        order[j + 1] = cur


@njit(cache=True)
def sic_cell_rates(ch, p, base_cov, band_width):
    """Per-band SIC rates under the greedy min-rate decoding order.

    ch: (U, K, d) complex128 full (unmasked) channel vectors to the cell's
    BSs; base_cov[k] = sigma2*I + out-of-cell interference on band k. Band
    0 orders users by their single-band rate against all other users; each
    later band adds the rates accumulated so far to that key. Non
    transmitting users rank last and get rate 0.

    Returns (rates (U, K) in bits/s, orders (K, U) of local user indices in
    decode sequence).
    """
    num_users, num_bands, dim = ch.shape
    rates = np.zeros((num_users, num_bands))
    orders = np.empty((num_bands, num_users), dtype=np.int64)
    total = np.empty((dim, dim), dtype=np.complex128)
    scratch = np.empty((dim, dim), dtype=np.complex128)
    lower = np.empty((dim, dim), dtype=np.complex128)
    keys = np.empty(num_users)
    cumulative = np.zeros(num_users)
    transmitting = np.empty(num_users, dtype=np.bool_)

    for k in range(num_bands):
        for i in range(dim):
            for j in range(dim):
                total[i, j] = base_cov[k, i, j]
        for u in range(num_users):
            w = p[u, k]
            if w > 0.0:
                for i in range(dim):
                    hi = w * ch[u, k, i]
                    for j in range(dim):
                        total[i, j] += hi * np.conj(ch[u, k, j])
        logdet_total = _chol_factor(total, lower)

        # Ordering keys: rate of each user when everyone else interferes.
        for u in range(num_users):
            w = p[u, k]
            transmitting[u] = w > 0.0
            if w > 0.0:
                for i in range(dim):
                    hi = w * ch[u, k, i]
                    for j in range(dim):
                        scratch[i, j] = total[i, j] - hi * np.conj(ch[u, k, j])
                ld = _chol_factor(scratch, scratch)
                keys[u] = cumulative[u] + band_width * (logdet_total - ld) / LN2
            else:
                keys[u] = cumulative[u]

        _decode_order(transmitting, keys, orders[k])

        logdet_cur = logdet_total
        for pos in range(num_users):
            u = orders[k, pos]
            w = p[u, k]
            if w > 0.0:
                for i in range(dim):
                    hi = w * ch[u, k, i]
                    for j in range(dim):
                        total[i, j] -= hi * np.conj(ch[u, k, j])
                logdet_new = _chol_factor(total, lower)
                rates[u, k] = band_width * (logdet_cur - logdet_new) / LN2
                logdet_cur = logdet_new
        for u in range(num_users):
            cumulative[u] += rates[u, k]
    return rates, orders
