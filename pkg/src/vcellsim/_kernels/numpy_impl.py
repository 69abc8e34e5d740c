"""Pure-numpy backend: same kernel contracts as the numba backend, with the
per-band small-matrix work batched through numpy's stacked linalg calls."""

from __future__ import annotations

import numpy as np

NAME = "numpy"

LN2 = 0.6931471805599453
WATER_TOL = 1e-12
WATER_MAX_STEPS = 200


def _rank1(w, h):
    """w * h h^H for stacked vectors; w broadcasts over the stack."""
    return w[..., None, None] * (h[..., :, None] * h[..., None, :].conj())


def _band_covariances(ch, p, sigma2):
    num_users, num_bands, dim = ch.shape
    cov = np.einsum("uk,uki,ukj->kij", p, ch, ch.conj())
    cov[:, np.arange(dim), np.arange(dim)] += sigma2
    return cov


def _waterfill(gains, allowed, budget):
    # Residual folded into the strongest band, as in the numba twin, so the
    # budget binds exactly at every best response.
    out = np.zeros_like(gains)
    if budget <= 0.0:
        return out
    active = allowed & (gains > 0.0)
    if not active.any():
        return out
    inv = 1.0 / gains[active]
    lo = inv.min()
    hi = lo + budget
    for _ in range(WATER_MAX_STEPS):
        if hi - lo <= WATER_TOL:
            break
        mid = 0.5 * (lo + hi)
        if np.maximum(mid - inv, 0.0).sum() > budget:
            hi = mid
        else:
            lo = mid
    level = 0.5 * (lo + hi)
    out[active] = np.maximum(level - inv, 0.0)
    best = np.flatnonzero(active)[int(np.argmin(inv))]
    out[best] = max(0.0, out[best] + (budget - out[active].sum()))
    return out


def solve_cell_powers(ch, sigma2, budgets, allowed, tol_abs, max_iters):
    """Cyclic per-user water-filling best response; see the numba twin."""
    num_users, num_bands, dim = ch.shape
    p = np.zeros((num_users, num_bands))
    objectives = []
    if num_users == 0:
        return p, True, 0, np.zeros(0)

    converged = False
    cycles = 0
    cov = _band_covariances(ch, p, sigma2)
    for _ in range(max_iters):
        max_delta = 0.0
        for u in range(num_users):
            act = allowed[u]
            gains = np.zeros(num_bands)
            if act.any():
                sub = cov[act] - _rank1(p[u, act], ch[u, act])
                x = np.linalg.solve(sub, ch[u, act][..., None])[..., 0]
                gains[act] = np.einsum("ki,ki->k", ch[u, act].conj(), x).real
            pnew = _waterfill(gains, act, budgets[u])
            delta = pnew - p[u]
            changed = delta != 0.0
            if changed.any():
                max_delta = max(max_delta, np.abs(delta).max())
                cov[changed] += _rank1(delta[changed], ch[u, changed])
                p[u] = pnew
        # Fresh rebuild: the trace is a function of the powers alone, and
        # rank-1 update drift resets before the next cycle.
        cov = _band_covariances(ch, p, sigma2)
        sign, logdet = np.linalg.slogdet(cov)
        objectives.append((logdet.sum() - num_bands * dim * np.log(sigma2)) / LN2)
        cycles += 1
        if max_delta < tol_abs:
            converged = True
            break
    return p, converged, cycles, np.asarray(objectives)


def effective_gains(ch, p, sigma2, allowed):
    """h^H Sigma^{-1} h per (user, band) with the user's own term removed."""
    num_users, num_bands, dim = ch.shape
    cov = _band_covariances(ch, p, sigma2)
    out = np.zeros((num_users, num_bands))
    for u in range(num_users):
        act = allowed[u]
        if not act.any():
            continue
        sub = cov[act] - _rank1(p[u, act], ch[u, act])
        x = np.linalg.solve(sub, ch[u, act][..., None])[..., 0]
        out[u, act] = np.einsum("ki,ki->k", ch[u, act].conj(), x).real
    return out


def _logdet(a):
    return np.linalg.slogdet(a)[1]


def sic_cell_rates(ch, p, base_cov, band_width):
    """Per-band SIC rates under the greedy decoding order; see numba twin."""
    num_users, num_bands, dim = ch.shape
    rates = np.zeros((num_users, num_bands))
    orders = np.empty((num_bands, num_users), dtype=np.int64)
    cumulative = np.zeros(num_users)

    for k in range(num_bands):
        hk = ch[:, k, :]
        pk = p[:, k]
        rank1 = _rank1(pk, hk)
        total = base_cov[k] + rank1.sum(axis=0)
        logdet_total = _logdet(total)

        transmitting = pk > 0.0
        keys = cumulative.copy()
        if transmitting.any():
            lds = _logdet(total[None, :, :] - rank1[transmitting])
            keys[transmitting] += band_width * (logdet_total - lds) / LN2

        # Transmitting users first, then descending key, then user index.
        order = np.lexsort((np.arange(num_users), -keys, ~transmitting))
        orders[k] = order

        logdet_cur = logdet_total
        current = total
        for u in order:
            if pk[u] > 0.0:
                current = current - rank1[u]
                logdet_new = _logdet(current)
                rates[u, k] = band_width * (logdet_cur - logdet_new) / LN2
                logdet_cur = logdet_new
        cumulative += rates[:, k]
    return rates, orders
