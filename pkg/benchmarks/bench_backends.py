#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Builds one synthetic virtual cell at a few sizes, runs the cyclic
water-filling solver and the SIC rate evaluation on both backends, checks
they agree, and prints the timing ratio.

Run: python benchmarks/bench_backends.py
"""

import time

import numpy as np

from vcellsim._kernels import get_kernels


def make_instance(rng, num_users, num_bands, dim):
    re = rng.standard_normal((num_users, num_bands, dim))
    im = rng.standard_normal((num_users, num_bands, dim))
    ch = np.ascontiguousarray((re + 1j * im) / np.sqrt(2.0))
    allowed = np.ascontiguousarray(rng.random((num_users, num_bands)) < 0.9)
    budgets = np.full(num_users, 1.0)
    p = rng.uniform(0, 0.2, size=(num_users, num_bands))
    base = np.stack([np.eye(dim, dtype=complex) for _ in range(num_bands)])
    out = (rng.standard_normal((num_bands, dim)) + 1j * rng.standard_normal((num_bands, dim)))
    for k in range(num_bands):
        base[k] += 0.3 * np.outer(out[k], out[k].conj())
    return ch, allowed, budgets, np.ascontiguousarray(p), np.ascontiguousarray(base)


def best_of(repeats, fn, *args):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    numba_k = get_kernels("numba")
    numpy_k = get_kernels("numpy")
    rng = np.random.default_rng(0)

    cases = [
        ("m=8 cell (25 users, 24 bands, 3 BSs)", 25, 24, 3),
        ("m=4 cell (50 users, 24 bands, 5 BSs)", 50, 24, 5),
        ("m=2 cell (100 users, 24 bands, 10 BSs)", 100, 24, 10),
    ]
    print(f"{'case':42s} {'kernel':10s} {'numba':>9s} {'numpy':>9s} {'speedup':>8s}")
    for label, num_users, num_bands, dim in cases:
        ch, allowed, budgets, p, base = make_instance(rng, num_users, num_bands, dim)
        solve_args = (ch, 1.0, budgets, allowed, 1e-6, 200)

        # warm the JIT before timing
        numba_k.solve_cell_powers(*solve_args)
        t_nb, res_nb = best_of(3, numba_k.solve_cell_powers, *solve_args)
        t_np, res_np = best_of(3, numpy_k.solve_cell_powers, *solve_args)
        assert np.allclose(res_nb[0], res_np[0], atol=1e-9)
        print(f"{label:42s} {'waterfill':10s} {t_nb:8.3f}s {t_np:8.3f}s {t_np / t_nb:7.1f}x")

        sic_args = (ch, p, base, 1.0)
        numba_k.sic_cell_rates(*sic_args)
        t_nb, res_nb = best_of(3, numba_k.sic_cell_rates, *sic_args)
        t_np, res_np = best_of(3, numpy_k.sic_cell_rates, *sic_args)
        assert (res_nb[1] == res_np[1]).all()
        assert np.allclose(res_nb[0], res_np[0], rtol=1e-9, atol=1e-12)
        print(f"{label:42s} {'sic':10s} {t_nb:8.3f}s {t_np:8.3f}s {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
