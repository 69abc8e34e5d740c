"""The numba and numpy kernel backends must agree on every contract."""

import numpy as np
import pytest

from vcellsim._kernels import get_kernels

from conftest import random_cell_channels


numba_k = get_kernels("numba")
numpy_k = get_kernels("numpy")


def _random_solve_args(rng, num_users, num_bands, dim):
    ch = random_cell_channels(rng, num_users, num_bands, dim)
    allowed = rng.random((num_users, num_bands)) < 0.8
    budgets = rng.uniform(0.5, 2.0, size=num_users)
    return (
        np.ascontiguousarray(ch),
        1.0,
        budgets,
        np.ascontiguousarray(allowed),
        1e-6 * budgets.max() if num_users else 1e-6,
        500,
    )


def test_solve_cell_backends_agree():
    rng = np.random.default_rng(50)
    for _ in range(15):
        args = _random_solve_args(
            rng,
            int(rng.integers(0, 6)),
            int(rng.integers(1, 7)),
            int(rng.integers(1, 4)),
        )
        p1, c1, n1, o1 = numba_k.solve_cell_powers(*args)
        p2, c2, n2, o2 = numpy_k.solve_cell_powers(*args)
        assert c1 == c2 and n1 == n2
        assert p1 == pytest.approx(p2, abs=1e-9)
        assert o1 == pytest.approx(o2, rel=1e-9, abs=1e-9)


def test_effective_gains_backends_agree():
    rng = np.random.default_rng(51)
    ch = np.ascontiguousarray(random_cell_channels(rng, 4, 5, 3))
    p = rng.uniform(0, 1, size=(4, 5))
    allowed = np.ones((4, 5), dtype=bool)
    g1 = numba_k.effective_gains(ch, p, 0.7, allowed)
    g2 = numpy_k.effective_gains(ch, p, 0.7, allowed)
    assert g1 == pytest.approx(g2, rel=1e-9)


def test_sic_backends_agree():
    rng = np.random.default_rng(52)
    for _ in range(15):
        num_users = int(rng.integers(1, 6))
        num_bands = int(rng.integers(1, 6))
        dim = int(rng.integers(1, 4))
        ch = np.ascontiguousarray(random_cell_channels(rng, num_users, num_bands, dim))
        p = rng.uniform(0, 1, size=(num_users, num_bands))
        p[rng.random(size=p.shape) < 0.3] = 0.0
        out = random_cell_channels(rng, 2, num_bands, dim)
        base = np.stack([
            np.eye(dim, dtype=complex)
            + 0.4 * np.outer(out[0, k], out[0, k].conj())
            + 0.2 * np.outer(out[1, k], out[1, k].conj())
            for k in range(num_bands)
        ])
        r1, ord1 = numba_k.sic_cell_rates(ch, np.ascontiguousarray(p), base, 1.5)
        r2, ord2 = numpy_k.sic_cell_rates(ch, np.ascontiguousarray(p), base, 1.5)
        assert (ord1 == ord2).all()
        assert r1 == pytest.approx(r2, rel=1e-9, abs=1e-12)


def test_backend_selection_env(monkeypatch):
    import vcellsim._kernels as kmod

    assert kmod.get_kernels("numpy").NAME == "numpy"
    assert kmod.get_kernels("numba").NAME == "numba"
    with pytest.raises(ValueError):
        kmod._resolve("fortran")
