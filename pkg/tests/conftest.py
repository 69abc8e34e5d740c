import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vcellsim import ChannelParams, ScenarioConfig

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


DEFAULT_CHANNEL = dict(
    pathloss_intercept_los=61.4,
    pathloss_exponent_los=2.0,
    pathloss_intercept_nlos=72.0,
    pathloss_exponent_nlos=2.92,
    shadowing_sigma_los=5.8,
    shadowing_sigma_nlos=8.7,
    los_decay=0.0149,
)


def make_channel_params(**overrides) -> ChannelParams:
    kwargs = dict(DEFAULT_CHANNEL)
    kwargs.update(overrides)
    return ChannelParams(**kwargs)


def make_scenario(**overrides) -> ScenarioConfig:
    kwargs = dict(
        num_bs=6,
        num_users=20,
        side_length=300.0,
        num_bands=6,
        total_bandwidth=5e6,
        carrier_freq=28e9,
        noise_psd=-174.0,
        user_power_budget=23.0,
        channel_params=make_channel_params(),
        seed=7,
    )
    kwargs.update(overrides)
    return ScenarioConfig(**kwargs)


@pytest.fixture
def channel_params():
    return make_channel_params()


@pytest.fixture
def small_scenario():
    return make_scenario()


@pytest.fixture
def small_realization(small_scenario):
    from vcellsim import generate_realization

    return generate_realization(small_scenario, 0)


def random_cell_channels(rng, num_users, num_bands, dim):
    """Unit-scale complex channel stack (U, K, d) for synthetic problems."""
    re = rng.standard_normal((num_users, num_bands, dim))
    im = rng.standard_normal((num_users, num_bands, dim))
    return ((re + 1j * im) / np.sqrt(2.0)).astype(np.complex128)


def make_cell_problem(rng, num_users, num_bands, dim, budget=1.0, sigma2=1.0,
                      allowed=None, cell_id=0):
    """Synthetic CellPowerProblem with all BSs listening on all bands."""
    from vcellsim import CellPowerProblem

    ch = random_cell_channels(rng, num_users, num_bands, dim)
    if allowed is None:
        allowed = np.ones((num_users, num_bands), dtype=bool)
    return CellPowerProblem(
        cell_id=cell_id,
        users=tuple(range(num_users)),
        bs=tuple(range(dim)),
        channel=ch,
        listen_mask=np.ones((dim, num_bands), dtype=bool),
        allowed=allowed,
        noise_power=sigma2,
        budgets=np.full(num_users, float(budget)),
        band_width=1.0,
    )
