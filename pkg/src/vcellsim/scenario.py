"""Random uplink network realizations: geometry, path loss, fading, noise.

All dBm quantities are converted to a common linear power scale with
``10**(dBm/10)`` (milliwatts); rates depend only on power ratios, so the
scale cancels everywhere downstream.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

# Clamp applied inside path-loss evaluation only, so co-located nodes do not
# hit log10(0).
MIN_PATHLOSS_DISTANCE_M = 1.0

SMALL_SCALE_MODES = ("rayleigh", "none")


def dbm_to_mw(value_dbm: float) -> float:
    """Convert dBm to linear power (milliwatts)."""
    return 10.0 ** (value_dbm / 10.0)


def distance(p, q) -> float:
    """Euclidean distance between two 2-D points."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.hypot(p[0] - q[0], p[1] - q[1]))


@dataclass(frozen=True)
class ChannelParams:
    """Parameters of the LOS/NLOS log-distance channel model.

    Path loss in dB at link distance d is
    ``intercept + 10 * exponent * log10(max(d, 1 m))`` plus a zero-mean
    Gaussian shadowing term whose sigma depends on the LOS state; the LOS
    state itself is Bernoulli with probability ``exp(-los_decay * d)``.
    Shadowing and LOS state are drawn once per (user, BS) link and shared
    across bands; small-scale fading, when enabled, is complex Gaussian
    with unit mean power drawn independently per band.

    There are no default values for the model fits; they are configuration
    data (see ``configs/`` for values matching published 28 GHz fits).
    """

    pathloss_intercept_los: float
    pathloss_exponent_los: float
    pathloss_intercept_nlos: float
    pathloss_exponent_nlos: float
    shadowing_sigma_los: float
    shadowing_sigma_nlos: float
    los_decay: float
    small_scale: str = "rayleigh"

    def __post_init__(self):
        if self.shadowing_sigma_los < 0 or self.shadowing_sigma_nlos < 0:
            raise ValueError("shadowing sigmas must be >= 0")
        if self.los_decay < 0:
            raise ValueError("los_decay must be >= 0")
        if self.pathloss_exponent_los <= 0 or self.pathloss_exponent_nlos <= 0:
            raise ValueError("path-loss exponents must be > 0")
        if self.small_scale not in SMALL_SCALE_MODES:
            raise ValueError(f"small_scale must be one of {SMALL_SCALE_MODES}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Static description of one simulated network.

    ``noise_psd`` is in dBm/Hz and ``user_power_budget`` in dBm (identical
    for every user). ``seed`` plus a realization index fully determine a
    realization.
    """

    num_bs: int
    num_users: int
    side_length: float
    num_bands: int
    total_bandwidth: float
    carrier_freq: float
    noise_psd: float
    user_power_budget: float
    channel_params: ChannelParams
    seed: int = 0

    def __post_init__(self):
        if self.num_bs < 1:
            raise ValueError("num_bs must be >= 1")
        if self.num_users < 0:
            raise ValueError("num_users must be >= 0")
        if self.num_bands < 1:
            raise ValueError("num_bands must be >= 1")
        if self.side_length <= 0:
            raise ValueError("side_length must be > 0")
        if self.total_bandwidth <= 0:
            raise ValueError("total_bandwidth must be > 0")
        if self.band_width <= 0:
            raise ValueError("per-band width must be > 0")

    @property
    def band_width(self) -> float:
        """Width of one frequency band in Hz."""
        return self.total_bandwidth / self.num_bands

    @property
    def noise_power_per_band(self) -> float:
        """White-noise power per band, linear scale."""
        return dbm_to_mw(self.noise_psd) * self.band_width

    @property
    def budget_linear(self) -> float:
        """Per-user transmit power budget, linear scale."""
        return dbm_to_mw(self.user_power_budget)


@dataclass(frozen=True)
class NetworkRealization:
    """One Monte Carlo draw of the network.

    ``channel[u, b, k]`` is the complex amplitude coefficient from user u to
    BS b on band k. Arrays are marked read-only; a realization is safe to
    share across workers.
    """

    bs_positions: np.ndarray
    user_positions: np.ndarray
    channel: np.ndarray
    noise_power_per_band: float

    def __post_init__(self):
        expected = (self.num_users, self.num_bs, self.num_bands)
        if self.channel.shape != expected:
            raise ValueError(f"channel tensor shape {self.channel.shape} != {expected}")

    @property
    def num_bs(self) -> int:
        return self.bs_positions.shape[0]

    @property
    def num_users(self) -> int:
        return self.user_positions.shape[0]

    @property
    def num_bands(self) -> int:
        return self.channel.shape[2]


def _link_distances(user_positions, bs_positions):
    diff = user_positions[:, None, :] - bs_positions[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _realization_rng(seed: int, realization_index: int) -> np.random.Generator:
    # Independent, platform-stable stream per (seed, index).
    if realization_index < 0:
        raise ValueError("realization_index must be >= 0")
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, int(realization_index)])


def generate_realization(config: ScenarioConfig, realization_index: int = 0) -> NetworkRealization:
    """Draw BS/user positions and the channel tensor for one realization.

    Deterministic given (config.seed, realization_index): repeated calls
    return bit-identical tensors. Positions are i.i.d. uniform on the
    square; per-link LOS state, path loss and shadowing are shared across
    bands, small-scale fading is per band.
    """
    rng = _realization_rng(config.seed, realization_index)
    cp = config.channel_params
    num_bs, num_users, num_bands = config.num_bs, config.num_users, config.num_bands

    bs_positions = rng.uniform(0.0, config.side_length, size=(num_bs, 2))
    user_positions = rng.uniform(0.0, config.side_length, size=(num_users, 2))

    d = _link_distances(user_positions, bs_positions)
    los = rng.random(size=(num_users, num_bs)) < np.exp(-cp.los_decay * d)
    shadow_std_normal = rng.standard_normal(size=(num_users, num_bs))

    d_clamped = np.maximum(d, MIN_PATHLOSS_DISTANCE_M)
    log_d = np.log10(d_clamped)
    pl_los = cp.pathloss_intercept_los + 10.0 * cp.pathloss_exponent_los * log_d
    pl_nlos = cp.pathloss_intercept_nlos + 10.0 * cp.pathloss_exponent_nlos * log_d
    sigma = np.where(los, cp.shadowing_sigma_los, cp.shadowing_sigma_nlos)
    pathloss_db = np.where(los, pl_los, pl_nlos) + sigma * shadow_std_normal

    amplitude = 10.0 ** (-pathloss_db / 20.0)
    if cp.small_scale == "rayleigh":
        # Unit mean power: each complex sample has variance 1/2 per component.
        gauss = rng.standard_normal(size=(num_users, num_bs, num_bands, 2))
        fade = (gauss[..., 0] + 1j * gauss[..., 1]) / np.sqrt(2.0)
        channel = amplitude[:, :, None] * fade
    else:
        channel = np.broadcast_to(
            amplitude[:, :, None], (num_users, num_bs, num_bands)
        ).astype(np.complex128)

    channel = np.ascontiguousarray(channel)
    for arr in (bs_positions, user_positions, channel):
        arr.flags.writeable = False

    return NetworkRealization(
        bs_positions=bs_positions,
        user_positions=user_positions,
        channel=channel,
        noise_power_per_band=config.noise_power_per_band,
    )


def _parse_scenario_sections(parser: configparser.ConfigParser) -> ScenarioConfig:
    if "scenario" not in parser or "channel_params" not in parser:
        raise ValueError("config file needs [scenario] and [channel_params] sections")
    sc = parser["scenario"]
    ch = parser["channel_params"]
    params = ChannelParams(
        pathloss_intercept_los=ch.getfloat("pathloss_intercept_los"),
        pathloss_exponent_los=ch.getfloat("pathloss_exponent_los"),
        pathloss_intercept_nlos=ch.getfloat("pathloss_intercept_nlos"),
        pathloss_exponent_nlos=ch.getfloat("pathloss_exponent_nlos"),
        shadowing_sigma_los=ch.getfloat("shadowing_sigma_los"),
        shadowing_sigma_nlos=ch.getfloat("shadowing_sigma_nlos"),
        los_decay=ch.getfloat("los_decay"),
        small_scale=ch.get("small_scale", "rayleigh").strip(),
    )
    return ScenarioConfig(
        num_bs=sc.getint("num_bs"),
        num_users=sc.getint("num_users"),
        side_length=sc.getfloat("side_length"),
        num_bands=sc.getint("num_bands"),
        total_bandwidth=sc.getfloat("total_bandwidth"),
        carrier_freq=sc.getfloat("carrier_freq"),
        noise_psd=sc.getfloat("noise_psd"),
        user_power_budget=sc.getfloat("user_power_budget"),
        channel_params=params,
        seed=sc.getint("seed", 0),
    )


def load_scenario_config(path) -> ScenarioConfig:
    """Read a ScenarioConfig from an INI-style file (see configs/)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ValueError(f"cannot read config file: {path}")
    return _parse_scenario_sections(parser)
