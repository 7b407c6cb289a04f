"""Air-to-ground radio chain: LoS probability, path loss, SNR/SINR, expected SE.

All functions broadcast over numpy arrays. Powers are in watt, distances in
meters. Interference arguments are *full-band* expected powers; they are
scaled by the victim's band fraction together with signal and noise, which
makes SINR independent of the bandwidth share.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

log = logging.getLogger(__name__)

THERMAL_NOISE_DBM_PER_HZ = -174.0


def dbm_to_watt(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0) * 1e-3


def watt_to_dbm(watt):
    return 10.0 * np.log10(np.asarray(watt, dtype=float) / 1e-3)


class PathKind(enum.Enum):
    LOS = "LoS"
    NLOS = "NLoS"


@dataclass(frozen=True)
class ChannelParams:
    """Propagation and link-budget constants. Defaults are the urban small-cell set."""

    alpha: float = 9.61
    beta: float = 0.16
    a_los: float = 41.1
    a_nlos: float = 33.0
    gamma_los: float = 2.09
    gamma_nlos: float = 3.75
    p_tx: float = float(dbm_to_watt(24.0))
    bandwidth: float = 10e6
    carrier: float = 2e9
    ue_noise_figure: float = 9.0

    def __post_init__(self):
        for name in ("alpha", "beta", "a_los", "a_nlos", "gamma_los", "gamma_nlos",
                     "p_tx", "bandwidth", "carrier", "ue_noise_figure"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"ChannelParams.{name} must be positive, got {value}")
        if self.gamma_nlos < self.gamma_los:
            warnings.warn("gamma_nlos < gamma_los: NLoS decays slower than LoS", stacklevel=3)

    @cached_property
    def a_los_lin(self) -> float:
        return 10.0 ** (-self.a_los / 10.0)

    @cached_property
    def a_nlos_lin(self) -> float:
        return 10.0 ** (-self.a_nlos / 10.0)

    @cached_property
    def noise_density(self) -> float:
        """Noise power per Hz including the UE noise figure (watt/Hz)."""
        return 10.0 ** ((THERMAL_NOISE_DBM_PER_HZ + self.ue_noise_figure) / 10.0) * 1e-3

    @cached_property
    def noise_full_band(self) -> float:
        return self.bandwidth * self.noise_density

    def constants(self, kind: PathKind) -> tuple[float, float]:
        """(linear reference gain, path-loss exponent) for a path state."""
        if kind is PathKind.LOS:
            return self.a_los_lin, self.gamma_los
        return self.a_nlos_lin, self.gamma_nlos


def elevation_deg(h, r):
    # arctan2 gives exactly 90 deg at r = 0 without dividing
    return np.degrees(np.arctan2(h, r))


def los_probability(params: ChannelParams, h, r):
    theta = elevation_deg(h, r)
    return 1.0 / (1.0 + params.alpha * np.exp(-params.beta * (theta - params.alpha)))


def nlos_probability(params: ChannelParams, h, r):
    return 1.0 - los_probability(params, h, r)


def path_loss_db(params: ChannelParams, kind: PathKind, d):
    d = np.asarray(d, dtype=float)
    if np.any(d < 1.0):
        log.debug("distance below the 1 m reference clamped to 1 m")
        d = np.maximum(d, 1.0)
    a_db = params.a_los if kind is PathKind.LOS else params.a_nlos
    gamma = params.gamma_los if kind is PathKind.LOS else params.gamma_nlos
    return a_db + 10.0 * gamma * np.log10(d)


def _gain(params: ChannelParams, kind: PathKind, h, r):
    a_lin, gamma = params.constants(kind)
    # same 1 m reference clamp as path_loss_db
    d2 = np.maximum(np.square(r) + np.square(h), 1.0)
    return a_lin * d2 ** (-0.5 * gamma)


def received_power(params: ChannelParams, kind: PathKind, h, r, band_fraction=1.0):
    return band_fraction * params.p_tx * _gain(params, kind, h, r)


def expected_received_power(params: ChannelParams, h, r, band_fraction=1.0):
    """LoS/NLoS-weighted received power, the deterministic 'signal strength'."""
    p = los_probability(params, h, r)
    return band_fraction * params.p_tx * (
        p * _gain(params, PathKind.LOS, h, r) + (1.0 - p) * _gain(params, PathKind.NLOS, h, r)
    )


def noise_power(params: ChannelParams, band_fraction=1.0):
    return band_fraction * params.noise_full_band


def snr(params: ChannelParams, kind: PathKind, h, r):
    return params.p_tx * _gain(params, kind, h, r) / params.noise_full_band


def sinr(params: ChannelParams, kind: PathKind, h, r_serving, interferer_expected_powers=(),
         band_fraction=1.0):
    """SINR on the serving link against already-filtered full-band interferers."""
    interference = float(np.sum(interferer_expected_powers))
    if interference < 0:
        raise ValueError("interferer powers must be non-negative")
    signal = received_power(params, kind, h, r_serving, band_fraction)
    return signal / (band_fraction * interference + noise_power(params, band_fraction))


def path_se(params: ChannelParams, kind: PathKind, h, r, expected_interference=0.0):
    """Shannon SE of one path state; band fraction cancels out."""
    signal = params.p_tx * _gain(params, kind, h, r)
    return np.log2(1.0 + signal / (expected_interference + params.noise_full_band))


def expected_se(params: ChannelParams, h, r_serving, expected_interference=0.0, band_fraction=1.0):
    """LoS/NLoS mixture of Shannon spectral efficiencies (bps/Hz)."""
    # signal, interference and noise all scale with band_fraction
    if np.any(np.asarray(band_fraction) <= 0):
        raise ValueError("band_fraction must be in (0, 1]")
    p = los_probability(params, h, r_serving)
    return (p * path_se(params, PathKind.LOS, h, r_serving, expected_interference)
            + (1.0 - p) * path_se(params, PathKind.NLOS, h, r_serving, expected_interference))
