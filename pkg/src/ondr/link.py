"""Backscatter link budget.

Two-way log-distance path loss referenced to ``reference_distance``::

    rssi = tx_power - fixed_loss - 20 * n * log10(d / d_ref)

Readability, identification rate and per-read miss probability are all
functions of the margin ``rssi - rssi_floor``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleCalibration, InvalidProfile, NonPositiveDistance

PEAK_RATE_SPS = 119.0
READER_POWER_RANGE = (20.0, 30.0)  # dBm
READER_BAND = (902.0, 928.0)  # MHz
DEFAULT_FLOOR = -60.0
DEFAULT_REFERENCE_CM = 10.0
CALIBRATION_RANGE_CM = 125.0
# absorbs log10 rounding so the calibrated boundary itself stays readable
_FLOOR_TOL_DB = 1e-9


def calibrate_fixed_loss(tx_power: float, boundary_distance: float, floor: float = DEFAULT_FLOOR,
                         n: float = 2.0, reference_distance: float = DEFAULT_REFERENCE_CM) -> float:
    """Fixed loss placing the ``floor`` crossing exactly at ``boundary_distance``."""
    if not boundary_distance > 0 or not reference_distance > 0 or not n > 0:
        raise InfeasibleCalibration(
            f"boundary={boundary_distance}, reference={reference_distance}, n={n}"
        )
    return tx_power - floor - 20.0 * n * math.log10(boundary_distance / reference_distance)


DEFAULT_FIXED_LOSS = calibrate_fixed_loss(30.0, CALIBRATION_RANGE_CM)


@dataclass(frozen=True)
class LinkParams:
    tx_power: float = 30.0
    frequency: float = 915.0
    path_loss_exponent: float = 2.0
    fixed_loss: float = DEFAULT_FIXED_LOSS
    rssi_floor: float = DEFAULT_FLOOR
    reference_distance: float = DEFAULT_REFERENCE_CM
    # margin at which rate and miss probability saturate
    saturation_margin: float = 6.0
    peak_rate: float = PEAK_RATE_SPS
    p_base: float = 0.01

    def __post_init__(self):
        if not self.reference_distance > 0:
            raise InvalidProfile("reference_distance must be positive")
        if not self.saturation_margin > 0:
            raise InvalidProfile("saturation_margin must be positive")
        if not 0.0 <= self.p_base <= 1.0:
            raise InvalidProfile(f"p_base {self.p_base} not a probability")


def reader_profile(tx_power: float = 30.0, frequency: float = 915.0, **kw) -> LinkParams:
    """LinkParams for a reader configured inside the supported operating envelope."""
    lo, hi = READER_POWER_RANGE
    if not lo <= tx_power <= hi:
        raise InvalidProfile(f"tx_power {tx_power} dBm outside {lo}-{hi} dBm")
    lo, hi = READER_BAND
    if not lo <= frequency <= hi:
        raise InvalidProfile(f"frequency {frequency} MHz outside {lo}-{hi} MHz")
    return LinkParams(tx_power=tx_power, frequency=frequency, **kw)


def _check(distance):
    if not distance > 0:
        raise NonPositiveDistance(f"distance must be > 0 cm, got {distance}")


def rssi_at(link: LinkParams, distance: float) -> float:
    _check(distance)
    n = link.path_loss_exponent
    return link.tx_power - link.fixed_loss - 20.0 * n * math.log10(distance / link.reference_distance)


def margin(link: LinkParams, distance: float) -> float:
    return rssi_at(link, distance) - link.rssi_floor


def max_range(link: LinkParams) -> float:
    """Distance (cm) at which the RSSI meets the floor."""
    n = link.path_loss_exponent
    return link.reference_distance * 10 ** ((link.tx_power - link.fixed_loss - link.rssi_floor) / (20.0 * n))


def is_readable(link: LinkParams, distance: float) -> bool:
    return rssi_at(link, distance) >= link.rssi_floor - _FLOOR_TOL_DB


def _ramp(link, distance):
    return min(max(margin(link, distance) / link.saturation_margin, 0.0), 1.0)


def read_rate(link: LinkParams, distance: float) -> float:
    """Identification rate in samples per second; zero at or below the floor."""
    if not is_readable(link, distance):
        return 0.0
    return link.peak_rate * _ramp(link, distance)


def miss_probability(link: LinkParams, distance: float) -> float:
    """Chance that a lone reply in a slot is not decoded."""
    if not is_readable(link, distance):
        return 1.0
    return 1.0 - (1.0 - link.p_base) * _ramp(link, distance)
