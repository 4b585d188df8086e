import math

import pytest
from hypothesis import given, strategies as st

from ondr.errors import InfeasibleCalibration, InvalidProfile, NonPositiveDistance
from ondr.link import (
    LinkParams, calibrate_fixed_loss, is_readable, max_range, miss_probability, read_rate, reader_profile, rssi_at,
)

# 30 + 60 - 40*log10(12.5), evaluated by hand
ANCHOR_LOSS = 46.12359947967774


def test_calibration_examples():
    assert calibrate_fixed_loss(30, 125, -60, 2) == pytest.approx(46.124, abs=1e-3)
    assert calibrate_fixed_loss(30, 125, -60, 2) == pytest.approx(ANCHOR_LOSS, abs=1e-12)
    assert calibrate_fixed_loss(30, 10, -60, 2) == 90.0
    assert calibrate_fixed_loss(20, 125, -60, 2) == pytest.approx(36.124, abs=1e-3)


@pytest.mark.parametrize("d", [0, -5])
def test_calibration_rejects_nonphysical(d):
    with pytest.raises(InfeasibleCalibration):
        calibrate_fixed_loss(30, d, -60, 2)


def test_default_link_is_calibrated():
    assert LinkParams().fixed_loss == pytest.approx(ANCHOR_LOSS)


def test_rssi_examples():
    link = LinkParams(tx_power=30, fixed_loss=46.124)
    assert rssi_at(link, 125) == pytest.approx(-60.0, abs=1e-3)
    assert rssi_at(link, 10) == pytest.approx(-16.124, abs=1e-12)
    assert rssi_at(LinkParams(tx_power=20, fixed_loss=46.124), 70.3) == pytest.approx(-60.0, abs=0.05)


def test_rssi_20dbm_crossing_solved_independently():
    # -60 = 20 - 46.124 - 40 log10(d/10)  =>  d = 10 ** (1 + 33.876/40)
    d = 10 ** (1 + (20 - 46.124 + 60) / 40)
    assert d == pytest.approx(70.3, abs=0.05)
    assert max_range(LinkParams(tx_power=20, fixed_loss=46.124)) == pytest.approx(d)


@pytest.mark.parametrize("fn", [rssi_at, is_readable, read_rate, miss_probability])
@pytest.mark.parametrize("d", [0, -1.0])
def test_non_positive_distance(fn, d):
    with pytest.raises(NonPositiveDistance):
        fn(LinkParams(), d)


def test_readability_boundary():
    link = LinkParams()
    assert is_readable(link, 125.0)
    assert not is_readable(link, 126.0)
    assert is_readable(link, 1.0)
    assert max_range(link) == pytest.approx(125.0, abs=0.1)


def _distance_for_margin(link, m):
    n = link.path_loss_exponent
    return link.reference_distance * 10 ** ((link.tx_power - link.fixed_loss - link.rssi_floor - m) / (20 * n))


def test_rate_and_miss_ramp():
    link = LinkParams()
    assert read_rate(link, _distance_for_margin(link, 6.0)) == pytest.approx(119.0)
    assert read_rate(link, _distance_for_margin(link, 10.0)) == 119.0
    assert read_rate(link, 125.0) == pytest.approx(0.0, abs=1e-9)
    assert read_rate(link, _distance_for_margin(link, 3.0)) == pytest.approx(59.5)
    assert miss_probability(link, 200.0) == 1.0
    assert miss_probability(link, _distance_for_margin(link, 10.0)) == pytest.approx(0.01)
    assert miss_probability(link, _distance_for_margin(link, 3.0)) == pytest.approx(0.505)
    assert read_rate(link, 126.0) == 0.0


def test_reader_profile_envelope():
    assert reader_profile(20, 902).tx_power == 20
    assert reader_profile(30, 928).frequency == 928
    for p, f in [(19.9, 915), (30.1, 915), (25, 901.9), (25, 928.5)]:
        with pytest.raises(InvalidProfile):
            reader_profile(p, f)


def test_frequency_does_not_change_path_loss():
    assert rssi_at(LinkParams(frequency=902), 50) == rssi_at(LinkParams(frequency=928), 50)


distances = st.floats(0.01, 1000, allow_nan=False)
powers = st.floats(20, 30)


@given(powers, distances, distances)
def test_monotone_in_distance(p, d1, d2):
    d1, d2 = sorted((d1, d2))
    link = LinkParams(tx_power=p)
    if d2 > d1:
        assert rssi_at(link, d2) < rssi_at(link, d1)
    assert read_rate(link, d2) <= read_rate(link, d1)
    assert miss_probability(link, d2) >= miss_probability(link, d1)


@given(powers, distances)
def test_rate_and_probability_bounds(p, d):
    link = LinkParams(tx_power=p)
    r, q = read_rate(link, d), miss_probability(link, d)
    assert 0.0 <= r <= 119.0
    assert 0.0 <= q <= 1.0
    assert (r > 0) <= is_readable(link, d)
    if not is_readable(link, d):
        assert r == 0.0 and q == 1.0


@given(powers, distances)
def test_pure(p, d):
    link = LinkParams(tx_power=p)
    assert rssi_at(link, d) == rssi_at(LinkParams(tx_power=p), d)
    assert math.isfinite(rssi_at(link, d))
