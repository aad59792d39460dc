"""Radio link model: frozen references, clamps, and randomized bounds."""

import math

import numpy as np
import pytest

from iov_sim.channel import (
    PRR_CEIL,
    PRR_FLOOR,
    ChannelParams,
    FadingSample,
    UNIT_FADING,
    assess_link,
    assess_links_array,
    ber,
    calibration_rate_bps,
    link_rate,
    prr,
    rx_power,
    sample_fading,
    snr,
)
from iov_sim.errors import ConfigurationError, InvalidLinkError

# high-precision references computed independently with mpmath at 50 digits
BER_AT_SNR_2 = 0.078649603525142565329
BER_AT_SNR_1 = 0.15865525393145705141
BER_AT_SNR_10 = 0.00078270112900127483875
RX_100M_UNIT_W = 9.8946468400720479926e-6
RATE_MAX_BPS = 34455475.258217156


class TestBer:
    def test_frozen_reference_snr_2(self):
        assert abs(ber(2.0) - BER_AT_SNR_2) < 1e-10

    @pytest.mark.parametrize("snr_value,expected", [
        (1.0, BER_AT_SNR_1),
        (10.0, BER_AT_SNR_10),
    ])
    def test_frozen_reference_other_points(self, snr_value, expected):
        assert abs(ber(snr_value) - expected) < 1e-10

    def test_zero_snr_is_coin_flip(self):
        assert ber(0.0) == pytest.approx(0.5)

    def test_negative_snr_rejected(self):
        with pytest.raises(InvalidLinkError):
            ber(-1e-9)

    def test_monotone_decreasing(self):
        rng = np.random.default_rng(7)
        s = np.sort(rng.uniform(0.0, 50.0, 10_000))
        values = np.array([ber(x) for x in s])
        assert np.all(np.diff(values) <= 0)
        assert np.all((values >= 0.0) & (values <= 0.5))


class TestPrr:
    def test_clip_endpoints(self):
        assert prr(0.0) == PRR_CEIL == 0.999
        assert prr(1.0) == PRR_FLOOR == 0.01

    def test_interior_passthrough(self):
        assert prr(0.4) == pytest.approx(0.6)

    def test_out_of_domain_rejected(self):
        with pytest.raises(InvalidLinkError):
            prr(-0.01)
        with pytest.raises(InvalidLinkError):
            prr(1.01)

    def test_bounds_randomized(self):
        rng = np.random.default_rng(11)
        for b in rng.uniform(0.0, 1.0, 10_000):
            assert PRR_FLOOR <= prr(float(b)) <= PRR_CEIL


class TestRxPower:
    def test_frozen_reference_100m(self, chan):
        assert rx_power(chan, 100.0, UNIT_FADING) == pytest.approx(
            RX_100M_UNIT_W, rel=1e-12
        )

    def test_calibration_snr_near_10(self, chan):
        # the 70 dB effective gain exists precisely for this operating point
        s = snr(chan, rx_power(chan, 100.0, UNIT_FADING))
        assert 9.5 < s < 10.5

    def test_below_reference_distance_clamps(self, chan):
        assert rx_power(chan, 0.25, UNIT_FADING) == rx_power(chan, 1.0, UNIT_FADING)

    def test_nonpositive_distance_rejected(self, chan):
        with pytest.raises(InvalidLinkError):
            rx_power(chan, 0.0, UNIT_FADING)

    def test_pathloss_exponent(self, chan):
        # doubling the distance divides power by 2**3.5
        ratio = rx_power(chan, 100.0, UNIT_FADING) / rx_power(chan, 200.0, UNIT_FADING)
        assert ratio == pytest.approx(2.0 ** 3.5, rel=1e-12)

    def test_shadowing_is_db_domain(self, chan):
        base = rx_power(chan, 100.0, UNIT_FADING)
        up = rx_power(chan, 100.0, FadingSample(shadow_db=10.0, multipath_gain=1.0))
        assert up == pytest.approx(10.0 * base, rel=1e-12)

    def test_multipath_scales_linearly(self, chan):
        base = rx_power(chan, 100.0, UNIT_FADING)
        half = rx_power(chan, 100.0, FadingSample(shadow_db=0.0, multipath_gain=0.5))
        assert half == pytest.approx(0.5 * base, rel=1e-12)


class TestRateAndSnr:
    def test_noise_power(self, chan):
        assert chan.noise_power_w == pytest.approx(1e-6)

    def test_calibration_rate_frozen(self, chan):
        assert calibration_rate_bps(chan) == pytest.approx(RATE_MAX_BPS, rel=1e-12)

    def test_link_rate_shannon_form(self, chan):
        assert link_rate(chan, 3.0) == pytest.approx(chan.bandwidth_hz * 2.0)

    def test_negative_inputs_rejected(self, chan):
        with pytest.raises(InvalidLinkError):
            snr(chan, -1.0)
        with pytest.raises(InvalidLinkError):
            link_rate(chan, -1.0)


class TestParams:
    def test_effective_gain_override(self):
        assert ChannelParams().effective_gain == pytest.approx(1e7)
        plain = ChannelParams(effective_gain_db=None, gain_tx=2.0, gain_rx=3.0)
        assert plain.effective_gain == 6.0

    @pytest.mark.parametrize("kwargs", [
        {"tx_power_w": 0.0},
        {"bandwidth_hz": -1.0},
        {"pathloss_exp": 1.5},
        {"shadow_sigma_db": -0.1},
        {"packet_bits": 0.0},
    ])
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            ChannelParams(**kwargs)

    def test_negative_multipath_rejected(self):
        with pytest.raises(ConfigurationError):
            FadingSample(shadow_db=0.0, multipath_gain=-0.1)


class TestAssessment:
    def test_composition_matches_scalar_ops(self, chan):
        q = assess_link(chan, 150.0, UNIT_FADING)
        p = rx_power(chan, 150.0, UNIT_FADING)
        assert q.rx_power_w == p
        assert q.snr == snr(chan, p)
        assert q.ber == ber(q.snr)
        assert q.prr == prr(q.ber)
        assert q.rate_bps == link_rate(chan, q.snr)

    def test_array_matches_scalar(self, chan):
        rng = np.random.default_rng(23)
        n = 10_000
        d = rng.uniform(0.5, 400.0, n)
        shadow = rng.normal(0.0, chan.shadow_sigma_db, n)
        multi = rng.exponential(1.0, n)
        fields = assess_links_array(chan, d, shadow, multi)
        for i in range(0, n, 250):
            q = assess_link(chan, d[i], FadingSample(shadow[i], multi[i]))
            assert fields["prr"][i] == pytest.approx(q.prr, rel=1e-12, abs=1e-15)
            assert fields["ber"][i] == pytest.approx(q.ber, rel=1e-12, abs=1e-300)
            assert fields["rate_bps"][i] == pytest.approx(q.rate_bps, rel=1e-12)
        assert np.all((fields["prr"] >= PRR_FLOOR) & (fields["prr"] <= PRR_CEIL))
        assert np.all((fields["ber"] >= 0.0) & (fields["ber"] <= 1.0))
        assert np.all(fields["rate_bps"] >= 0.0)

    def test_sample_fading_moments(self, chan):
        rng = np.random.default_rng(31)
        samples = [sample_fading(chan, rng) for _ in range(4000)]
        shadow = np.array([s.shadow_db for s in samples])
        multi = np.array([s.multipath_gain for s in samples])
        assert abs(np.mean(shadow)) < 0.5
        assert np.std(shadow) == pytest.approx(chan.shadow_sigma_db, rel=0.05)
        assert np.mean(multi) == pytest.approx(1.0, rel=0.05)
        assert np.all(multi >= 0.0)

    def test_deep_fade_still_in_bounds(self, chan):
        # coherent BPSK ber tops out at 0.5, so model prr bottoms out near 0.5
        q = assess_link(chan, 300.0, FadingSample(shadow_db=-40.0, multipath_gain=1e-6))
        assert q.prr == pytest.approx(0.5, abs=1e-4)
        assert 0.0 <= q.ber <= 0.5
        assert q.rate_bps > 0.0

    def test_mpmath_cross_check(self):
        # the frozen constants above must agree with a live high-precision pass
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50
        ref = 0.5 * mpmath.erfc(mpmath.sqrt(mpmath.mpf(2) / 2))
        assert abs(float(ref) - BER_AT_SNR_2) < 1e-18
        gain = mpmath.mpf(10) ** 7
        friis = mpmath.mpf("0.1") * gain * (mpmath.mpf("0.125") / (4 * mpmath.pi)) ** 2
        rx100 = friis * (mpmath.mpf(1) / 100) ** mpmath.mpf("3.5")
        assert abs(float(rx100) - RX_100M_UNIT_W) < 1e-18
        rate = mpmath.mpf(10) ** 7 * mpmath.log(1 + rx100 / mpmath.mpf("1e-6"), 2)
        assert abs(float(rate) - RATE_MAX_BPS) < 1e-6
