"""Loads, congestion, delay decomposition, and constraint checkers."""

import numpy as np
import pytest

from conftest import make_topology
from iov_sim.channel import ChannelParams, UNIT_FADING, assess_link
from iov_sim.errors import ConfigurationError, DeadLinkError
from iov_sim.netstate import (
    CongestionParams,
    DelayParams,
    PathRecord,
    decay_loads,
    global_congestion,
    meets_deadline,
    meets_load_cap,
    meets_reliability,
    node_load,
    path_delay,
    path_pdr,
    rsu_queue_delay,
    tx_delay,
    update_load_on_forward,
    vehicle_queue_delay,
)
from iov_sim.topology import RoadRegion

# independently computed: min(1, 10 * pi * 300^2 / 4e6) at 50-digit precision
CONGESTION_10_VEHICLES = 0.70685834705770347865


class TestGlobalCongestion:
    def test_frozen_reference(self, region):
        c = global_congestion(10, 300.0, region)
        assert abs(c - 0.70686) < 1e-4
        assert c == pytest.approx(CONGESTION_10_VEHICLES, rel=1e-12)

    def test_saturates_at_one(self, region):
        assert global_congestion(50, 300.0, region) == 1.0
        assert global_congestion(10_000, 300.0, region) == 1.0

    def test_divisor_rescales(self, region):
        c1 = global_congestion(10, 300.0, region)
        c2 = global_congestion(10, 300.0, region, density_divisor=2.0)
        assert c2 == pytest.approx(c1 / 2.0)

    def test_empty_network(self, region):
        assert global_congestion(0, 300.0, region) == 0.0

    def test_invalid_args_rejected(self, region):
        with pytest.raises(ConfigurationError):
            global_congestion(-1, 300.0, region)
        with pytest.raises(ConfigurationError):
            global_congestion(10, 0.0, region)
        with pytest.raises(ConfigurationError):
            global_congestion(10, 300.0, region, density_divisor=0.0)


class TestNodeLoad:
    def test_fraction_and_saturation(self):
        assert node_load(10.0, 50.0) == pytest.approx(0.2)
        assert node_load(80.0, 50.0) == 1.0
        assert node_load(0.0, 50.0) == 0.0

    def test_invalid_args_rejected(self):
        with pytest.raises(ConfigurationError):
            node_load(1.0, 0.0)
        with pytest.raises(ConfigurationError):
            node_load(-1.0, 50.0)


class TestLoadBookkeeping:
    def test_forward_charges_one_packet(self):
        t = make_topology([[0.0, 0.0], [10.0, 0.0]])
        v = t.vehicle(0)
        out = update_load_on_forward(v, CongestionParams())
        assert out.queue_len == 1.0

    def test_forward_caps_at_buffer(self):
        t = make_topology([[0.0, 0.0]], queue_len=[49.5])
        out = update_load_on_forward(t.vehicle(0), CongestionParams(load_per_packet=2.0))
        assert out.queue_len == 50.0

    def test_decay_is_multiplicative(self):
        t = make_topology([[0.0, 0.0], [10.0, 0.0]], queue_len=[10.0, 40.0])
        out = decay_loads(t, CongestionParams(decay_per_slot=0.1))
        assert np.allclose(out.queue_len, [9.0, 36.0])
        assert np.allclose(t.queue_len, [10.0, 40.0])

    @pytest.mark.parametrize("kwargs", [
        {"decay_per_slot": 1.0},
        {"load_per_packet": 0.0},
        {"density_divisor": 0.0},
        {"background_load_mean": -0.1},
    ])
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            CongestionParams(**kwargs)


class TestDelays:
    def test_tx_delay(self):
        assert tx_delay(10_000.0, 1e6) == pytest.approx(0.01)

    def test_zero_rate_is_dead(self):
        with pytest.raises(DeadLinkError):
            tx_delay(10_000.0, 0.0)

    def test_vehicle_queue_delay_linear(self):
        p = DelayParams()
        assert vehicle_queue_delay(0.0, p) == 0.0
        assert vehicle_queue_delay(0.5, p) == pytest.approx(0.5 * p.tau0_s)
        with pytest.raises(ConfigurationError):
            vehicle_queue_delay(1.5, p)

    def test_rsu_queue_delay_linear_in_degree(self):
        p = DelayParams()
        assert rsu_queue_delay(0, p) == 0.0
        assert rsu_queue_delay(3, p) == pytest.approx(3 * p.k_rsu * p.tau_rsu_s)
        with pytest.raises(ConfigurationError):
            rsu_queue_delay(-1, p)


def _line_path(chan: ChannelParams, spacing: float, hops: int):
    """Straight chain 0-1-..-hops with unit fading on every link."""
    positions = [[i * spacing, 0.0] for i in range(hops + 1)]
    topo = make_topology(positions, queue_len=[5.0] * (hops + 1))
    quality = [assess_link(chan, spacing, UNIT_FADING) for _ in range(hops)]
    return topo, PathRecord(nodes=list(range(hops + 1)), hop_quality=quality)


class TestPathRecord:
    def test_rejects_repeated_nodes(self, chan):
        q = assess_link(chan, 100.0, UNIT_FADING)
        with pytest.raises(ConfigurationError):
            PathRecord(nodes=[0, 1, 0], hop_quality=[q, q])

    def test_rejects_quality_count_mismatch(self, chan):
        q = assess_link(chan, 100.0, UNIT_FADING)
        with pytest.raises(ConfigurationError):
            PathRecord(nodes=[0, 1, 2], hop_quality=[q])

    def test_single_node_path(self):
        p = PathRecord(nodes=[3], hop_quality=[])
        assert p.n_hops == 0


class TestPathDelay:
    def test_decomposition_hand_computed(self, chan):
        topo, path = _line_path(chan, 100.0, 3)
        delay = DelayParams()
        q = path.hop_quality[0]
        # 3 tx terms plus queue terms at the 2 intermediates (load 0.1 each)
        expected = 3 * (chan.packet_bits / q.rate_bps) + 2 * (delay.tau0_s * 0.1)
        assert path_delay(path, topo, delay, chan.packet_bits) == pytest.approx(expected)

    def test_endpoints_add_no_queue_delay(self, chan):
        topo, path = _line_path(chan, 100.0, 1)
        q = path.hop_quality[0]
        expected = chan.packet_bits / q.rate_bps
        assert path_delay(path, topo, DelayParams(), chan.packet_bits) == pytest.approx(expected)

    def test_rsu_intermediate_uses_degree_term(self, chan):
        topo = make_topology(
            [[0.0, 100.0], [400.0, 100.0]],
            rsu_positions=[[200.0, 100.0]],
        )
        topo.rsu_in_degree[0] = 2
        q = assess_link(chan, 200.0, UNIT_FADING)
        path = PathRecord(nodes=[0, -1, 1], hop_quality=[q, q])
        delay = DelayParams()
        expected = 2 * (chan.packet_bits / q.rate_bps) + 2 * delay.k_rsu * delay.tau_rsu_s
        assert path_delay(path, topo, delay, chan.packet_bits) == pytest.approx(expected)


class TestConstraintCheckers:
    def test_path_pdr_is_product(self, chan):
        _, path = _line_path(chan, 100.0, 4)
        p = path.hop_quality[0].prr
        assert path_pdr(path) == pytest.approx(p ** 4)

    def test_reliability_threshold(self, chan):
        _, path = _line_path(chan, 100.0, 2)
        assert meets_reliability(path, 0.7)
        assert not meets_reliability(path, 0.999999)

    def test_load_cap(self):
        assert meets_load_cap([0.1, 0.95], 0.95)
        assert not meets_load_cap([0.1, 0.96], 0.95)
        assert meets_load_cap([], 0.95)

    def test_deadline(self):
        assert meets_deadline(9.99, 10.0)
        assert not meets_deadline(10.01, 10.0)

    def test_randomized_pdr_bounds(self, chan):
        rng = np.random.default_rng(17)
        for _ in range(500):
            hops = int(rng.integers(1, 8))
            d = rng.uniform(10.0, 300.0)
            topo, path = _line_path(chan, d, hops)
            pdr = path_pdr(path)
            assert 0.01 ** hops <= pdr <= 0.999 ** hops

    @pytest.mark.parametrize("kwargs", [
        {"tau0_s": 0.0}, {"k_rsu": -1.0}, {"tau_rsu_s": 0.0},
    ])
    def test_invalid_delay_params_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            DelayParams(**kwargs)
