"""Queue loads, congestion level, and the end-to-end delay decomposition."""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import pi

import numpy as np

from .channel import LinkQuality
from .errors import ConfigurationError, DeadLinkError
from .topology import RoadRegion, Topology, VehicleState


@dataclass(frozen=True)
class CongestionParams:
    """Queue bookkeeping constants.

    `background_load_mean` seeds each episode with stationary queue
    occupancy from traffic the harness does not simulate packet by
    packet; zero disables it.
    """

    decay_per_slot: float = 0.05
    load_per_packet: float = 1.0
    density_divisor: float = 1.0
    background_load_mean: float = 0.08

    def __post_init__(self) -> None:
        if not 0.0 <= self.decay_per_slot < 1.0:
            raise ConfigurationError("decay_per_slot must be in [0, 1)")
        if self.load_per_packet <= 0:
            raise ConfigurationError("load_per_packet must be positive")
        if self.density_divisor <= 0:
            raise ConfigurationError("density_divisor must be positive")
        if self.background_load_mean < 0:
            raise ConfigurationError("background_load_mean must be >= 0")


@dataclass(frozen=True)
class DelayParams:
    """Queuing delay constants, sized to keep every delay term nontrivial."""

    tau0_s: float = 0.05
    k_rsu: float = 1.0
    tau_rsu_s: float = 0.001

    def __post_init__(self) -> None:
        for name in ("tau0_s", "k_rsu", "tau_rsu_s"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")


@dataclass
class PathRecord:
    """A forwarding path plus the per-hop link quality actually observed."""

    nodes: list[int]
    hop_quality: list[LinkQuality]

    def __post_init__(self) -> None:
        if len(self.nodes) < 1:
            raise ConfigurationError("path must contain at least one node")
        if len(self.hop_quality) != len(self.nodes) - 1:
            raise ConfigurationError("need exactly one quality record per hop")
        if len(set(self.nodes)) != len(self.nodes):
            raise ConfigurationError("path must not repeat node ids")

    @property
    def n_hops(self) -> int:
        return len(self.hop_quality)


def node_load(queue_len: float, buffer_cap: float) -> float:
    """Queue occupancy as a fraction of capacity, saturating at 1."""
    if buffer_cap <= 0:
        raise ConfigurationError("buffer_cap must be positive")
    if queue_len < 0:
        raise ConfigurationError("queue_len must be >= 0")
    return min(1.0, queue_len / buffer_cap)


def global_congestion(
    n_vehicles: int, v2v_radius_m: float, region: RoadRegion, density_divisor: float = 1.0
) -> float:
    """Network-wide congestion level from the coverage-to-area ratio."""
    if n_vehicles < 0:
        raise ConfigurationError("n_vehicles must be >= 0")
    if v2v_radius_m <= 0 or density_divisor <= 0:
        raise ConfigurationError("v2v_radius_m and density_divisor must be positive")
    return min(1.0, n_vehicles * pi * v2v_radius_m**2 / (region.area_m2 * density_divisor))


def update_load_on_forward(vehicle: VehicleState, params: CongestionParams) -> VehicleState:
    """Charge one forwarded packet to the vehicle's queue, capped at capacity."""
    new_q = min(vehicle.buffer_cap, vehicle.queue_len + params.load_per_packet)
    return replace(vehicle, queue_len=new_q)


def decay_loads(topo: Topology, params: CongestionParams) -> Topology:
    """Apply one slot of multiplicative queue decay to every vehicle."""
    out = topo.copy()
    out.queue_len *= 1.0 - params.decay_per_slot
    return out


def tx_delay(packet_bits: float, rate_bps: float) -> float:
    """Serialization delay of one packet on one link."""
    if packet_bits <= 0:
        raise ConfigurationError("packet_bits must be positive")
    if rate_bps <= 0:
        raise DeadLinkError("link rate must be positive to carry a packet")
    return packet_bits / rate_bps


def vehicle_queue_delay(load: float, params: DelayParams) -> float:
    """Queuing delay at a vehicle, linear in its load fraction."""
    if not 0.0 <= load <= 1.0:
        raise ConfigurationError("load must be in [0, 1]")
    return params.tau0_s * load


def rsu_queue_delay(in_degree: int, params: DelayParams) -> float:
    """Queuing delay at an RSU, linear in its active incoming links."""
    if in_degree < 0:
        raise ConfigurationError("in_degree must be >= 0")
    return params.k_rsu * in_degree * params.tau_rsu_s


def path_delay(
    path: PathRecord, topo: Topology, delay: DelayParams, packet_bits: float
) -> float:
    """End-to-end delay of a recorded path against the given topology state.

    Transmission delay accrues on every hop. Queuing delay accrues on
    intermediate nodes only: neither the source nor the destination adds
    a queue term. Propagation delay is neglected.
    """
    total = 0.0
    for quality in path.hop_quality:
        total += tx_delay(packet_bits, quality.rate_bps)
    for node_id in path.nodes[1:-1]:
        if topo.is_rsu(node_id):
            total += rsu_queue_delay(topo.rsu(node_id).in_degree, delay)
        else:
            load = node_load(float(topo.queue_len[node_id]), topo.buffer_cap)
            total += vehicle_queue_delay(load, delay)
    return total


def path_pdr(path: PathRecord) -> float:
    """End-to-end delivery probability, the product of per-hop PRRs."""
    out = 1.0
    for quality in path.hop_quality:
        out *= quality.prr
    return out


def meets_reliability(path: PathRecord, pdr_min: float) -> bool:
    return path_pdr(path) >= pdr_min


def meets_load_cap(loads: list[float], q_max: float) -> bool:
    """True when every intermediate load is at or below the cap."""
    return all(q <= q_max for q in loads)


def meets_deadline(delay_s: float, t_max_s: float) -> bool:
    return delay_s <= t_max_s
