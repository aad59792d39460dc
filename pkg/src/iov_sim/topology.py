"""Road geometry, vehicle/RSU populations, mobility, and neighborhood queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NodeNotFoundError

SPEED_RANGE_MPS = (15.0, 30.0)
HEADING_RANGE_RAD = (-0.05, 0.05)


@dataclass(frozen=True)
class RoadRegion:
    """Rectangular road segment [0, length] x [0, width], metres."""

    length_m: float
    width_m: float

    def __post_init__(self) -> None:
        if self.length_m <= 0 or self.width_m <= 0:
            raise ConfigurationError("road region dimensions must be positive")

    @property
    def area_m2(self) -> float:
        return self.length_m * self.width_m


@dataclass
class VehicleState:
    """Point vehicle with a forwarding queue."""

    id: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    queue_len: float = 0.0
    buffer_cap: float = 50.0


@dataclass
class RsuState:
    """Roadside unit fixed on the centerline."""

    id: int
    position: tuple[float, float]
    coverage_m: float
    in_degree: int = 0


@dataclass
class Topology:
    """One snapshot of the network.

    Vehicle ids are row indices into the arrays; RSU ids are negative
    (-1 .. -M) so the two populations never collide in a path record.
    """

    region: RoadRegion
    v2v_radius_m: float
    positions: np.ndarray            # (N, 2) float64
    velocities: np.ndarray           # (N, 2) float64
    queue_len: np.ndarray            # (N,) float64, packets
    buffer_cap: float
    rsu_positions: np.ndarray        # (M, 2) float64
    rsu_coverage_m: float
    rsu_in_degree: np.ndarray = field(default=None)  # (M,) int64

    def __post_init__(self) -> None:
        if self.rsu_in_degree is None:
            self.rsu_in_degree = np.zeros(len(self.rsu_positions), dtype=np.int64)

    @property
    def n_vehicles(self) -> int:
        return len(self.positions)

    @property
    def n_rsus(self) -> int:
        return len(self.rsu_positions)

    def is_rsu(self, node_id: int) -> bool:
        return node_id < 0

    def _check_vehicle(self, node_id: int) -> None:
        if not 0 <= node_id < self.n_vehicles:
            raise NodeNotFoundError(f"unknown vehicle id {node_id}")

    def _check_rsu(self, node_id: int) -> None:
        if not -self.n_rsus <= node_id <= -1:
            raise NodeNotFoundError(f"unknown RSU id {node_id}")

    def node_position(self, node_id: int) -> tuple[float, float]:
        if self.is_rsu(node_id):
            self._check_rsu(node_id)
            p = self.rsu_positions[-node_id - 1]
        else:
            self._check_vehicle(node_id)
            p = self.positions[node_id]
        return (float(p[0]), float(p[1]))

    def vehicle(self, node_id: int) -> VehicleState:
        self._check_vehicle(node_id)
        return VehicleState(
            id=node_id,
            position=tuple(self.positions[node_id]),
            velocity=tuple(self.velocities[node_id]),
            queue_len=float(self.queue_len[node_id]),
            buffer_cap=self.buffer_cap,
        )

    def rsu(self, node_id: int) -> RsuState:
        self._check_rsu(node_id)
        k = -node_id - 1
        return RsuState(
            id=node_id,
            position=tuple(self.rsu_positions[k]),
            coverage_m=self.rsu_coverage_m,
            in_degree=int(self.rsu_in_degree[k]),
        )

    def copy(self) -> "Topology":
        return Topology(
            region=self.region,
            v2v_radius_m=self.v2v_radius_m,
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            queue_len=self.queue_len.copy(),
            buffer_cap=self.buffer_cap,
            rsu_positions=self.rsu_positions.copy(),
            rsu_coverage_m=self.rsu_coverage_m,
            rsu_in_degree=self.rsu_in_degree.copy(),
        )


def rsu_count(n_vehicles: int) -> int:
    """RSU population scales with density but never drops below five."""
    return max(5, n_vehicles // 200)


def init_topology(
    n_vehicles: int,
    region: RoadRegion,
    rng_seed,
    *,
    v2v_radius_m: float = 300.0,
    rsu_coverage_m: float = 500.0,
    buffer_cap: float = 50.0,
) -> Topology:
    """Place vehicles uniformly at random and RSUs on an even centerline grid.

    Draw order (x, y, speed, heading) is fixed so one seed always yields
    the same topology.
    """
    if n_vehicles < 2:
        raise ConfigurationError("n_vehicles must be at least 2")
    if v2v_radius_m <= 0:
        raise ConfigurationError("v2v_radius_m must be positive")
    if rsu_coverage_m <= v2v_radius_m:
        raise ConfigurationError("rsu_coverage_m must exceed v2v_radius_m")
    if buffer_cap <= 0:
        raise ConfigurationError("buffer_cap must be positive")

    rng = np.random.default_rng(rng_seed)
    x = rng.uniform(0.0, region.length_m, n_vehicles)
    y = rng.uniform(0.0, region.width_m, n_vehicles)
    speed = rng.uniform(*SPEED_RANGE_MPS, n_vehicles)
    heading = rng.uniform(*HEADING_RANGE_RAD, n_vehicles)

    positions = np.column_stack([x, y])
    velocities = np.column_stack([speed * np.cos(heading), speed * np.sin(heading)])

    m = rsu_count(n_vehicles)
    rsu_x = (np.arange(m) + 0.5) * region.length_m / m
    rsu_positions = np.column_stack([rsu_x, np.full(m, region.width_m / 2.0)])

    return Topology(
        region=region,
        v2v_radius_m=v2v_radius_m,
        positions=positions,
        velocities=velocities,
        queue_len=np.zeros(n_vehicles),
        buffer_cap=buffer_cap,
        rsu_positions=rsu_positions,
        rsu_coverage_m=rsu_coverage_m,
        rsu_in_degree=np.zeros(m, dtype=np.int64),
    )


def step_mobility(topo: Topology, dt: float) -> Topology:
    """Advance every vehicle one time step.

    The x axis wraps modulo the road length; the y axis reflects off both
    road edges with the lateral velocity negated. RSUs do not move.
    """
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    out = topo.copy()
    out.positions += out.velocities * dt
    out.positions[:, 0] %= topo.region.length_m

    w = topo.region.width_m
    y = out.positions[:, 1]
    below = y < 0.0
    above = y > w
    # one reflection is enough: |vy * dt| is far below the road width
    y[below] = -y[below]
    y[above] = 2.0 * w - y[above]
    out.velocities[below | above, 1] *= -1.0
    return out


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Euclidean distance between two positions."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def distances_from(topo: Topology, node_id: int) -> np.ndarray:
    """Distances from one vehicle to every vehicle (self included, zero)."""
    topo._check_vehicle(node_id)
    diff = topo.positions - topo.positions[node_id]
    return np.hypot(diff[:, 0], diff[:, 1])


def v2v_neighbors(topo: Topology, node_id: int) -> set[int]:
    """Vehicles within the V2V radius of `node_id` (boundary inclusive)."""
    d = distances_from(topo, node_id)
    mask = d <= topo.v2v_radius_m
    mask[node_id] = False
    return set(int(i) for i in np.flatnonzero(mask))


def rsu_distances_from(topo: Topology, node_id: int) -> np.ndarray:
    topo._check_vehicle(node_id)
    diff = topo.rsu_positions - topo.positions[node_id]
    return np.hypot(diff[:, 0], diff[:, 1])


def reachable_rsus(topo: Topology, node_id: int) -> set[int]:
    """RSUs whose coverage disk contains the vehicle (boundary inclusive)."""
    d = rsu_distances_from(topo, node_id)
    return set(int(-(k + 1)) for k in np.flatnonzero(d <= topo.rsu_coverage_m))
