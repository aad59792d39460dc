"""Shared fixtures and topology builders for the test suite."""

import numpy as np
import pytest

from iov_sim.channel import ChannelParams
from iov_sim.topology import RoadRegion, Topology


@pytest.fixture
def chan() -> ChannelParams:
    return ChannelParams()


@pytest.fixture
def region() -> RoadRegion:
    return RoadRegion(20000.0, 200.0)


def make_topology(
    positions,
    velocities=None,
    queue_len=None,
    rsu_positions=None,
    region=None,
    v2v_radius_m=300.0,
    rsu_coverage_m=500.0,
    buffer_cap=50.0,
) -> Topology:
    """Hand-built snapshot; defaults to parked vehicles and no RSUs."""
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    if velocities is None:
        velocities = np.zeros((n, 2))
    if queue_len is None:
        queue_len = np.zeros(n)
    if rsu_positions is None:
        rsu_positions = np.empty((0, 2))
    if region is None:
        region = RoadRegion(20000.0, 200.0)
    return Topology(
        region=region,
        v2v_radius_m=v2v_radius_m,
        positions=positions,
        velocities=np.asarray(velocities, dtype=float),
        queue_len=np.asarray(queue_len, dtype=float),
        buffer_cap=buffer_cap,
        rsu_positions=np.asarray(rsu_positions, dtype=float),
        rsu_coverage_m=rsu_coverage_m,
    )


def random_topology(rng: np.random.Generator, n: int, box=(600.0, 200.0)) -> Topology:
    """Random snapshot in a small box: mixed in/out-of-range pairs."""
    positions = np.column_stack([
        rng.uniform(0.0, box[0], n),
        rng.uniform(0.0, box[1], n),
    ])
    speed = rng.uniform(15.0, 30.0, n)
    heading = rng.uniform(-0.05, 0.05, n)
    velocities = np.column_stack([speed * np.cos(heading), speed * np.sin(heading)])
    return make_topology(
        positions,
        velocities=velocities,
        queue_len=rng.uniform(0.0, 20.0, n),
        region=RoadRegion(box[0], box[1]),
    )
