"""Comparison algorithms: RSU-V2V, LA-V2V, MRL, and DRL-QoS next-hop rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .routing import (
    LinkSampler,
    MODE_V2I,
    MODE_V2V,
    reachable_rsus,
    screen_candidates_with_mode,
)
from .topology import Topology, distances_from


@dataclass(frozen=True)
class StaticScoreWeights:
    """Weights of the static link-score terms used by RSU-V2V and LA-V2V."""

    w_rate: float = 1.0
    w_ber: float = 1.0
    w_dist: float = 1.0
    w_load: float = 1.0

    def __post_init__(self) -> None:
        for name in ("w_rate", "w_ber", "w_dist", "w_load"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")


@dataclass(frozen=True)
class QosTargets:
    """Target state vector and deviation weights for the DRL-QoS reward.

    State components are (instability, load, normalized rate, ber); the
    default target is a perfectly stable, unloaded, full-rate clean link.
    Deviation weights lean on the error-rate term: chasing the full-rate
    target otherwise drags the agent onto marginal long links.
    """

    targets: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 0.0)
    weights: tuple[float, float, float, float] = (1.0, 0.3, 0.5, 3.0)

    def __post_init__(self) -> None:
        if len(self.targets) != 4 or len(self.weights) != 4:
            raise ConfigurationError("targets and weights must have 4 entries")
        if any(w < 0 for w in self.weights):
            raise ConfigurationError("deviation weights must be >= 0")


class QTable:
    """Sparse state-action values keyed by (node id, neighbor id)."""

    def __init__(self) -> None:
        self.values: dict[tuple[int, int], float] = {}

    def get(self, src: int, neighbor: int) -> float:
        return self.values.get((src, neighbor), 0.0)

    def set(self, src: int, neighbor: int, value: float) -> None:
        self.values[(src, neighbor)] = value

    def __len__(self) -> int:
        return len(self.values)


def _score_inputs(topo: Topology, src: int, dst: int, bundle, rate_max_bps: float):
    d_dst = distances_from(topo, dst)
    dist_ratio = d_dst[bundle.ids] / d_dst[src]
    rate_norm = bundle.rate_bps / rate_max_bps
    return rate_norm, dist_ratio


def rsu_v2v_candidates(
    topo: Topology,
    src: int,
    dst: int,
    visited: frozenset[int] | set[int] = frozenset(),
):
    """Candidate set for the RSU-prioritized rule, as (ids, mode).

    Under coverage, candidates are forward neighbors sharing an RSU with
    the source; when that set is empty, or no RSU is reachable at all,
    the rule degrades to plain V2V screening.
    """
    rsus = reachable_rsus(topo, src)
    mode = MODE_V2I if rsus else MODE_V2V
    return screen_candidates_with_mode(topo, src, dst, mode, visited, rsus or None)


def rsu_v2v_next_hop(
    topo: Topology,
    src: int,
    dst: int,
    sampler: LinkSampler,
    weights: StaticScoreWeights,
    rate_max_bps: float,
    visited: frozenset[int] | set[int] = frozenset(),
) -> int | None:
    """RSU-prioritized forwarding with degradation to plain V2V."""
    ids, _ = rsu_v2v_candidates(topo, src, dst, visited)
    if len(ids) == 0:
        return None
    bundle = sampler.assess(topo, src, ids)
    rate_norm, dist_ratio = _score_inputs(topo, src, dst, bundle, rate_max_bps)
    score = (
        weights.w_rate * rate_norm
        - weights.w_ber * bundle.ber
        - weights.w_dist * dist_ratio
    )
    return int(ids[int(np.argmax(score))])


def la_v2v_next_hop(
    topo: Topology,
    src: int,
    dst: int,
    sampler: LinkSampler,
    weights: StaticScoreWeights,
    rate_max_bps: float,
    visited: frozenset[int] | set[int] = frozenset(),
) -> int | None:
    """Load-aware pure-V2V forwarding: the static score minus a load penalty."""
    ids, _ = screen_candidates_with_mode(topo, src, dst, MODE_V2V, visited)
    if len(ids) == 0:
        return None
    bundle = sampler.assess(topo, src, ids)
    rate_norm, dist_ratio = _score_inputs(topo, src, dst, bundle, rate_max_bps)
    score = (
        weights.w_rate * rate_norm
        - weights.w_ber * bundle.ber
        - weights.w_dist * dist_ratio
        - weights.w_load * bundle.load
    )
    return int(ids[int(np.argmax(score))])


def mrl_reward(rate_norm, ber, dist_ratio):
    """Immediate reward of forwarding to a candidate."""
    return rate_norm - ber - dist_ratio


def mrl_next_hop(
    qtable: QTable,
    topo: Topology,
    src: int,
    dst: int,
    sampler: LinkSampler,
    rate_max_bps: float,
    visited: frozenset[int] | set[int] = frozenset(),
    *,
    lr: float = 0.1,
    discount: float = 0.9,
    epsilon: float = 0.1,
    mix_eta: float = 0.5,
    rng: np.random.Generator,
) -> tuple[int | None, QTable]:
    """Epsilon-greedy choice over mixed immediate reward and Q-value.

    The Q entry of the taken (src, chosen) pair is updated in place with
    the standard one-step bootstrap from the chosen node's own candidate
    set. Returns the possibly-updated table alongside the choice.
    """
    ids, _ = screen_candidates_with_mode(topo, src, dst, MODE_V2V, visited)
    if len(ids) == 0:
        return None, qtable
    bundle = sampler.assess(topo, src, ids)
    rate_norm, dist_ratio = _score_inputs(topo, src, dst, bundle, rate_max_bps)
    reward = mrl_reward(rate_norm, bundle.ber, dist_ratio)
    q_vals = np.array([qtable.get(src, int(i)) for i in ids])
    score = mix_eta * reward + (1.0 - mix_eta) * q_vals

    if rng.random() < epsilon:
        idx = int(rng.integers(len(ids)))
    else:
        idx = int(np.argmax(score))
    chosen = int(ids[idx])

    next_ids, _ = screen_candidates_with_mode(
        topo, chosen, dst, MODE_V2V, set(visited) | {chosen}
    )
    best_next = max((qtable.get(chosen, int(i)) for i in next_ids), default=0.0)
    target = float(reward[idx]) + discount * best_next
    qtable.set(src, chosen, (1.0 - lr) * qtable.get(src, chosen) + lr * target)
    return chosen, qtable


def drl_qos_next_hop(
    qos: QosTargets,
    topo: Topology,
    src: int,
    dst: int,
    sampler: LinkSampler,
    rate_max_bps: float,
    visited: frozenset[int] | set[int] = frozenset(),
    *,
    epsilon: float = 0.1,
    w_dist: float = 1.0,
    rng: np.random.Generator,
) -> int | None:
    """QoS-target tracking choice: reward peaks when the link state hits
    the target vector, with a distance-progress tie to the destination."""
    ids, _ = screen_candidates_with_mode(topo, src, dst, MODE_V2V, visited)
    if len(ids) == 0:
        return None
    bundle = sampler.assess(topo, src, ids)
    rate_norm, dist_ratio = _score_inputs(topo, src, dst, bundle, rate_max_bps)
    state = (1.0 - bundle.stability, bundle.load, rate_norm, bundle.ber)
    deviation = sum(
        w * np.abs(component - t)
        for w, component, t in zip(qos.weights, state, qos.targets)
    )
    reward = np.exp(-deviation)
    score = reward - w_dist * dist_ratio
    if rng.random() < epsilon:
        idx = int(rng.integers(len(ids)))
    else:
        idx = int(np.argmax(score))
    return int(ids[idx])
