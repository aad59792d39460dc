"""Batch experiment engine: episodes, density sweeps, aggregation, auditing."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import (
    QTable,
    drl_qos_next_hop,
    la_v2v_next_hop,
    mrl_next_hop,
    rsu_v2v_candidates,
    rsu_v2v_next_hop,
)
from .channel import LinkQuality, calibration_rate_bps
from .config import SimConfig
from .errors import ConfigurationError
from .netstate import global_congestion, node_load, tx_delay, vehicle_queue_delay
from .routing import (
    AdaptiveScheme,
    LinkSampler,
    MODE_RECOVERY,
    MODE_V2I,
    MODE_V2V,
    MetricWeights,
    hop_metric,
    screen_candidates_with_mode,
)
from .topology import Topology, distance, init_topology, step_mobility

ALGORITHMS = ("proposed", "rsu-v2v", "la-v2v", "mrl", "drl-qos")

# fixed tags keeping every RNG purpose on its own stream
_S_PLACEMENT, _S_PAIRS, _S_BACKGROUND, _S_CHANNEL, _S_SUCCESS, _S_EXPLORE = range(6)

OUTCOME_DELIVERED = "delivered"
OUTCOME_NO_ROUTE = "no_route"
OUTCOME_DROP = "hop_drop"
OUTCOME_RELIABILITY = "c3_reliability"
OUTCOME_LOAD = "c4_load"
OUTCOME_DEADLINE = "c5_deadline"
OUTCOME_MAX_HOPS = "max_hops"


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(key))


@dataclass
class EpisodeMetrics:
    """Per-episode outcome counters."""

    delivered: bool
    interruptions: int
    hops: int
    e2e_delay_s: float
    mean_hop_ber: float | None
    delivered_bits: float
    wall_time_s: float
    outcome: str


@dataclass
class HopRecord:
    """Everything needed to re-audit one hop offline."""

    sender: int
    receiver: int
    mode: str
    switched: bool
    distance_m: float
    prr: float
    ber: float
    rate_bps: float
    stability: float | None
    next_load: float | None
    metric: float | None
    weights: tuple[float, float, float, float] | None
    c_value: float | None
    dist_to_dst_before: float
    dist_to_dst_after: float


@dataclass
class EpisodeTrace:
    src: int
    dst: int
    nodes: list[int]
    hops: list[HopRecord]
    outcome: str
    carries: int
    switches: int
    metrics: EpisodeMetrics | None = None


@dataclass
class SweepRow:
    """One aggregated (density, algorithm) result row."""

    n_vehicles: int
    algorithm: str
    interruptions_mean: float
    pdr: float
    ber_mean: float | None
    throughput_bps: float
    delay_mean_s: float | None
    path_len_mean: float | None
    composite_score: float | None = None


@dataclass
class HopChoice:
    """Normalized decision shape shared by all five algorithms."""

    chosen: int | None
    carry: bool = False
    mode: str = MODE_V2V
    switched: bool = False
    quality: LinkQuality | None = None
    stability: float | None = None
    load: float | None = None
    metric: float | None = None
    weights: tuple[float, float, float, float] | None = None
    c_value: float | None = None
    rsu_assoc: int | None = None


class ProposedAdapter:
    name = "proposed"

    def __init__(self, cfg: SimConfig, rate_max_bps: float, explore_rng):
        self.scheme = AdaptiveScheme(
            cfg.weights,
            cfg.switching,
            density_divisor=cfg.congestion.density_divisor,
            signal_threshold_w=cfg.routing.v2i_signal_threshold_w,
        )

    def begin_episode(self) -> None:
        self.scheme.begin_episode()

    def decide(self, topo, src, dst, visited, sampler, c_global) -> HopChoice:
        d = self.scheme.decide(topo, src, dst, visited, sampler, c_global)
        w = self.scheme.last_weights
        assoc = None
        if d.mode == MODE_V2I:
            assoc = _nearest_rsu(topo, src)
        return HopChoice(
            chosen=d.chosen,
            carry=d.carry,
            mode=d.mode,
            switched=d.switched,
            quality=d.quality,
            stability=d.chosen_stability,
            load=d.chosen_load,
            metric=d.chosen_metric,
            weights=(w.alpha, w.beta, w.gamma, w.delta),
            c_value=self.scheme.last_c,
            rsu_assoc=assoc,
        )


def _nearest_rsu(topo: Topology, src: int) -> int | None:
    diff = topo.rsu_positions - topo.positions[src]
    d = np.hypot(diff[:, 0], diff[:, 1])
    k = int(np.argmin(d))
    if d[k] <= topo.rsu_coverage_m:
        return -(k + 1)
    return None


class _StaticBaselineAdapter:
    """Shared shape for the two static-score baselines."""

    def __init__(self, cfg: SimConfig, rate_max_bps: float, explore_rng):
        self.cfg = cfg
        self.rate_max = rate_max_bps

    def begin_episode(self) -> None:
        pass

    def _finish(self, topo, src, ids, chosen, sampler, mode) -> HopChoice:
        if chosen is None:
            return HopChoice(chosen=None, mode=mode)
        bundle = sampler.assess(topo, src, ids)
        idx = int(np.searchsorted(ids, chosen))
        return HopChoice(
            chosen=chosen,
            mode=mode,
            quality=bundle.quality(idx),
            stability=float(bundle.stability[idx]),
            load=float(bundle.load[idx]),
        )


class RsuV2VAdapter(_StaticBaselineAdapter):
    name = "rsu-v2v"

    def decide(self, topo, src, dst, visited, sampler, c_global) -> HopChoice:
        chosen = rsu_v2v_next_hop(
            topo, src, dst, sampler, self.cfg.baselines.score, self.rate_max, visited
        )
        ids, mode = rsu_v2v_candidates(topo, src, dst, visited)
        choice = self._finish(topo, src, ids, chosen, sampler, mode)
        if choice.chosen is not None and mode == MODE_V2I:
            choice.rsu_assoc = _nearest_rsu(topo, src)
        return choice


class LaV2VAdapter(_StaticBaselineAdapter):
    name = "la-v2v"

    def decide(self, topo, src, dst, visited, sampler, c_global) -> HopChoice:
        chosen = la_v2v_next_hop(
            topo, src, dst, sampler, self.cfg.baselines.score, self.rate_max, visited
        )
        ids, _ = screen_candidates_with_mode(topo, src, dst, MODE_V2V, visited)
        return self._finish(topo, src, ids, chosen, sampler, MODE_V2V)


class MrlAdapter:
    name = "mrl"

    def __init__(self, cfg: SimConfig, rate_max_bps: float, explore_rng):
        self.cfg = cfg
        self.rate_max = rate_max_bps
        self.rng = explore_rng
        self.qtable = QTable()  # persists across the episodes of one run

    def begin_episode(self) -> None:
        pass

    def decide(self, topo, src, dst, visited, sampler, c_global) -> HopChoice:
        b = self.cfg.baselines
        chosen, self.qtable = mrl_next_hop(
            self.qtable, topo, src, dst, sampler, self.rate_max, visited,
            lr=b.mrl_lr, discount=b.mrl_discount, epsilon=b.mrl_epsilon,
            mix_eta=b.mrl_eta, rng=self.rng,
        )
        if chosen is None:
            return HopChoice(chosen=None, mode=MODE_V2V)
        ids, _ = screen_candidates_with_mode(topo, src, dst, MODE_V2V, visited)
        bundle = sampler.assess(topo, src, ids)
        idx = int(np.searchsorted(ids, chosen))
        return HopChoice(
            chosen=chosen,
            mode=MODE_V2V,
            quality=bundle.quality(idx),
            stability=float(bundle.stability[idx]),
            load=float(bundle.load[idx]),
        )


class DrlQosAdapter:
    name = "drl-qos"

    def __init__(self, cfg: SimConfig, rate_max_bps: float, explore_rng):
        self.cfg = cfg
        self.rate_max = rate_max_bps
        self.rng = explore_rng

    def begin_episode(self) -> None:
        pass

    def decide(self, topo, src, dst, visited, sampler, c_global) -> HopChoice:
        b = self.cfg.baselines
        chosen = drl_qos_next_hop(
            b.qos, topo, src, dst, sampler, self.rate_max, visited,
            epsilon=b.drl_epsilon, w_dist=b.score.w_dist, rng=self.rng,
        )
        if chosen is None:
            return HopChoice(chosen=None, mode=MODE_V2V)
        ids, _ = screen_candidates_with_mode(topo, src, dst, MODE_V2V, visited)
        bundle = sampler.assess(topo, src, ids)
        idx = int(np.searchsorted(ids, chosen))
        return HopChoice(
            chosen=chosen,
            mode=MODE_V2V,
            quality=bundle.quality(idx),
            stability=float(bundle.stability[idx]),
            load=float(bundle.load[idx]),
        )


_ADAPTERS = {
    "proposed": ProposedAdapter,
    "rsu-v2v": RsuV2VAdapter,
    "la-v2v": LaV2VAdapter,
    "mrl": MrlAdapter,
    "drl-qos": DrlQosAdapter,
}


def make_adapter(name: str, cfg: SimConfig, rate_max_bps: float, explore_rng):
    if name not in _ADAPTERS:
        raise ConfigurationError(f"unknown algorithm '{name}'")
    return _ADAPTERS[name](cfg, rate_max_bps, explore_rng)


def run_episode(
    cfg: SimConfig,
    adapter,
    topo0: Topology,
    rngs: dict[str, np.random.Generator],
    c_global: float,
    collect_trace: bool = False,
) -> tuple[EpisodeMetrics, EpisodeTrace | None]:
    """Walk one packet from a random source to a random destination.

    Every decision (or carry wait) consumes one mobility slot. The episode
    ends on delivery, a Bernoulli drop, a no-route interruption, or a
    violated path constraint; only a no-route event counts as an
    interruption.
    """
    topo = topo0.copy()
    n = topo.n_vehicles
    bg = cfg.congestion.background_load_mean
    if bg > 0:
        # bounded spread: deep queue outliers would distort next-hop choices
        topo.queue_len = np.minimum(
            topo.buffer_cap, rngs["background"].uniform(0.0, 2.0 * bg * topo.buffer_cap, n)
        )

    src = int(rngs["pairs"].integers(n))
    dst = int(rngs["pairs"].integers(n - 1))
    if dst >= src:
        dst += 1

    sampler = LinkSampler(cfg.channel, cfg.routing.v_ref_mps, rngs["channel"])
    success_rng = rngs["success"]
    adapter.begin_episode()

    visited = {src}
    nodes = [src]
    hop_records: list[HopRecord] = []
    current = src
    carry_left = cfg.routing.carry_slots_max
    interruptions = 0
    hops = 0
    carries = 0
    switches = 0
    ber_sum = 0.0
    prr_product = 1.0
    delay_s = 0.0
    slots = 0
    delivered = False
    outcome = OUTCOME_NO_ROUTE

    while True:
        slots += 1
        sampler.new_slot()
        choice = adapter.decide(topo, current, dst, visited, sampler, c_global)

        topo.rsu_in_degree[:] = 0
        if choice.rsu_assoc is not None:
            topo.rsu_in_degree[-choice.rsu_assoc - 1] += 1

        if choice.chosen is None:
            if choice.carry and carry_left > 0:
                carry_left -= 1
                carries += 1
                topo = _advance(topo, cfg)
                continue
            interruptions += 1
            outcome = OUTCOME_NO_ROUTE
            break

        nxt = choice.chosen
        lq = choice.quality
        hops += 1
        ber_sum += lq.ber
        if choice.switched:
            switches += 1

        if collect_trace:
            hop_records.append(HopRecord(
                sender=current,
                receiver=nxt,
                mode=choice.mode,
                switched=choice.switched,
                distance_m=lq.distance_m,
                prr=lq.prr,
                ber=lq.ber,
                rate_bps=lq.rate_bps,
                stability=choice.stability,
                next_load=choice.load,
                metric=choice.metric,
                weights=choice.weights,
                c_value=choice.c_value,
                dist_to_dst_before=distance(
                    tuple(topo.positions[current]), tuple(topo.positions[dst])
                ),
                dist_to_dst_after=distance(
                    tuple(topo.positions[nxt]), tuple(topo.positions[dst])
                ),
            ))

        if float(success_rng.random()) >= lq.prr:
            outcome = OUTCOME_DROP
            break

        # accepted hop: charge delay, then the sender's queue
        delay_s += tx_delay(cfg.channel.packet_bits, lq.rate_bps)
        arrival_load = node_load(float(topo.queue_len[nxt]), topo.buffer_cap)
        if nxt != dst:
            delay_s += vehicle_queue_delay(arrival_load, cfg.delay)
        topo.queue_len[current] = min(
            topo.buffer_cap, topo.queue_len[current] + cfg.congestion.load_per_packet
        )

        nodes.append(nxt)
        visited.add(nxt)
        prr_product *= lq.prr
        carry_left = cfg.routing.carry_slots_max

        if prr_product < cfg.routing.pdr_min:
            outcome = OUTCOME_RELIABILITY
            break
        if delay_s > cfg.routing.t_max_s:
            outcome = OUTCOME_DEADLINE
            break
        if nxt != dst and arrival_load > cfg.routing.q_max:
            outcome = OUTCOME_LOAD
            break
        if nxt == dst:
            delivered = True
            outcome = OUTCOME_DELIVERED
            break
        if hops >= cfg.sim.max_hops:
            outcome = OUTCOME_MAX_HOPS
            break

        current = nxt
        topo = _advance(topo, cfg)

    metrics = EpisodeMetrics(
        delivered=delivered,
        interruptions=interruptions,
        hops=hops,
        e2e_delay_s=delay_s,
        mean_hop_ber=(ber_sum / hops) if hops > 0 else None,
        delivered_bits=cfg.channel.packet_bits if delivered else 0.0,
        wall_time_s=slots * cfg.sim.dt_s,
        outcome=outcome,
    )
    trace = None
    if collect_trace:
        trace = EpisodeTrace(
            src=src, dst=dst, nodes=nodes, hops=hop_records,
            outcome=outcome, carries=carries, switches=switches, metrics=metrics,
        )
    return metrics, trace


def _advance(topo: Topology, cfg: SimConfig) -> Topology:
    out = step_mobility(topo, cfg.sim.dt_s)
    out.queue_len *= 1.0 - cfg.congestion.decay_per_slot
    return out


@dataclass
class PointResult:
    n_vehicles: int
    algorithm: str
    metrics: list[EpisodeMetrics]
    traces: list[EpisodeTrace] | None
    placement_hash: str


def run_point(
    cfg: SimConfig,
    algorithm: str,
    n_vehicles: int,
    point_idx: int,
    collect_traces: bool = False,
) -> PointResult:
    """Run every episode of one (density, algorithm) cell.

    The topology placement stream is keyed without the algorithm, so all
    algorithms at a point start from an identical snapshot; pair and
    background-load streams are likewise shared, while channel, delivery
    and exploration streams are per-algorithm.
    """
    master = cfg.sim.seed
    topo0 = init_topology(
        n_vehicles,
        cfg.topology.region,
        _rng(master, point_idx, _S_PLACEMENT),
        v2v_radius_m=cfg.topology.v2v_radius_m,
        rsu_coverage_m=cfg.topology.rsu_coverage_m,
        buffer_cap=cfg.topology.buffer_cap,
    )
    placement_hash = hashlib.sha256(
        topo0.positions.tobytes() + topo0.velocities.tobytes()
    ).hexdigest()

    c_global = global_congestion(
        n_vehicles, cfg.topology.v2v_radius_m, cfg.topology.region,
        cfg.congestion.density_divisor,
    )
    rate_max = calibration_rate_bps(cfg.channel)
    algo_idx = ALGORITHMS.index(algorithm)
    adapter = make_adapter(
        algorithm, cfg, rate_max, _rng(master, point_idx, _S_EXPLORE, algo_idx)
    )

    all_metrics: list[EpisodeMetrics] = []
    traces = [] if collect_traces else None
    for ep in range(cfg.sim.episodes):
        rngs = {
            "pairs": _rng(master, point_idx, _S_PAIRS, ep),
            "background": _rng(master, point_idx, _S_BACKGROUND, ep),
            "channel": _rng(master, point_idx, _S_CHANNEL, algo_idx, ep),
            "success": _rng(master, point_idx, _S_SUCCESS, algo_idx, ep),
        }
        metrics, trace = run_episode(cfg, adapter, topo0, rngs, c_global, collect_traces)
        all_metrics.append(metrics)
        if collect_traces:
            traces.append(trace)
    return PointResult(n_vehicles, algorithm, all_metrics, traces, placement_hash)


def aggregate_point(result: PointResult) -> SweepRow:
    """Fold a point's episodes into one result row (composite left unset)."""
    ms = result.metrics
    n_eps = len(ms)
    delivered = [m for m in ms if m.delivered]
    total_hops = sum(m.hops for m in ms)
    ber_sum = sum(m.mean_hop_ber * m.hops for m in ms if m.hops > 0)
    total_time = sum(m.wall_time_s for m in ms)
    return SweepRow(
        n_vehicles=result.n_vehicles,
        algorithm=result.algorithm,
        interruptions_mean=sum(m.interruptions for m in ms) / n_eps,
        pdr=len(delivered) / n_eps,
        ber_mean=(ber_sum / total_hops) if total_hops > 0 else None,
        throughput_bps=sum(m.delivered_bits for m in ms) / total_time,
        delay_mean_s=(sum(m.e2e_delay_s for m in delivered) / len(delivered))
        if delivered else None,
        path_len_mean=(sum(m.hops for m in delivered) / len(delivered))
        if delivered else None,
    )


# metric extraction order for the composite: (value getter, lower_is_better)
_COMPOSITE_METRICS = (
    (lambda r: r.interruptions_mean, True),
    (lambda r: r.ber_mean, True),
    (lambda r: r.delay_mean_s, True),
    (lambda r: r.throughput_bps, False),
    (lambda r: r.pdr, False),
)


def composite_score(rows: list[SweepRow]) -> list[float]:
    """Equal-weight min-max composite of the five headline metrics.

    Lower-is-better metrics are inverted after normalization; a metric
    that is identical across algorithms contributes the midpoint 0.5 for
    everyone; an absent value contributes the worst score for that row.
    """
    if len(rows) < 2:
        raise ConfigurationError("composite needs at least two algorithms")
    parts = np.zeros(len(rows))
    for getter, invert in _COMPOSITE_METRICS:
        values = [getter(r) for r in rows]
        present = [v for v in values if v is not None]
        normalized = np.zeros(len(rows))
        if present:
            lo, hi = min(present), max(present)
            for i, v in enumerate(values):
                if v is None:
                    normalized[i] = 0.0
                elif hi == lo:
                    normalized[i] = 0.5
                else:
                    x = (v - lo) / (hi - lo)
                    normalized[i] = 1.0 - x if invert else x
        parts += 0.2 * normalized
    return [float(100.0 * p) for p in parts]


def _point_task(args) -> SweepRow:
    cfg, point_idx, n, algorithm = args
    return aggregate_point(run_point(cfg, algorithm, n, point_idx))


def run_sweep(
    cfg: SimConfig,
    algorithms: tuple[str, ...] | list[str] = ALGORITHMS,
    threads: int | None = None,
) -> list[SweepRow]:
    """Run the full density sweep for the selected algorithms.

    Rows come back ordered by density then algorithm. Composite scores are
    filled per density whenever at least two algorithms ran. Worker count
    honours IOV_SIM_THREADS; results are identical at any thread count.
    """
    algorithms = list(algorithms)
    for name in algorithms:
        if name not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm '{name}'")
    if threads is None:
        threads = int(os.environ.get("IOV_SIM_THREADS", "1") or "1")

    tasks = [
        (cfg, pi, n, a)
        for pi, n in enumerate(cfg.sim.n_vehicles)
        for a in algorithms
    ]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_point_task, tasks))
    else:
        rows = [_point_task(t) for t in tasks]

    per_density = len(algorithms)
    if per_density >= 2:
        for start in range(0, len(rows), per_density):
            group = rows[start:start + per_density]
            for row, score in zip(group, composite_score(group)):
                row.composite_score = score
    return rows


def audit_episode(trace: EpisodeTrace, cfg: SimConfig) -> list[str]:
    """Re-validate a delivered episode offline; returns found violations."""
    problems: list[str] = []
    if trace.outcome != OUTCOME_DELIVERED:
        return ["audit only applies to delivered episodes"]
    if len(set(trace.nodes)) != len(trace.nodes):
        problems.append("path repeats a node")

    prr_product = 1.0
    delay = 0.0
    metric_sum_online = 0.0
    metric_sum_offline = 0.0
    has_metrics = all(h.metric is not None for h in trace.hops)

    for i, hop in enumerate(trace.hops):
        final = i == len(trace.hops) - 1
        if hop.distance_m > cfg.topology.v2v_radius_m + 1e-9:
            problems.append(f"hop {i}: distance exceeds v2v radius")
        if hop.mode != MODE_RECOVERY and not (
            hop.dist_to_dst_after < hop.dist_to_dst_before
        ):
            problems.append(f"hop {i}: no progress toward destination")
        prr_product *= hop.prr
        delay += tx_delay(cfg.channel.packet_bits, hop.rate_bps)
        if not final:
            delay += vehicle_queue_delay(hop.next_load, cfg.delay)
            if hop.next_load is not None and hop.next_load > cfg.routing.q_max:
                problems.append(f"hop {i}: intermediate load above q_max")
        if has_metrics:
            metric_sum_online += hop.metric
            w = MetricWeights(*hop.weights, baselines=cfg.weights.baselines)
            metric_sum_offline += hop_metric(
                hop.prr, hop.next_load, hop.c_value, hop.stability, w
            )

    if prr_product < cfg.routing.pdr_min:
        problems.append("path reliability below pdr_min")
    if delay > cfg.routing.t_max_s:
        problems.append("path delay exceeds t_max")
    if trace.metrics is not None and abs(delay - trace.metrics.e2e_delay_s) > 1e-9:
        problems.append("offline delay does not match online accumulation")
    if has_metrics and abs(metric_sum_online - metric_sum_offline) > 1e-9:
        problems.append("offline path cost does not match online accumulation")
    return problems
